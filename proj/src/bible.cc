#include "ncc/bible.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "ncc/errors.hpp"
#include "ncc/objectives.hpp"
#include "ncc/parallel.hpp"

namespace ncc {

namespace {

struct Counts {
  std::size_t a = 0, b = 0, c = 0;
};

// Lookup of m(s) by source surface, already broken into target words.
class Translator {
 public:
  explicit Translator(const TranslationModel& model) {
    const Vocabulary& sv = model.source_vocab();
    for (TokenId s : model.source_support())
      table_.emplace(sv.surface(s),
                     defuse_surface(model.target_vocab().surface(most_likely_translation(model, s))));
  }

  void add(const std::string& word, std::vector<std::string>& out) const {
    if (auto it = table_.find(word); it != table_.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
      return;
    }
    auto parts = defuse_surface(word);
    if (parts.size() < 2 || word.find(kJoiner) == std::string::npos) {
      out.push_back(word);
      return;
    }
    for (const auto& p : parts) {
      if (auto it = table_.find(p); it != table_.end())
        out.insert(out.end(), it->second.begin(), it->second.end());
      else
        out.push_back(p);
    }
  }

 private:
  std::unordered_map<std::string, std::vector<std::string>> table_;
};

Counts score_pair(const Translator& tr, std::span<const std::string> source,
                  std::span<const std::string> reference) {
  std::vector<std::string> proposed;
  for (const auto& w : source) tr.add(w, proposed);
  std::unordered_map<std::string, std::size_t> bag;
  for (const auto& w : reference) ++bag[w];
  Counts k{proposed.size(), reference.size(), 0};
  for (const auto& w : proposed) {
    auto it = bag.find(w);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++k.c;
    }
  }
  return k;
}

}  // namespace

BibleScore BibleScore::from_counts(std::size_t a, std::size_t b, std::size_t c) {
  BibleScore s{a, b, c, 0.0, 0.0, 0.0};
  s.precision = a ? static_cast<double>(c) / static_cast<double>(a) : 0.0;
  s.recall = b ? static_cast<double>(c) / static_cast<double>(b) : 0.0;
  s.f = s.precision + s.recall > 0.0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::string_view direction_name(Direction d) { return d == Direction::e_to_f ? "E->F" : "F->E"; }

Direction parse_direction(std::string_view name) {
  if (name == "E->F" || name == "EF" || name == "ef") return Direction::e_to_f;
  if (name == "F->E" || name == "FE" || name == "fe") return Direction::f_to_e;
  throw ConfigError("unknown direction '" + std::string(name) + "'");
}

std::vector<std::string> translate_segment(const TranslationModel& model,
                                           std::span<const std::string> source_tokens) {
  Translator tr(model);
  std::vector<std::string> out;
  for (const auto& w : source_tokens) tr.add(w, out);
  return out;
}

BibleScore evaluate(const TranslationModel& model, const Bitext& test,
                    std::span<const NccEntry> nccs, Direction direction,
                    const ReplayOptions& replay, unsigned workers) {
  const Side src = source_of(direction);
  if (model.source_side() != src)
    throw DomainError("model is oriented " + std::string(side_name(model.source_side())) +
                      "-first but the direction is " + std::string(direction_name(direction)));
  std::vector<NccEntry> own;
  for (const auto& e : nccs)
    if (e.side == src) own.push_back(e);
  const Bitext fused = apply_nccs(test, own, replay);
  const Translator tr(model);

  const auto& pairs = fused.pairs();
  std::vector<Counts> per(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    std::vector<std::string> source, reference;
    for (TokenId id : pairs[i].side(src)) source.push_back(fused.vocab(src).surface(id));
    for (TokenId id : test.pairs()[i].side(other(src))) reference.push_back(test.vocab(other(src)).surface(id));
    per[i] = score_pair(tr, source, reference);
  });
  Counts total;
  for (const auto& k : per) {
    total.a += k.a;
    total.b += k.b;
    total.c += k.c;
  }
  return BibleScore::from_counts(total.a, total.b, total.c);
}

void write_scores(std::span<const ScoreRow> rows, std::ostream& out) {
  out << "iteration\tdirection\ta\tb\tc\tprecision\trecall\tf\n";
  for (const auto& r : rows)
    out << r.iteration << '\t' << direction_name(r.direction) << '\t' << r.score.a << '\t'
        << r.score.b << '\t' << r.score.c << '\t' << format_nats(r.score.precision) << '\t'
        << format_nats(r.score.recall) << '\t' << format_nats(r.score.f) << '\n';
}

}  // namespace ncc
