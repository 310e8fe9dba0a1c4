#include "ncc/linker.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "ncc/errors.hpp"
#include "ncc/parallel.hpp"

namespace ncc {

namespace {

inline std::uint64_t pair_key(TokenId s, TokenId t) {
  return (static_cast<std::uint64_t>(s) << 32) | t;
}

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

TranslationModel TranslationModel::from_counts(std::shared_ptr<const Vocabulary> source_vocab,
                                               std::shared_ptr<const Vocabulary> target_vocab,
                                               std::vector<JointEntry> counts, Side source_side) {
  TranslationModel m;
  m.source_vocab_ = std::move(source_vocab);
  m.target_vocab_ = std::move(target_vocab);
  m.source_side_ = source_side;
  std::sort(counts.begin(), counts.end(), [](const JointEntry& a, const JointEntry& b) {
    return pair_key(a.source, a.target) < pair_key(b.source, b.target);
  });
  for (const auto& e : counts) {
    if (!(e.count > 0.0)) continue;
    if (!m.entries_.empty() && m.entries_.back().source == e.source &&
        m.entries_.back().target == e.target)
      m.entries_.back().count += e.count;
    else
      m.entries_.push_back(JointEntry{e.source, e.target, e.count, 0.0});
  }
  for (const auto& e : m.entries_) m.total_links_ += e.count;
  const std::size_t ns = m.source_vocab_->size();
  const std::size_t nt = m.target_vocab_->size();
  m.marginal_source_.assign(ns, 0.0);
  m.marginal_target_.assign(nt, 0.0);
  m.row_begin_.assign(ns + 1, 0);
  for (auto& e : m.entries_) {
    if (e.source >= ns || e.target >= nt) throw ModelError("link count refers to an unknown token");
    e.probability = e.count / m.total_links_;
    m.marginal_source_[e.source] += e.probability;
    m.marginal_target_[e.target] += e.probability;
    ++m.row_begin_[e.source + 1];
  }
  std::partial_sum(m.row_begin_.begin(), m.row_begin_.end(), m.row_begin_.begin());
  for (TokenId s = 0; s < ns; ++s)
    if (m.row_begin_[s + 1] > m.row_begin_[s]) m.support_.push_back(s);
  return m;
}

std::span<const JointEntry> TranslationModel::row(TokenId s) const {
  if (s + 1 >= row_begin_.size()) return {};
  return std::span<const JointEntry>(entries_).subspan(row_begin_[s],
                                                       row_begin_[s + 1] - row_begin_[s]);
}

double TranslationModel::joint(TokenId s, TokenId t) const {
  auto r = row(s);
  auto it = std::lower_bound(r.begin(), r.end(), t,
                             [](const JointEntry& e, TokenId v) { return e.target < v; });
  return (it != r.end() && it->target == t) ? it->probability : 0.0;
}

TranslationModel TranslationModel::transposed() const {
  std::vector<JointEntry> counts;
  counts.reserve(entries_.size());
  for (const auto& e : entries_) counts.push_back(JointEntry{e.target, e.source, e.count, 0.0});
  return from_counts(target_vocab_, source_vocab_, std::move(counts), other(source_side_));
}

double conditional(const TranslationModel& model, TokenId t, TokenId s) {
  const double ps = model.marginal_source(s);
  if (!(ps > 0.0)) throw DomainError("source word has no mass in the model");
  return model.joint(s, t) / ps;
}

namespace {

struct SegmentTypes {
  std::vector<TokenId> source;  // unique, ascending
  std::vector<std::uint16_t> source_count;
  std::vector<TokenId> target;
  std::vector<std::uint16_t> target_count;
};

SegmentTypes segment_types(const SegmentPair& p) {
  SegmentTypes st;
  auto collect = [](const std::vector<TokenId>& seq, std::vector<TokenId>& ids,
                    std::vector<std::uint16_t>& counts) {
    ids = seq;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    counts.assign(ids.size(), 0);
    for (TokenId id : seq) {
      auto pos = std::lower_bound(ids.begin(), ids.end(), id) - ids.begin();
      ++counts[pos];
    }
  };
  collect(p.source, st.source, st.source_count);
  collect(p.target, st.target, st.target_count);
  return st;
}

struct ScoredPair {
  std::uint16_t i = 0, j = 0;  // indices into SegmentTypes
  double score = 0.0;
  std::uint32_t cooc = 0;
};

// Greedy competitive linking over one segment, in expectation over
// uniformly random resolution of exact ties.
class SegmentLinker {
 public:
  SegmentLinker(std::vector<ScoredPair> pairs, std::size_t ns, std::size_t budget)
      : pairs_(std::move(pairs)), ns_(ns), budget_(budget) {}

  std::vector<double> run(std::vector<std::uint16_t> state) { return solve(std::move(state)); }

 private:
  static bool tied(const ScoredPair& a, const ScoredPair& b) {
    return a.score == b.score && a.cooc == b.cooc;
  }

  bool available(const ScoredPair& p, const std::vector<std::uint16_t>& st) const {
    return st[p.i] > 0 && st[ns_ + p.j] > 0;
  }

  std::vector<double> solve(std::vector<std::uint16_t> st) {
    std::vector<double> res(pairs_.size(), 0.0);
    std::size_t k = 0;
    while (true) {
      while (k < pairs_.size() && !available(pairs_[k], st)) ++k;
      if (k == pairs_.size()) return res;
      std::vector<std::size_t> group;
      for (std::size_t q = k; q < pairs_.size() && tied(pairs_[q], pairs_[k]); ++q)
        if (available(pairs_[q], st)) group.push_back(q);
      if (disjoint(group)) {
        for (std::size_t q : group) {
          const auto n = std::min(st[pairs_[q].i], st[ns_ + pairs_[q].j]);
          res[q] += n;
          st[pairs_[q].i] -= n;
          st[ns_ + pairs_[q].j] -= n;
        }
        continue;
      }
      if (memo_.size() >= budget_) {
        // Budget spent: fall back to the first pair in (score, ids) order.
        const auto& p = pairs_[group.front()];
        res[group.front()] += 1.0;
        --st[p.i];
        --st[ns_ + p.j];
        continue;
      }
      const std::vector<double>& sub = branch(st, group);
      for (std::size_t q = 0; q < res.size(); ++q) res[q] += sub[q];
      return res;
    }
  }

  bool disjoint(const std::vector<std::size_t>& group) const {
    if (group.size() < 2) return true;
    std::vector<std::uint16_t> is, js;
    for (std::size_t q : group) {
      is.push_back(pairs_[q].i);
      js.push_back(pairs_[q].j);
    }
    std::sort(is.begin(), is.end());
    std::sort(js.begin(), js.end());
    return std::adjacent_find(is.begin(), is.end()) == is.end() &&
           std::adjacent_find(js.begin(), js.end()) == js.end();
  }

  const std::vector<double>& branch(const std::vector<std::uint16_t>& st,
                                    const std::vector<std::size_t>& group) {
    if (auto it = memo_.find(st); it != memo_.end()) return it->second;
    // Reserve the slot first so the budget counts states in progress.
    auto [slot, inserted] = memo_.emplace(st, std::vector<double>());
    (void)inserted;
    double total = 0.0;
    for (std::size_t q : group)
      total += static_cast<double>(st[pairs_[q].i]) * st[ns_ + pairs_[q].j];
    std::vector<double> acc(pairs_.size(), 0.0);
    for (std::size_t q : group) {
      const double w = static_cast<double>(st[pairs_[q].i]) * st[ns_ + pairs_[q].j] / total;
      auto next = st;
      --next[pairs_[q].i];
      --next[ns_ + pairs_[q].j];
      auto sub = solve(std::move(next));
      sub[q] += 1.0;
      for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += w * sub[r];
    }
    auto& out = memo_[st];
    out = std::move(acc);
    return out;
  }

  std::vector<ScoredPair> pairs_;
  std::size_t ns_;
  std::size_t budget_;
  std::map<std::vector<std::uint16_t>, std::vector<double>> memo_;
};

struct SegmentLinks {
  std::vector<JointEntry> links;  // expected link count per (s,t) type pair
};

}  // namespace

InducedModel induce_model(const Bitext& bitext, const InductionOptions& options) {
  if (bitext.empty()) throw ModelError("cannot induce a model from an empty bitext");
  if (options.rounds < 1) throw ModelError("induction needs at least one round");

  const auto& pairs = bitext.pairs();
  const std::size_t n = pairs.size();
  std::vector<SegmentTypes> types(n);
  parallel_for(n, options.workers, [&](std::size_t i) { types[i] = segment_types(pairs[i]); });

  std::vector<std::uint32_t> df_s(bitext.vocab(Side::source).size(), 0);
  std::vector<std::uint32_t> df_t(bitext.vocab(Side::target).size(), 0);
  std::unordered_map<std::uint64_t, std::uint32_t> cooc;
  for (const auto& st : types) {
    for (TokenId s : st.source) ++df_s[s];
    for (TokenId t : st.target) ++df_t[t];
    for (TokenId s : st.source)
      for (TokenId t : st.target) ++cooc[pair_key(s, t)];
  }

  std::unordered_map<std::uint64_t, double> prev_prob;
  std::vector<SegmentLinks> seg_links(n);
  TranslationModel model;

  for (int round = 1; round <= options.rounds; ++round) {
    parallel_for(n, options.workers, [&](std::size_t idx) {
      const SegmentTypes& st = types[idx];
      std::vector<ScoredPair> sp;
      sp.reserve(st.source.size() * st.target.size());
      for (std::size_t i = 0; i < st.source.size(); ++i)
        for (std::size_t j = 0; j < st.target.size(); ++j) {
          const TokenId s = st.source[i], t = st.target[j];
          const std::uint32_t c = cooc.at(pair_key(s, t));
          double score;
          if (round == 1) {
            score = 2.0 * c / static_cast<double>(df_s[s] + df_t[t]);
          } else {
            auto it = prev_prob.find(pair_key(s, t));
            score = it == prev_prob.end() ? 0.0 : it->second;
          }
          sp.push_back(ScoredPair{static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                                  score, c});
        }
      std::stable_sort(sp.begin(), sp.end(), [](const ScoredPair& a, const ScoredPair& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.cooc > b.cooc;
      });
      std::vector<std::uint16_t> state(st.source_count);
      state.insert(state.end(), st.target_count.begin(), st.target_count.end());
      SegmentLinker linker(sp, st.source.size(), options.tie_state_budget);
      auto expected = linker.run(std::move(state));
      SegmentLinks out;
      for (std::size_t q = 0; q < sp.size(); ++q)
        if (expected[q] > 0.0)
          out.links.push_back(JointEntry{st.source[sp[q].i], st.target[sp[q].j], expected[q], 0.0});
      std::sort(out.links.begin(), out.links.end(), [](const JointEntry& a, const JointEntry& b) {
        return pair_key(a.source, a.target) < pair_key(b.source, b.target);
      });
      seg_links[idx] = std::move(out);
    });

    // Merge in segment order so the sums never depend on the worker count.
    std::unordered_map<std::uint64_t, double> counts;
    for (const auto& sl : seg_links)
      for (const auto& e : sl.links) counts[pair_key(e.source, e.target)] += e.count;
    std::vector<JointEntry> merged;
    merged.reserve(counts.size());
    for (const auto& [key, c] : counts)
      merged.push_back(JointEntry{static_cast<TokenId>(key >> 32),
                                  static_cast<TokenId>(key & 0xffffffffu), c, 0.0});
    model = TranslationModel::from_counts(bitext.vocab_ptr(Side::source),
                                          bitext.vocab_ptr(Side::target), std::move(merged));
    prev_prob.clear();
    for (const auto& e : model.entries()) prev_prob[pair_key(e.source, e.target)] = e.probability;
  }

  InducedModel result;
  result.model = std::move(model);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const auto& seq = pairs[idx].source;
    const SegmentTypes& st = types[idx];
    for (std::uint32_t pos = 0; pos < seq.size(); ++pos) {
      const TokenId s = seq[pos];
      const auto ti = std::lower_bound(st.source.begin(), st.source.end(), s) - st.source.begin();
      const double share = st.source_count[ti];
      for (const auto& e : seg_links[idx].links)
        if (e.source == s)
          result.links.push_back(LinkRecord{static_cast<std::uint32_t>(idx), pos, s, e.target,
                                            e.count / share});
    }
  }
  return result;
}

void write_model(const TranslationModel& model, std::ostream& out) {
  const Vocabulary& sv = model.source_vocab();
  const Vocabulary& tv = model.target_vocab();
  std::vector<const JointEntry*> rows;
  for (const auto& e : model.entries()) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(), [&](const JointEntry* a, const JointEntry* b) {
    const auto& as = sv.surface(a->source);
    const auto& bs = sv.surface(b->source);
    if (as != bs) return as < bs;
    return tv.surface(a->target) < tv.surface(b->target);
  });
  out << "s\tt\tcount\tprobability\n";
  for (const auto* e : rows)
    out << sv.surface(e->source) << '\t' << tv.surface(e->target) << '\t'
        << format_double(e->count, 17) << '\t' << format_double(e->probability, 12) << '\n';
}

TranslationModel read_model(std::istream& in, Side source_side) {
  auto sv = std::make_shared<Vocabulary>();
  auto tv = std::make_shared<Vocabulary>();
  std::vector<JointEntry> counts;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1 && line.rfind("s\t", 0) == 0) continue;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) f.push_back(cell);
    if (f.size() < 3) throw ParseError("model row " + std::to_string(row) + " has too few columns");
    auto intern = [](Vocabulary& v, const std::string& s) {
      if (s.find(kJoiner) != std::string::npos) {
        try {
          return v.intern_fused(Compound::parse(s));
        } catch (const ParseError&) {
        }
      }
      return v.intern(s);
    };
    double c = 0.0;
    try {
      c = std::stod(f[2]);
    } catch (const std::exception&) {
      throw ParseError("model row " + std::to_string(row) + " has a bad count");
    }
    counts.push_back(JointEntry{intern(*sv, f[0]), intern(*tv, f[1]), c, 0.0});
  }
  return TranslationModel::from_counts(std::move(sv), std::move(tv), std::move(counts), source_side);
}

void write_links(std::span<const LinkRecord> links, const Vocabulary& source_vocab,
                 const Vocabulary& target_vocab, std::ostream& out) {
  out << "segment\tposition\ts\tt\tweight\n";
  for (const auto& r : links)
    out << r.segment << '\t' << r.source_position << '\t' << source_vocab.surface(r.source_token)
        << '\t' << target_vocab.surface(r.target_token) << '\t' << format_double(r.weight, 12)
        << '\n';
}

}  // namespace ncc
