#include "ncc/synthgen.hpp"

#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include "ncc/errors.hpp"

namespace ncc {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  // Uniform in [0, n).
  std::size_t below(std::size_t n) {
    const std::uint64_t span = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t v;
    do v = rng_();
    while (v >= limit);
    return static_cast<std::size_t>(v % span);
  }

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return p > 0.0 && unit() < p; }

 private:
  std::mt19937_64 rng_;
};

std::string name(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

std::optional<std::size_t> index_of(const std::string& s, const char* prefix, std::size_t n) {
  const std::string p(prefix);
  if (s.size() <= p.size() || s.compare(0, p.size(), p) != 0) return std::nullopt;
  std::size_t v = 0;
  for (std::size_t k = p.size(); k < s.size(); ++k) {
    if (s[k] < '0' || s[k] > '9') return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(s[k] - '0');
  }
  if (v >= n || name(prefix, v) != s) return std::nullopt;
  return v;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

void validate(const GeneratorSpec& spec) {
  if (spec.source_vocab == 0 || spec.target_vocab == 0)
    throw SpecError("vocabularies must be non-empty");
  if (spec.min_length == 0 || spec.min_length > spec.max_length)
    throw SpecError("segment lengths need 1 <= min_length <= max_length");
  if (spec.lexicon == LexiconKind::bijective && spec.source_vocab != spec.target_vocab)
    throw SpecError("a bijective lexicon needs equal vocabulary sizes");
  if (spec.lexicon == LexiconKind::many_to_one) {
    if (spec.many_to_one_ratio == 0) throw SpecError("many-to-one ratio must be positive");
    if ((spec.source_vocab + spec.many_to_one_ratio - 1) / spec.many_to_one_ratio > spec.target_vocab)
      throw SpecError("target vocabulary too small for the many-to-one lexicon");
  }
  for (double p : {spec.planted_rate, spec.function_rate, spec.noise_rate})
    if (!(p >= 0.0 && p <= 1.0)) throw SpecError("rates must lie in [0, 1]");
  if (spec.planted_gapped > spec.planted_count)
    throw SpecError("more gapped compounds than planted ones");
  if (spec.planted_gapped > 0 && spec.function_words == 0)
    throw SpecError("gapped compounds need at least one function word");
  if (2 * (spec.planted_count + spec.planted.size()) > spec.source_vocab)
    throw SpecError("not enough source words for the planted compounds");
}

}  // namespace

Bitext GeneratedCorpus::bitext() const { return bitext_from_lines(source_lines, target_lines); }

std::string planted_surface(const PlantedNcc& p) {
  return p.filler ? p.x + "_" + *p.filler + "_" + p.y : p.x + "_" + p.y;
}

GeneratedCorpus generate(const GeneratorSpec& spec) {
  validate(spec);
  Draw draw(spec.seed);
  GeneratedCorpus out;

  std::set<std::string> used;
  for (const auto& p : spec.planted) {
    if (!index_of(p.x, "s", spec.source_vocab) || !index_of(p.y, "s", spec.source_vocab))
      throw SpecError("planted compound " + p.x + " " + p.y + " uses a word outside the content vocabulary");
    if (p.x == p.y || !used.insert(p.x).second || !used.insert(p.y).second)
      throw SpecError("planted compound " + p.x + " " + p.y + " shares a word with another");
    if (p.filler && !index_of(*p.filler, "fs", spec.function_words))
      throw SpecError("planted filler " + *p.filler + " is not a function word");
    if (p.target.empty()) throw SpecError("planted compound " + p.x + " " + p.y + " has no target");
  }
  out.ground_truth = spec.planted;

  // Random planted pairs: a partial shuffle of the unused content words.
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < spec.source_vocab; ++i)
    if (!used.contains(name("s", i))) pool.push_back(i);
  for (std::size_t k = 0; k < 2 * spec.planted_count; ++k)
    std::swap(pool[k], pool[k + draw.below(pool.size() - k)]);
  for (std::size_t k = 0; k < spec.planted_count; ++k) {
    PlantedNcc p{name("s", pool[2 * k]), name("s", pool[2 * k + 1]), name("p", k), std::nullopt};
    if (k < spec.planted_gapped) p.filler = "fs0";
    out.ground_truth.push_back(std::move(p));
  }

  auto translate = [&](std::size_t i) {
    return name("t", spec.lexicon == LexiconKind::bijective ? i : i / spec.many_to_one_ratio);
  };
  auto function_translation = [](const std::string& fs) { return "ft" + fs.substr(2); };

  for (std::size_t seg = 0; seg < spec.segment_count; ++seg) {
    const std::size_t len = spec.min_length + draw.below(spec.max_length - spec.min_length + 1);
    std::vector<std::string> src, tgt;
    for (std::size_t slot = 0; slot < len; ++slot) {
      if (!out.ground_truth.empty() && draw.chance(spec.planted_rate)) {
        const PlantedNcc& p = out.ground_truth[draw.below(out.ground_truth.size())];
        src.push_back(p.x);
        if (p.filler) src.push_back(*p.filler);
        src.push_back(p.y);
        tgt.push_back(p.target);
        if (p.filler) tgt.push_back(function_translation(*p.filler));
      } else {
        const std::size_t w = draw.below(spec.source_vocab);
        src.push_back(name("s", w));
        tgt.push_back(translate(w));
      }
      if (spec.function_words > 0 && draw.chance(spec.function_rate)) {
        const std::string f = name("fs", draw.below(spec.function_words));
        src.push_back(f);
        tgt.push_back(function_translation(f));
      }
    }
    for (auto& t : tgt)
      if (draw.chance(spec.noise_rate)) t = name("t", draw.below(spec.target_vocab));
    out.source_lines.push_back(join(src));
    out.target_lines.push_back(join(tgt));
  }

  for (std::size_t i = 0; i < spec.function_words; ++i) {
    out.source_function_words.push_back(name("fs", i));
    out.target_function_words.push_back(name("ft", i));
  }
  return out;
}

void write_ground_truth(const std::vector<PlantedNcc>& truth, std::ostream& out) {
  out << "x\ty\tfiller\ttarget\n";
  for (const auto& p : truth)
    out << p.x << '\t' << p.y << '\t' << p.filler.value_or("") << '\t' << p.target << '\n';
}

void write_corpus(const GeneratedCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* file, const std::vector<std::string>& lines) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / file).string());
    for (const auto& l : lines) out << l << '\n';
  };
  put("source.txt", corpus.source_lines);
  put("target.txt", corpus.target_lines);
  put("function_words.E.txt", corpus.source_function_words);
  put("function_words.F.txt", corpus.target_function_words);
  std::ofstream gt(dir / "ground_truth.tsv", std::ios::binary);
  if (!gt) throw Error("cannot write ground truth");
  write_ground_truth(corpus.ground_truth, gt);
}

}  // namespace ncc
