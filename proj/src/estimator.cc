#include "ncc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "ncc/errors.hpp"

namespace ncc {

namespace {

struct PatternKey {
  TokenId x, y;
  int gap;
  bool operator==(const PatternKey&) const = default;
};

struct PatternHash {
  std::size_t operator()(const PatternKey& k) const {
    std::uint64_t h = (static_cast<std::uint64_t>(k.x) << 32) ^ k.y;
    h ^= static_cast<std::uint64_t>(k.gap) * 0x9e3779b97f4a7c15ULL;
    return std::hash<std::uint64_t>{}(h);
  }
};

constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Mirror of partner_position, looking left from y.
std::size_t opener_position(std::span<const TokenId> seq, std::size_t pos, int gap,
                            const Vocabulary& vocab, const FunctionWordSet& fw) {
  const auto g = static_cast<std::size_t>(gap);
  if (pos < g + 1) return npos;
  const std::size_t start = pos - g - 1;
  return partner_position(seq, start, gap, vocab, fw) == pos ? start : npos;
}

Distribution to_distribution(const std::map<TokenId, double>& m, double scale) {
  Distribution d;
  d.reserve(m.size());
  for (const auto& [t, w] : m)
    if (w > 0.0) d.emplace_back(t, w / scale);
  return d;
}

// full(t) - parts(t), with rounding residue below 1e-12 relative dropped.
Distribution remainder(std::span<const JointEntry> full, const Distribution& a,
                       const Distribution& b) {
  std::map<TokenId, double> sub;
  for (const auto& [t, w] : a) sub[t] += w;
  for (const auto& [t, w] : b) sub[t] += w;
  Distribution d;
  for (const auto& e : full) {
    double rest = e.probability;
    if (auto it = sub.find(e.target); it != sub.end()) rest -= it->second;
    if (rest > 1e-12 * e.probability) d.emplace_back(e.target, rest);
  }
  return d;
}

}  // namespace

bool is_content(TokenId id, const Vocabulary& vocab, const FunctionWordSet& fw) {
  return !fw.contains(id) && !is_punctuation(vocab.surface(id));
}

std::size_t partner_position(std::span<const TokenId> seq, std::size_t pos, int gap,
                             const Vocabulary& vocab, const FunctionWordSet& fw) {
  const auto g = static_cast<std::size_t>(gap);
  if (gap < 0 || pos + g + 1 >= seq.size()) return npos;
  const TokenId x = seq[pos];
  const TokenId y = seq[pos + g + 1];
  if (vocab.token(x).gap_index) return npos;
  if (is_punctuation(vocab.surface(x)) || is_punctuation(vocab.surface(y))) return npos;
  if (gap == 0) {
    if (fw.contains(x) && fw.contains(y)) return npos;
    return pos + 1;
  }
  if (fw.contains(x) || fw.contains(y)) return npos;
  for (std::size_t k = pos + 1; k <= pos + g; ++k)
    if (!fw.contains(seq[k]) || is_punctuation(vocab.surface(seq[k]))) return npos;
  return pos + g + 1;
}

std::vector<CandidateCount> generate_candidates(const Bitext& text, const FunctionWordSet& fw,
                                                const std::set<BigramKey>& stop_list,
                                                const CandidateOptions& options) {
  const Vocabulary& vocab = text.vocab(Side::source);
  std::unordered_map<PatternKey, std::size_t, PatternHash> freq;
  const int max_gap = std::clamp(options.max_gap, 0, kMaxGap);
  for (const auto& p : text.pairs()) {
    std::span<const TokenId> seq(p.source);
    for (std::size_t pos = 0; pos < seq.size(); ++pos)
      for (int g = 0; g <= max_gap; ++g) {
        std::size_t q = partner_position(seq, pos, g, vocab, fw);
        if (q != npos) ++freq[PatternKey{seq[pos], seq[q], g}];
      }
  }
  std::vector<CandidateCount> out;
  for (const auto& [k, n] : freq) {
    if (n < std::max<std::size_t>(1, options.phi)) continue;
    if (stop_list.contains(BigramKey{vocab.surface(k.x), vocab.surface(k.y), k.gap})) continue;
    out.push_back(CandidateCount{k.x, k.y, k.gap, n,
                                 k.gap > 0 && vocab.token(k.y).gap_index.has_value()});
  }
  std::sort(out.begin(), out.end(), [](const CandidateCount& a, const CandidateCount& b) {
    return std::tie(a.x, a.y, a.gap) < std::tie(b.x, b.y, b.gap);
  });
  return out;
}

double mass(const Distribution& d) {
  double m = 0.0;
  for (const auto& [t, w] : d) m += w;
  return m;
}

std::vector<ContextStats> context_stats(const TranslationModel& model,
                                        std::span<const LinkRecord> links, const Bitext& text,
                                        const FunctionWordSet& fw,
                                        std::span<const CandidateCount> candidates) {
  const Vocabulary& vocab = text.vocab(Side::source);
  std::unordered_map<PatternKey, std::size_t, PatternHash> index;
  for (std::size_t c = 0; c < candidates.size(); ++c)
    index.emplace(PatternKey{candidates[c].x, candidates[c].y, candidates[c].gap}, c);

  std::vector<std::map<TokenId, double>> xw(candidates.size()), yw(candidates.size());
  const auto& pairs = text.pairs();
  for (const auto& r : links) {
    std::span<const TokenId> seq(pairs.at(r.segment).source);
    const std::size_t pos = r.source_position;
    for (int g = 0; g <= kMaxGap; ++g) {
      // r's token in the x role.
      if (std::size_t q = partner_position(seq, pos, g, vocab, fw); q != npos) {
        if (auto it = index.find(PatternKey{seq[pos], seq[q], g}); it != index.end())
          xw[it->second][r.target_token] += r.weight;
      }
      // r's token in the y role.
      if (std::size_t q = opener_position(seq, pos, g, vocab, fw); q != npos) {
        if (auto it = index.find(PatternKey{seq[q], seq[pos], g}); it != index.end()) {
          const bool same = seq[q] == seq[pos];
          // A same-word token already counted as "followed by x" stays there.
          if (!same || partner_position(seq, pos, g, vocab, fw) == npos ||
              seq[partner_position(seq, pos, g, vocab, fw)] != seq[pos])
            yw[it->second][r.target_token] += r.weight;
        }
      }
    }
  }

  const double total = model.total_links();
  std::vector<ContextStats> out(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& cand = candidates[c];
    ContextStats& st = out[c];
    st.same_word = cand.x == cand.y;
    st.cooccurrence_count = cand.frequency;
    st.x_with = to_distribution(xw[c], total);
    st.y_with = to_distribution(yw[c], total);
    if (st.same_word) {
      st.x_without = remainder(model.row(cand.x), st.x_with, st.y_with);
    } else {
      st.x_without = remainder(model.row(cand.x), st.x_with, {});
      st.y_without = remainder(model.row(cand.y), st.y_with, {});
    }
  }
  return out;
}

ContextStats context_stats(const TranslationModel& model, std::span<const LinkRecord> links,
                           const Bitext& text, const FunctionWordSet& fw,
                           const CandidateCount& candidate) {
  const std::size_t n = text.vocab(Side::source).size();
  if (candidate.x >= n || candidate.y >= n)
    throw DomainError("candidate word is not in the vocabulary");
  return context_stats(model, links, text, fw, std::span<const CandidateCount>(&candidate, 1))
      .front();
}

double partial_i(const TranslationModel& model, const Distribution& d) {
  const double m = mass(d);
  double v = 0.0;
  for (const auto& [t, w] : d) v += info_term(w, m, model.marginal_target(t));
  return v;
}

double partial_v(const TranslationModel& model, const Distribution& d) {
  if (d.empty()) return 0.0;
  const Vocabulary& tv = model.target_vocab();
  const auto* best = &d.front();
  for (const auto& e : d) {
    if (e.second != best->second) {
      if (e.second > best->second) best = &e;
      continue;
    }
    const double me = model.marginal_target(e.first), mb = model.marginal_target(best->first);
    if (me != mb) {
      if (me > mb) best = &e;
      continue;
    }
    if (tv.surface(e.first) < tv.surface(best->first)) best = &e;
  }
  return info_term(best->second, mass(d), model.marginal_target(best->first));
}

DeltaEstimate estimate_delta_i(const TranslationModel& model, const PredictiveValueTable& pv_i,
                               const ContextStats& stats, const CandidateCount& candidate) {
  DeltaEstimate d;
  d.delta_right = -pv_i(candidate.x) + partial_i(model, stats.x_without) +
                  partial_i(model, stats.x_with);
  d.delta_left = partial_i(model, stats.y_with);
  if (!stats.same_word) d.delta_left += -pv_i(candidate.y) + partial_i(model, stats.y_without);
  d.delta_hat = d.delta_right + d.delta_left;
  return d;
}

DeltaEstimate estimate_delta_v(const TranslationModel& model, const PredictiveValueTable& pv_v,
                               const ContextStats& stats, const CandidateCount& candidate) {
  DeltaEstimate d;
  const double x_joined = partial_v(model, stats.x_with);
  const double y_joined = partial_v(model, stats.y_with);
  const bool x_wins = x_joined >= y_joined;
  d.delta_right = partial_v(model, stats.x_without) - pv_v(candidate.x) + (x_wins ? x_joined : 0.0);
  d.delta_left = x_wins ? 0.0 : y_joined;
  if (!stats.same_word) d.delta_left += partial_v(model, stats.y_without) - pv_v(candidate.y);
  d.delta_hat = d.delta_right + d.delta_left;
  return d;
}

DeltaEstimate estimate_delta(ObjectiveKind kind, const TranslationModel& model,
                             const PredictiveValueTable& pv, const ContextStats& stats,
                             const CandidateCount& candidate) {
  return kind == ObjectiveKind::I ? estimate_delta_i(model, pv, stats, candidate)
                                  : estimate_delta_v(model, pv, stats, candidate);
}

void rank_candidates(std::vector<NccCandidate>& candidates, const Vocabulary& vocab) {
  std::sort(candidates.begin(), candidates.end(), [&](const NccCandidate& a, const NccCandidate& b) {
    if (a.delta_hat != b.delta_hat) return a.delta_hat > b.delta_hat;
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    const auto& ax = vocab.surface(a.x);
    const auto& bx = vocab.surface(b.x);
    if (ax != bx) return ax < bx;
    const auto& ay = vocab.surface(a.y);
    const auto& by = vocab.surface(b.y);
    if (ay != by) return ay < by;
    return a.gap < b.gap;
  });
}

std::vector<NccCandidate> mutual_exclusion_filter(std::span<const NccCandidate> ranked) {
  std::set<TokenId> used;
  std::vector<NccCandidate> kept;
  for (const auto& c : ranked) {
    if (used.contains(c.x) || used.contains(c.y)) continue;
    kept.push_back(c);
    used.insert(c.x);
    used.insert(c.y);
  }
  return kept;
}

std::map<std::vector<TokenId>, std::size_t> filler_counts(const Bitext& text,
                                                          const FunctionWordSet& fw, TokenId x,
                                                          TokenId y, int gap) {
  const Vocabulary& vocab = text.vocab(Side::source);
  std::map<std::vector<TokenId>, std::size_t> out;
  for (const auto& p : text.pairs()) {
    std::span<const TokenId> seq(p.source);
    for (std::size_t pos = 0; pos < seq.size(); ++pos) {
      if (seq[pos] != x) continue;
      const std::size_t q = partner_position(seq, pos, gap, vocab, fw);
      if (q == npos || seq[q] != y) continue;
      ++out[std::vector<TokenId>(seq.begin() + static_cast<std::ptrdiff_t>(pos) + 1,
                                 seq.begin() + static_cast<std::ptrdiff_t>(q))];
    }
  }
  return out;
}

std::string format_nats(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_candidates(std::span<const NccCandidate> candidates, const Vocabulary& vocab,
                      std::ostream& out) {
  out << "x\ty\tgap\tfrequency\tdelta_hat\tdelta_right\tdelta_left\n";
  for (const auto& c : candidates)
    out << vocab.surface(c.x) << '\t' << vocab.surface(c.y) << '\t' << c.gap
        << (c.nested_gap ? "g" : "") << '\t' << c.frequency << '\t' << format_nats(c.delta_hat)
        << '\t' << format_nats(c.delta_right) << '\t' << format_nats(c.delta_left) << '\n';
}

}  // namespace ncc
