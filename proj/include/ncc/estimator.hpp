#ifndef NCC_ESTIMATOR_HPP_
#define NCC_ESTIMATOR_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/linker.hpp"
#include "ncc/objectives.hpp"

namespace ncc {

// Everything in this module reads the source side of the bitext it is given;
// orient the bitext so the side under study is the source.

inline constexpr int kMaxGap = 2;

// An ordered pair of words, x before y, identified by surface so it stays
// meaningful across re-fused texts. gap = number of function words between.
struct BigramKey {
  std::string x;
  std::string y;
  int gap = 0;

  auto operator<=>(const BigramKey&) const = default;
};

struct CandidateCount {
  TokenId x = 0;
  TokenId y = 0;
  int gap = 0;
  std::size_t frequency = 0;
  // y is a fused token that already holds a retained gap.
  bool nested_gap = false;
};

struct CandidateOptions {
  std::size_t phi = 2;
  int max_gap = kMaxGap;
};

// True for tokens that may open or close a candidate pair.
bool is_content(TokenId id, const Vocabulary& vocab, const FunctionWordSet& fw);

// If x = seq[pos] is followed by exactly `gap` function words and then a
// candidate partner, returns the partner's position; otherwise npos. Gapped
// patterns need content words at both ends; adjacent ones only exclude
// punctuation and pairs of two function words. Tokens that hold a retained
// gap never open a pattern (their right neighbour is their own filler).
std::size_t partner_position(std::span<const TokenId> seq, std::size_t pos, int gap,
                             const Vocabulary& vocab, const FunctionWordSet& fw);

// Every (x, gap, y) pattern with frequency >= phi whose surfaces are not on
// the stop list, ordered by (x, y, gap) id.
std::vector<CandidateCount> generate_candidates(const Bitext& text, const FunctionWordSet& fw,
                                                const std::set<BigramKey>& stop_list,
                                                const CandidateOptions& options);

using Distribution = std::vector<std::pair<TokenId, double>>;  // sorted by target id
double mass(const Distribution& d);

// Link mass of x split by whether its right context is y (under the
// candidate's gap pattern), and of y by whether its left context is x. For
// x == y, x tokens are classed "followed by x" first, then "preceded by x",
// and y_without stays empty.
struct ContextStats {
  Distribution x_with, x_without;
  Distribution y_with, y_without;
  std::size_t cooccurrence_count = 0;
  bool same_word = false;
};

std::vector<ContextStats> context_stats(const TranslationModel& model,
                                        std::span<const LinkRecord> links, const Bitext& text,
                                        const FunctionWordSet& fw,
                                        std::span<const CandidateCount> candidates);
// Single-candidate form; throws DomainError for ids outside the vocabulary.
ContextStats context_stats(const TranslationModel& model, std::span<const LinkRecord> links,
                           const Bitext& text, const FunctionWordSet& fw,
                           const CandidateCount& candidate);

struct DeltaEstimate {
  double delta_hat = 0.0;
  double delta_right = 0.0;  // terms that depend on x's distributions
  double delta_left = 0.0;   // terms that depend on y's distributions
};

// Predictive value of a partial distribution of one source word, using the
// model's target marginals: Σ d(t) ln[d(t) / (mass(d) Pr(t))].
double partial_i(const TranslationModel& model, const Distribution& d);
// Same, keeping only the distribution's own most likely target.
double partial_v(const TranslationModel& model, const Distribution& d);

DeltaEstimate estimate_delta_i(const TranslationModel& model, const PredictiveValueTable& pv_i,
                               const ContextStats& stats, const CandidateCount& candidate);
DeltaEstimate estimate_delta_v(const TranslationModel& model, const PredictiveValueTable& pv_v,
                               const ContextStats& stats, const CandidateCount& candidate);
DeltaEstimate estimate_delta(ObjectiveKind kind, const TranslationModel& model,
                             const PredictiveValueTable& pv, const ContextStats& stats,
                             const CandidateCount& candidate);

struct NccCandidate {
  TokenId x = 0;
  TokenId y = 0;
  int gap = 0;
  std::size_t frequency = 0;
  double delta_hat = 0.0;
  double delta_right = 0.0;
  double delta_left = 0.0;
  bool nested_gap = false;
};

// Δ̂ descending, then frequency descending, then (x, y) surface, then gap.
void rank_candidates(std::vector<NccCandidate>& candidates, const Vocabulary& vocab);
// Keeps a candidate iff neither of its words occurs in a candidate kept
// earlier in the (already ranked) list.
std::vector<NccCandidate> mutual_exclusion_filter(std::span<const NccCandidate> ranked);

// Distinct filler sequences seen between x and y, with counts.
std::map<std::vector<TokenId>, std::size_t> filler_counts(const Bitext& text,
                                                          const FunctionWordSet& fw, TokenId x,
                                                          TokenId y, int gap);

// "x\ty\tgap\tfrequency\tdelta_hat\tdelta_right\tdelta_left"; the gap cell
// gets a "g" suffix for nested-gap candidates.
void write_candidates(std::span<const NccCandidate> candidates, const Vocabulary& vocab,
                      std::ostream& out);

std::string format_nats(double v);

}  // namespace ncc

#endif  // NCC_ESTIMATOR_HPP_
