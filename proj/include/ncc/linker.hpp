#ifndef NCC_LINKER_HPP_
#define NCC_LINKER_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/vocabulary.hpp"

namespace ncc {

// One hypothesized link between a source token and a target word. Links
// split by an exact tie carry a fractional weight.
struct LinkRecord {
  std::uint32_t segment = 0;
  std::uint32_t source_position = 0;
  TokenId source_token = 0;
  TokenId target_token = 0;
  double weight = 1.0;
};

struct JointEntry {
  TokenId source = 0;
  TokenId target = 0;
  double count = 0.0;
  double probability = 0.0;
};

// Joint distribution Pr(s,t) over linked word pairs, with both marginals.
// Only pairs with positive mass are stored.
class TranslationModel {
 public:
  TranslationModel() = default;

  // Duplicated (s,t) counts are summed; non-positive counts are dropped.
  static TranslationModel from_counts(std::shared_ptr<const Vocabulary> source_vocab,
                                      std::shared_ptr<const Vocabulary> target_vocab,
                                      std::vector<JointEntry> counts,
                                      Side source_side = Side::source);

  double joint(TokenId s, TokenId t) const;
  double marginal_source(TokenId s) const {
    return s < marginal_source_.size() ? marginal_source_[s] : 0.0;
  }
  double marginal_target(TokenId t) const {
    return t < marginal_target_.size() ? marginal_target_[t] : 0.0;
  }
  // All entries for one source word, ordered by target id.
  std::span<const JointEntry> row(TokenId s) const;
  std::span<const JointEntry> entries() const { return entries_; }
  // Source ids with positive mass, ascending.
  const std::vector<TokenId>& source_support() const { return support_; }
  double total_links() const { return total_links_; }

  const Vocabulary& source_vocab() const { return *source_vocab_; }
  const Vocabulary& target_vocab() const { return *target_vocab_; }
  const std::shared_ptr<const Vocabulary>& source_vocab_ptr() const { return source_vocab_; }
  const std::shared_ptr<const Vocabulary>& target_vocab_ptr() const { return target_vocab_; }
  // Which half of the bitext plays the source role.
  Side source_side() const { return source_side_; }

  TranslationModel transposed() const;

 private:
  std::shared_ptr<const Vocabulary> source_vocab_ = std::make_shared<Vocabulary>();
  std::shared_ptr<const Vocabulary> target_vocab_ = std::make_shared<Vocabulary>();
  std::vector<JointEntry> entries_;
  std::vector<std::size_t> row_begin_;
  std::vector<double> marginal_source_;
  std::vector<double> marginal_target_;
  std::vector<TokenId> support_;
  double total_links_ = 0.0;
  Side source_side_ = Side::source;
};

// Pr(t|s) = Pr(s,t) / Pr(s). Throws DomainError for an unseen s.
double conditional(const TranslationModel& model, TokenId t, TokenId s);

struct InductionOptions {
  int rounds = 3;
  unsigned workers = 1;
  // Branch states explored per segment when averaging over exact ties.
  std::size_t tie_state_budget = 4096;
};

struct InducedModel {
  TranslationModel model;
  std::vector<LinkRecord> links;  // final round, ordered by (segment, position, target)
};

// Competitive linking alternated with re-estimation. Round 1 ranks pairs by
// the Dice ratio of segment co-occurrence counts, later rounds by the joint
// probability of the previous round; equal scores fall back to the raw
// co-occurrence count. Pairs still tied after that share the link: the
// result is the expectation over uniformly random tie-breaking.
InducedModel induce_model(const Bitext& bitext, const InductionOptions& options = {});

// "s\tt\tcount\tprobability" with a header row, sorted by (s,t) surface.
void write_model(const TranslationModel& model, std::ostream& out);
// Reads write_model output. Probabilities are recomputed from the counts.
TranslationModel read_model(std::istream& in, Side source_side = Side::source);
// "segment\tposition\ts\tt\tweight" with a header row.
void write_links(std::span<const LinkRecord> links, const Vocabulary& source_vocab,
                 const Vocabulary& target_vocab, std::ostream& out);

}  // namespace ncc

#endif  // NCC_LINKER_HPP_
