#ifndef NCC_CORPUS_HPP_
#define NCC_CORPUS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ncc/vocabulary.hpp"

namespace ncc {

enum class Mode { word, character };

// The two halves of a bitext. The first half is also called E, the second F.
enum class Side { source, target };

inline Side other(Side s) { return s == Side::source ? Side::target : Side::source; }
// "E" / "F", as written in every report.
std::string_view side_name(Side s);
Side parse_side(std::string_view name);

struct SegmentPair {
  std::size_t index = 0;
  std::vector<TokenId> source;
  std::vector<TokenId> target;

  const std::vector<TokenId>& side(Side s) const { return s == Side::source ? source : target; }
};

struct IngestReport {
  std::size_t lines_read = 0;
  std::size_t dropped_empty = 0;
};

struct TokenizeOptions {
  bool detach_punctuation = true;
  bool lowercase = false;
};

// Ordered aligned segment pairs over two vocabularies. Immutable once built;
// derived bitexts (fusion, side swap) share whatever they do not change.
class Bitext {
 public:
  Bitext() = default;
  Bitext(Mode mode, std::shared_ptr<const Vocabulary> source_vocab,
         std::shared_ptr<const Vocabulary> target_vocab, std::vector<SegmentPair> pairs,
         IngestReport report = {});

  Mode mode() const { return mode_; }
  const std::vector<SegmentPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const Vocabulary& vocab(Side s) const { return *(s == Side::source ? source_vocab_ : target_vocab_); }
  const std::shared_ptr<const Vocabulary>& vocab_ptr(Side s) const {
    return s == Side::source ? source_vocab_ : target_vocab_;
  }
  const IngestReport& report() const { return report_; }

  // Source and target exchanged.
  Bitext swapped() const;
  // Pairs [first, last) re-indexed from zero; vocabularies are shared.
  Bitext slice(std::size_t first, std::size_t last) const;
  // Number of distinct token types that occur on one side.
  std::size_t types_in_use(Side s) const;

 private:
  Mode mode_ = Mode::word;
  std::shared_ptr<const Vocabulary> source_vocab_ = std::make_shared<Vocabulary>();
  std::shared_ptr<const Vocabulary> target_vocab_ = std::make_shared<Vocabulary>();
  std::vector<SegmentPair> pairs_;
  IngestReport report_;
};

// Whitespace split; leading and trailing ASCII punctuation become tokens of
// their own. '_' is never treated as punctuation (it is the fusion joiner).
std::vector<std::string> tokenize(std::string_view line, const TokenizeOptions& opts = {});
// UTF-8 code points, one string each.
std::vector<std::string> split_code_points(std::string_view text);
bool is_punctuation(std::string_view surface);

Bitext bitext_from_lines(std::span<const std::string> source_lines,
                         std::span<const std::string> target_lines,
                         const TokenizeOptions& opts = {});
// Rows are "spelling<TAB>phoneme phoneme ..."; a row without a tab splits at
// the first run of whitespace instead.
Bitext parse_dictionary(std::istream& in);

Bitext load_word_bitext(const std::filesystem::path& source_path,
                        const std::filesystem::path& target_path,
                        const TokenizeOptions& opts = {});
Bitext load_dictionary(const std::filesystem::path& path);
// Character mode reads source_path only.
Bitext load_bitext(const std::filesystem::path& source_path,
                   const std::filesystem::path& target_path, Mode mode,
                   const TokenizeOptions& opts = {});

// One line per segment, tokens joined by a single space.
void write_side(const Bitext& bitext, Side side, std::ostream& out);
// Character mode: letters concatenated, a tab, phonemes joined by spaces.
void write_dictionary(const Bitext& bitext, std::ostream& out);
std::vector<std::string> side_lines(const Bitext& bitext, Side side);

struct FunctionWordSet {
  Side side = Side::source;
  std::unordered_set<TokenId> members;
  // Requested entries that are not in the vocabulary (skipped).
  std::vector<std::string> warnings;

  bool contains(TokenId id) const { return members.contains(id); }
  std::unordered_set<std::string> surfaces(const Vocabulary& vocab) const;
};

// The k most frequent types on a side, ties broken by surface.
FunctionWordSet function_words_top_k(const Bitext& bitext, Side side, std::size_t k);
FunctionWordSet function_words_from_list(const Bitext& bitext, Side side,
                                         std::span<const std::string> surfaces);
// One surface per line; blank lines ignored.
FunctionWordSet function_words_from_file(const Bitext& bitext, Side side,
                                         const std::filesystem::path& path);

struct FuseOptions {
  // Largest number of filler tokens a retained gap may span.
  int max_gap = 2;
  // When set, gap fillers must be drawn from filler_words.
  bool restrict_fillers = false;
  std::unordered_set<std::string> filler_words;
};

struct FuseStats {
  std::vector<std::size_t> occurrences;  // per compound, in input order
  std::size_t fusions = 0;
  std::size_t tokens_consumed = 0;    // tokens merged into fused tokens
  std::size_t components_fused = 0;  // sum of component counts over fusions
};

// Throws FusionError for compounds with fewer than two components, empty
// or reserved pieces, or two entries that define the same component list.
void validate_compounds(std::span<const Compound> compounds);

// Single left-to-right pass; at each position the compound with the most
// components wins (ties: contiguous before gapped, then surface order). A
// compound matches whole tokens whose flattened pieces spell it out, so it
// applies to plain and to partially fused text alike. Gapped matches leave
// their fillers in place right after the fused token.
class Fuser {
 public:
  Fuser(std::span<const Compound> compounds, FuseOptions options = {});

  std::vector<TokenId> apply(std::span<const TokenId> tokens, Vocabulary& vocab,
                             FuseStats* stats = nullptr) const;
  bool empty() const { return order_.empty(); }

 private:
  struct Match {
    std::size_t end = 0;  // one past the last consumed token
    std::size_t filler_begin = 0, filler_end = 0;
  };
  bool match_at(const Compound& c, std::span<const TokenId> tokens, std::size_t pos,
                const Vocabulary& vocab, Match& m) const;

  std::vector<Compound> compounds_;
  std::vector<std::size_t> order_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_;
  FuseOptions options_;
};

Bitext fuse_side(const Bitext& bitext, Side side, std::span<const Compound> compounds,
                 const FuseOptions& options = {}, FuseStats* stats = nullptr);

}  // namespace ncc

#endif  // NCC_CORPUS_HPP_
