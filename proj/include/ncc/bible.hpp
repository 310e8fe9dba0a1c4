#ifndef NCC_BIBLE_HPP_
#define NCC_BIBLE_HPP_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ncc/discovery.hpp"
#include "ncc/linker.hpp"

namespace ncc {

// Bag-of-words translation scores: a words proposed, b reference words,
// c proposed words matched (each reference word matches at most once).
struct BibleScore {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;

  static BibleScore from_counts(std::size_t a, std::size_t b, std::size_t c);
};

enum class Direction { e_to_f, f_to_e };

std::string_view direction_name(Direction d);  // "E->F" / "F->E"
Direction parse_direction(std::string_view name);
inline Side source_of(Direction d) { return d == Direction::e_to_f ? Side::source : Side::target; }

// Translates the source half of `test` (E for E->F) with m(s) of `model`,
// after fusing the NCCs of that side. The model must be oriented the same
// way (source_side() == source_of(direction)), else DomainError. Unknown
// words are copied through; unknown fused tokens are broken up and their
// components translated one by one.
BibleScore evaluate(const TranslationModel& model, const Bitext& test,
                    std::span<const NccEntry> nccs, Direction direction,
                    const ReplayOptions& replay = {}, unsigned workers = 1);

// The bag of words proposed for one source segment.
std::vector<std::string> translate_segment(const TranslationModel& model,
                                           std::span<const std::string> source_tokens);

struct ScoreRow {
  int iteration = 0;
  Direction direction = Direction::e_to_f;
  BibleScore score;
};

// "iteration\tdirection\ta\tb\tc\tprecision\trecall\tf" with a header row.
void write_scores(std::span<const ScoreRow> rows, std::ostream& out);

}  // namespace ncc

#endif  // NCC_BIBLE_HPP_
