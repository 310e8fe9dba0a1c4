#ifndef NCC_SYNTHGEN_HPP_
#define NCC_SYNTHGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncc/corpus.hpp"

namespace ncc {

// A source bigram that always translates to one target word. With a filler
// the source side reads "x filler y" and the filler translates as usual.
struct PlantedNcc {
  std::string x;
  std::string y;
  std::string target;
  std::optional<std::string> filler;
};

enum class LexiconKind { bijective, many_to_one };

// Source content words are s0..s{n-1}, target content words t0..t{m-1},
// function words fs0.. / ft0.., planted targets p0... Generation, in order
// per segment: draw a length in [min_length, max_length]; fill each slot with
// a planted compound (probability planted_rate) or a content word; insert a
// function word after a slot with probability function_rate; translate word
// for word in source order; replace each target token by a random content
// word with probability noise_rate. Every draw comes from one mt19937_64
// stream seeded with `seed` (integers by rejection sampling, reals from the
// top 53 bits).
struct GeneratorSpec {
  std::size_t source_vocab = 300;
  std::size_t target_vocab = 300;
  std::size_t segment_count = 1000;
  std::size_t min_length = 4;
  std::size_t max_length = 10;
  LexiconKind lexicon = LexiconKind::bijective;
  std::size_t many_to_one_ratio = 2;
  // Planted compounds drawn at random, as disjoint adjacent pairs of source
  // content words; the first planted_gapped of them carry the filler fs0.
  std::size_t planted_count = 0;
  std::size_t planted_gapped = 0;
  // Additional planted compounds given explicitly.
  std::vector<PlantedNcc> planted;
  double planted_rate = 0.1;
  std::size_t function_words = 0;
  double function_rate = 0.0;
  double noise_rate = 0.0;
  std::uint64_t seed = 1;
};

struct GeneratedCorpus {
  std::vector<std::string> source_lines;
  std::vector<std::string> target_lines;
  std::vector<PlantedNcc> ground_truth;
  std::vector<std::string> source_function_words;
  std::vector<std::string> target_function_words;

  Bitext bitext() const;
};

// Throws SpecError for an invalid spec, including planted compounds that
// share a word or use a word outside the source content vocabulary.
GeneratedCorpus generate(const GeneratorSpec& spec);

// Surface the discovery run would report for a planted compound:
// "x_y", or "x_filler_y" when filled.
std::string planted_surface(const PlantedNcc& p);

// "x\ty\tfiller\ttarget" with a header row; empty filler cell when adjacent.
void write_ground_truth(const std::vector<PlantedNcc>& truth, std::ostream& out);
// Writes source.txt, target.txt, ground_truth.tsv, function_words.E.txt and
// function_words.F.txt into dir.
void write_corpus(const GeneratedCorpus& corpus, const std::filesystem::path& dir);

}  // namespace ncc

#endif  // NCC_SYNTHGEN_HPP_
