#ifndef NCC_DISCOVERY_HPP_
#define NCC_DISCOVERY_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/estimator.hpp"
#include "ncc/linker.hpp"
#include "ncc/objectives.hpp"

namespace ncc {

enum class GapKind { none, retained, filled };

struct NccEntry {
  Compound compound;  // what gets fused; a filled gap is spelled out in it
  Side side = Side::source;
  GapKind gap = GapKind::none;
  std::vector<std::string> filler;  // for GapKind::filled
  int validated_at = 0;
  ObjectiveKind objective = ObjectiveKind::I;
  double delta_actual = 0.0;
  std::size_t count = 0;  // occurrences fused in the trial text
  BigramKey key;          // the candidate this entry came from
};

struct StopEntry {
  BigramKey key;
  Side side = Side::source;
  int iteration = 0;
};

struct AuditRecord {
  int iteration = 0;
  Side side = Side::source;
  std::size_t vocab_size = 0;  // types in use on the active side of the base text
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double objective_total = 0.0;  // base model
};

// Filler words that gapped compounds may skip, per side. An absent set
// leaves fillers unrestricted.
struct ReplayOptions {
  int max_gap = kMaxGap;
  std::array<std::optional<std::unordered_set<std::string>>, 2> fillers;

  FuseOptions fuse_options(Side side) const;
};

// Fuses the list into the text batch by batch, in list order; a batch is a
// run of entries sharing (iteration, side). Later entries may be built from
// earlier fused tokens, so this reproduces the text each iteration saw.
Bitext apply_nccs(const Bitext& text, std::span<const NccEntry> list, const ReplayOptions& options);

struct DiscoveryConfig {
  ObjectiveKind objective = ObjectiveKind::I;
  std::size_t phi = 2;
  int max_iterations = 5;
  bool two_sided = false;
  int max_gap = kMaxGap;
  // Per side: an explicit function-word list, or else the top_frequent most
  // frequent types of the training text.
  std::array<std::optional<std::vector<std::string>>, 2> function_words;
  std::size_t top_frequent = 100;
  std::optional<double> held_out_fraction;
  bool refresh = false;
  InductionOptions induction;
  // Per-iteration models and candidate reports go here when set.
  std::optional<std::filesystem::path> archive_dir;
};

struct DiscoveryState {
  int iteration = 0;
  Side side = Side::source;  // side of the most recent iteration
  Bitext text;               // training text with every accepted NCC fused
  std::vector<NccEntry> ncc_list;
  std::vector<StopEntry> stop_list;
  std::vector<AuditRecord> audit;
  std::array<std::vector<std::string>, 2> function_words;

  std::set<BigramKey> blocked(Side s) const;  // stop list plus accepted keys
};

struct TestedCandidate {
  NccCandidate candidate;
  NccEntry entry;
  double delta_actual = 0.0;
  bool accepted = false;
};

struct IterationReport {
  int iteration = 0;
  Side side = Side::source;
  TranslationModel base;   // oriented with the active side as source
  TranslationModel trial;
  double base_objective = 0.0;
  double trial_objective = 0.0;
  std::vector<NccCandidate> ranked;  // every candidate with positive estimate
  std::vector<TestedCandidate> tested;
};

DiscoveryState initial_state(const Bitext& training, const DiscoveryConfig& config);

// One pass of steps 2-10 on the given side. Updates state in place.
IterationReport run_iteration(DiscoveryState& state, Side side, const DiscoveryConfig& config);

// Ties go to the lexicographically smaller filler. Returns nullopt when the
// gap should be retained (more than three distinct fillers).
std::optional<std::vector<std::string>> choose_filler(
    const std::map<std::vector<std::string>, std::size_t>& fillers);

struct DiscoveryResult {
  DiscoveryState state;
  std::vector<IterationReport> reports;
  // Objective on held-out data with the NCCs of iterations <= k fused, k from 0.
  std::vector<double> held_out_objective;
  bool stopped_early = false;
  std::optional<TranslationModel> final_model;  // refresh run, E oriented
};

DiscoveryResult run_discovery(const Bitext& bitext, const DiscoveryConfig& config);

// Objective of a model induced on `text` after replaying `list`, E oriented.
double replayed_objective(const Bitext& text, std::span<const NccEntry> list,
                          const ReplayOptions& replay, ObjectiveKind kind,
                          const InductionOptions& induction);

ReplayOptions replay_options(const DiscoveryState& state, const DiscoveryConfig& config);

// Actual change for one tested candidate, from base and trial predictive values.
double actual_delta(const PredictiveValueTable& base, const PredictiveValueTable& trial,
                    TokenId x, TokenId y, std::optional<TokenId> xy);

void write_ncc_list(std::span<const NccEntry> list, std::ostream& out);
std::vector<NccEntry> read_ncc_list(std::istream& in);
void write_stop_list(std::span<const StopEntry> list, std::ostream& out);
void write_audit(std::span<const AuditRecord> audit, std::ostream& out);

}  // namespace ncc

#endif  // NCC_DISCOVERY_HPP_
