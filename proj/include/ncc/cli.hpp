#ifndef NCC_CLI_HPP_
#define NCC_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/objectives.hpp"
#include "ncc/synthgen.hpp"

namespace ncc {

// Resolved settings of one run. Every field has a command-line flag and a
// config-file key of the same name (see run_cli).
struct RunConfig {
  std::string command;
  ObjectiveKind objective = ObjectiveKind::I;
  std::size_t phi = 2;
  int iterations = 5;
  bool two_sided = false;
  int max_gap = 2;
  std::optional<std::filesystem::path> function_words;         // E side
  std::optional<std::filesystem::path> target_function_words;  // F side
  std::size_t top_frequent = 100;
  std::optional<double> held_out;
  Mode mode = Mode::word;
  unsigned workers = 1;
  int rounds = 3;
  bool refresh = false;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> source;
  std::optional<std::filesystem::path> target;
  std::vector<std::filesystem::path> models;       // evaluate
  std::optional<std::filesystem::path> ncc_list;   // evaluate, fuse
  std::optional<std::filesystem::path> text;       // fuse
  Side side = Side::source;                        // fuse
  GeneratorSpec generator;                         // generate
};

// Fail-fast checks: ranges, required inputs per command, input files exist.
// Throws ConfigError.
void validate(const RunConfig& config);

// "key\tvalue" rows: the resolved config, then "sha256:<path>" for each input.
void write_manifest(const RunConfig& config, std::ostream& out);
std::string sha256_file(const std::filesystem::path& path);

int cmd_induce(const RunConfig& config, std::ostream& log);
int cmd_discover(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, std::ostream& log);
int cmd_fuse(const RunConfig& config, std::ostream& log);
int cmd_generate(const RunConfig& config, std::ostream& log);

// ncc <command> [--config FILE] [flags]. A config file holds "key = value"
// lines (# comments); command-line flags override it.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ncc

#endif  // NCC_CLI_HPP_
