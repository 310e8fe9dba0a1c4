#include "ncc/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "ncc/bible.hpp"
#include "ncc/discovery.hpp"
#include "ncc/errors.hpp"

namespace ncc {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> read_word_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line))
    if (auto w = trim(line); !w.empty()) words.push_back(std::move(w));
  return words;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void require_file(const std::optional<fs::path>& p, const char* flag) {
  if (p && !fs::is_regular_file(*p)) throw ConfigError(std::string(flag) + ": no such file " + p->string());
}

std::string path_or_empty(const std::optional<fs::path>& p) { return p ? p->string() : ""; }

std::vector<std::pair<std::string, std::string>> manifest_rows(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> rows{
      {"command", c.command},
      {"objective", std::string(objective_name(c.objective))},
      {"phi", std::to_string(c.phi)},
      {"iterations", std::to_string(c.iterations)},
      {"two-sided", c.two_sided ? "true" : "false"},
      {"max-gap", std::to_string(c.max_gap)},
      {"function-words", path_or_empty(c.function_words)},
      {"target-function-words", path_or_empty(c.target_function_words)},
      {"top-frequent", std::to_string(c.top_frequent)},
      {"held-out", c.held_out ? format_nats(*c.held_out) : ""},
      {"mode", c.mode == Mode::word ? "word" : "character"},
      {"workers", std::to_string(c.workers)},
      {"rounds", std::to_string(c.rounds)},
      {"refresh", c.refresh ? "true" : "false"},
      {"out", c.out.string()},
      {"source", path_or_empty(c.source)},
      {"target", path_or_empty(c.target)},
      {"ncc-list", path_or_empty(c.ncc_list)},
      {"text", path_or_empty(c.text)},
      {"side", std::string(side_name(c.side))},
  };
  for (const auto& m : c.models) rows.emplace_back("model", m.string());
  if (c.command == "generate") {
    const auto& g = c.generator;
    rows.insert(rows.end(),
                {{"segments", std::to_string(g.segment_count)},
                 {"source-vocab", std::to_string(g.source_vocab)},
                 {"target-vocab", std::to_string(g.target_vocab)},
                 {"min-length", std::to_string(g.min_length)},
                 {"max-length", std::to_string(g.max_length)},
                 {"lexicon", g.lexicon == LexiconKind::bijective ? "bijective" : "many-to-one"},
                 {"ratio", std::to_string(g.many_to_one_ratio)},
                 {"planted", std::to_string(g.planted_count)},
                 {"planted-gapped", std::to_string(g.planted_gapped)},
                 {"planted-rate", format_nats(g.planted_rate)},
                 {"function-word-count", std::to_string(g.function_words)},
                 {"function-rate", format_nats(g.function_rate)},
                 {"noise", format_nats(g.noise_rate)},
                 {"seed", std::to_string(g.seed)}});
  }
  return rows;
}

std::vector<fs::path> inputs(const RunConfig& c) {
  std::vector<fs::path> in;
  for (const auto* p : {&c.source, &c.target, &c.function_words, &c.target_function_words,
                        &c.ncc_list, &c.text})
    if (*p) in.push_back(**p);
  in.insert(in.end(), c.models.begin(), c.models.end());
  return in;
}

void finish(const RunConfig& c) {
  auto out = open_out(c.out / "manifest.tsv");
  write_manifest(c, out);
}

Bitext load_input(const RunConfig& c) {
  return load_bitext(*c.source, c.target.value_or(fs::path()), c.mode);
}

std::vector<NccEntry> load_list(const std::optional<fs::path>& path) {
  if (!path) return {};
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot read " + path->string());
  return read_ncc_list(in);
}

ReplayOptions replay_from(const RunConfig& c) {
  ReplayOptions r;
  r.max_gap = c.max_gap;
  if (c.function_words) {
    auto w = read_word_list(*c.function_words);
    r.fillers[0] = std::unordered_set<std::string>(w.begin(), w.end());
  }
  if (c.target_function_words) {
    auto w = read_word_list(*c.target_function_words);
    r.fillers[1] = std::unordered_set<std::string>(w.begin(), w.end());
  }
  return r;
}

// k in "model_<k>.tsv"; other names take the whole NCC list.
std::optional<int> model_iteration(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.rfind("model_", 0) != 0) return std::nullopt;
  int k = 0;
  const char* b = stem.data() + 6;
  const char* e = stem.data() + stem.size();
  auto [ptr, ec] = std::from_chars(b, e, k);
  if (ec != std::errc() || ptr != e || b == e) return std::nullopt;
  return k;
}

}  // namespace

void validate(const RunConfig& c) {
  static const std::array<std::string, 5> commands{"induce", "discover", "evaluate", "fuse", "generate"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw ConfigError("unknown command '" + c.command + "'");
  if (c.max_gap < 0 || c.max_gap > kMaxGap) throw ConfigError("--max-gap must be 0, 1 or 2");
  if (c.phi == 0) throw ConfigError("--phi must be at least 1");
  if (c.iterations < 0) throw ConfigError("--iterations must be non-negative");
  if (c.held_out && !(*c.held_out > 0.0 && *c.held_out < 1.0))
    throw ConfigError("--held-out must lie strictly between 0 and 1");
  if (c.workers == 0) throw ConfigError("--workers must be at least 1");
  if (c.rounds < 1) throw ConfigError("--rounds must be at least 1");
  if (c.command == "induce" || c.command == "discover" || c.command == "evaluate") {
    if (!c.source) throw ConfigError("--source is required");
    if (c.mode == Mode::word && !c.target) throw ConfigError("--target is required in word mode");
  }
  if (c.command == "evaluate" && c.models.empty()) throw ConfigError("evaluate needs at least one --model");
  if (c.command == "fuse") {
    if (!c.text) throw ConfigError("--text is required");
    if (!c.ncc_list) throw ConfigError("--ncc-list is required");
    if (c.mode != Mode::word) throw ConfigError("fuse works on word-mode text");
  }
  require_file(c.source, "--source");
  if (c.mode == Mode::word) require_file(c.target, "--target");
  require_file(c.function_words, "--function-words");
  require_file(c.target_function_words, "--target-function-words");
  require_file(c.ncc_list, "--ncc-list");
  require_file(c.text, "--text");
  for (const auto& m : c.models) require_file(m, "--model");
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 unavailable");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

void write_manifest(const RunConfig& config, std::ostream& out) {
  out << "key\tvalue\n";
  for (const auto& [k, v] : manifest_rows(config)) out << k << '\t' << v << '\n';
  for (const auto& p : inputs(config)) out << "sha256:" << p.string() << '\t' << sha256_file(p) << '\n';
}

int cmd_induce(const RunConfig& c, std::ostream& log) {
  validate(c);
  const Bitext text = load_input(c);
  InductionOptions opt;
  opt.rounds = c.rounds;
  opt.workers = c.workers;
  const auto induced = induce_model(text, opt);
  {
    auto out = open_out(c.out / "model.tsv");
    write_model(induced.model, out);
  }
  {
    auto out = open_out(c.out / "links.tsv");
    write_links(induced.links, text.vocab(Side::source), text.vocab(Side::target), out);
  }
  finish(c);
  log << text.size() << " segments, " << induced.model.source_support().size() << " source types, I = "
      << format_nats(mutual_information(induced.model)) << " nats\n";
  return 0;
}

int cmd_discover(const RunConfig& c, std::ostream& log) {
  validate(c);
  const Bitext text = load_input(c);
  DiscoveryConfig d;
  d.objective = c.objective;
  d.phi = c.phi;
  d.max_iterations = c.iterations;
  d.two_sided = c.two_sided;
  d.max_gap = c.max_gap;
  if (c.function_words) d.function_words[0] = read_word_list(*c.function_words);
  if (c.target_function_words) d.function_words[1] = read_word_list(*c.target_function_words);
  d.top_frequent = c.top_frequent;
  d.held_out_fraction = c.held_out;
  d.refresh = c.refresh;
  d.induction.rounds = c.rounds;
  d.induction.workers = c.workers;
  d.archive_dir = c.out;
  fs::create_directories(c.out);

  const auto r = run_discovery(text, d);
  {
    auto out = open_out(c.out / "ncc_list.tsv");
    write_ncc_list(r.state.ncc_list, out);
  }
  {
    auto out = open_out(c.out / "stop_list.tsv");
    write_stop_list(r.state.stop_list, out);
  }
  {
    auto out = open_out(c.out / "audit.tsv");
    write_audit(r.state.audit, out);
  }
  for (Side s : {Side::source, Side::target}) {
    auto out = open_out(c.out / ("function_words." + std::string(side_name(s)) + ".txt"));
    for (const auto& w : r.state.function_words[static_cast<int>(s)]) out << w << '\n';
  }
  if (c.held_out) {
    auto out = open_out(c.out / "held_out.tsv");
    out << "iteration\tobjective_nats\n";
    for (std::size_t k = 0; k < r.held_out_objective.size(); ++k)
      out << k << '\t' << format_nats(r.held_out_objective[k]) << '\n';
  }
  finish(c);

  for (const auto& a : r.state.audit)
    log << "iteration " << a.iteration << " " << side_name(a.side) << ": " << a.proposed << " proposed, "
        << a.accepted << " accepted, objective " << format_nats(a.objective_total) << " nats\n";
  if (r.stopped_early) log << "stopped: held-out objective dropped\n";
  log << r.state.ncc_list.size() << " NCCs written to " << (c.out / "ncc_list.tsv").string() << '\n';
  return 0;
}

int cmd_evaluate(const RunConfig& c, std::ostream& log) {
  validate(c);
  const Bitext test = load_input(c);
  const auto list = load_list(c.ncc_list);
  const auto replay = replay_from(c);
  std::vector<ScoreRow> rows;
  for (const auto& path : c.models) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    const TranslationModel model = read_model(in, Side::source);
    const auto k = model_iteration(path);
    std::vector<NccEntry> upto;
    for (const auto& e : list)
      if (!k || e.validated_at <= *k) upto.push_back(e);
    const int iteration = k.value_or(0);
    rows.push_back({iteration, Direction::e_to_f,
                    evaluate(model, test, upto, Direction::e_to_f, replay, c.workers)});
    rows.push_back({iteration, Direction::f_to_e,
                    evaluate(model.transposed(), test, upto, Direction::f_to_e, replay, c.workers)});
  }
  {
    auto out = open_out(c.out / "scores.tsv");
    write_scores(rows, out);
  }
  finish(c);
  write_scores(rows, log);
  return 0;
}

int cmd_fuse(const RunConfig& c, std::ostream& log) {
  validate(c);
  std::vector<NccEntry> list;
  for (auto& e : load_list(c.ncc_list))
    if (e.side == c.side) list.push_back(std::move(e));
  const FuseOptions opt = replay_from(c).fuse_options(c.side);

  std::vector<Fuser> batches;
  for (std::size_t i = 0; i < list.size();) {
    std::size_t j = i;
    std::vector<Compound> compounds;
    while (j < list.size() && list[j].validated_at == list[i].validated_at) compounds.push_back(list[j++].compound);
    batches.emplace_back(compounds, opt);
    i = j;
  }

  std::ifstream in(*c.text, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string result;
  Vocabulary vocab;
  std::size_t fused_lines = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    const bool last = end == std::string::npos;
    if (last) end = content.size();
    const std::string line = content.substr(start, end - start);
    std::vector<TokenId> ids;
    for (const auto& w : tokenize(line)) ids.push_back(vocab.intern(w));
    std::size_t fusions = 0;
    for (const auto& f : batches) {
      FuseStats stats;
      ids = f.apply(ids, vocab, &stats);
      fusions += stats.fusions;
    }
    if (fusions == 0) {
      result += line;
    } else {
      ++fused_lines;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (k) result += ' ';
        result += vocab.surface(ids[k]);
      }
    }
    if (last) break;
    result += '\n';
    start = end + 1;
  }
  {
    auto out = open_out(c.out / "fused.txt");
    out << result;
  }
  finish(c);
  log << fused_lines << " lines changed, written to " << (c.out / "fused.txt").string() << '\n';
  return 0;
}

int cmd_generate(const RunConfig& c, std::ostream& log) {
  validate(c);
  const auto corpus = generate(c.generator);
  write_corpus(corpus, c.out);
  finish(c);
  log << corpus.source_lines.size() << " segments, " << corpus.ground_truth.size()
      << " planted compounds, written to " << c.out.string() << '\n';
  return 0;
}

namespace {

// "key = value" lines become "--key=value" arguments.
std::vector<std::string> config_arguments(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::vector<std::string> args;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || trim(t.substr(0, eq)).empty())
      throw ConfigError(path.string() + ":" + std::to_string(row) + ": expected key = value");
    args.push_back("--" + trim(t.substr(0, eq)) + "=" + trim(t.substr(eq + 1)));
  }
  return args;
}

struct Pending {
  std::string objective = "i";
  std::string mode = "word";
  std::string side = "E";
  std::string lexicon = "bijective";
  double held_out = 0.0;
  std::string function_words, target_function_words, source, target, ncc_list, text;
  std::vector<std::string> models;
};

void add_shared(CLI::App* app, RunConfig& c, Pending& p) {
  app->add_option("--objective", p.objective, "objective function: i or v");
  app->add_option("--phi", c.phi, "minimum candidate frequency");
  app->add_option("--iterations", c.iterations, "discovery iterations");
  app->add_flag("--two-sided", c.two_sided, "alternate between E and F");
  app->add_option("--max-gap", c.max_gap, "largest gap in function words (0-2)");
  app->add_option("--function-words", p.function_words, "E-side function word file");
  app->add_option("--target-function-words", p.target_function_words, "F-side function word file");
  app->add_option("--top-frequent", c.top_frequent, "function words = most frequent types");
  app->add_option("--held-out", p.held_out, "held-out fraction");
  app->add_option("--mode", p.mode, "word or character");
  app->add_option("--workers", c.workers, "worker threads");
  app->add_option("--rounds", c.rounds, "linking rounds per model");
  app->add_flag("--refresh", c.refresh, "induce a final model after the last iteration");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--source", p.source, "E text, or the dictionary in character mode");
  app->add_option("--target", p.target, "F text");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  Pending p;
  CLI::App app("Discovers non-compositional compounds in parallel text.", "ncc");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"induce", "discover", "evaluate", "fuse", "generate"}) {
    auto* s = app.add_subcommand(name);
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_shared(s, c, p);
    s->add_option("--config", "flat key = value file");
    subs[name] = s;
  }
  subs["induce"]->description("induce one translation model");
  subs["discover"]->description("run compound discovery");
  subs["evaluate"]->description("score archived models in both directions");
  subs["fuse"]->description("fuse an NCC list into a text");
  subs["generate"]->description("write a synthetic corpus with planted compounds");
  subs["evaluate"]->add_option("--model", p.models, "model file (model_<k>.tsv)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  for (const char* name : {"evaluate", "fuse"}) subs[name]->add_option("--ncc-list", p.ncc_list, "NCC list");
  subs["fuse"]->add_option("--text", p.text, "text to fuse, one segment per line");
  subs["fuse"]->add_option("--side", p.side, "which NCCs apply: E or F");
  auto* g = subs["generate"];
  auto& gs = c.generator;
  g->add_option("--segments", gs.segment_count);
  g->add_option("--source-vocab", gs.source_vocab);
  g->add_option("--target-vocab", gs.target_vocab);
  g->add_option("--min-length", gs.min_length);
  g->add_option("--max-length", gs.max_length);
  g->add_option("--lexicon", p.lexicon, "bijective or many-to-one");
  g->add_option("--ratio", gs.many_to_one_ratio);
  g->add_option("--planted", gs.planted_count);
  g->add_option("--planted-gapped", gs.planted_gapped);
  g->add_option("--planted-rate", gs.planted_rate);
  g->add_option("--function-word-count", gs.function_words);
  g->add_option("--function-rate", gs.function_rate);
  g->add_option("--noise", gs.noise_rate);
  g->add_option("--seed", gs.seed);

  try {
    std::vector<std::string> argv;
    std::optional<fs::path> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        config_path = args[++i];
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_path = args[i].substr(9);
      } else {
        argv.push_back(args[i]);
      }
    }
    if (config_path && !argv.empty()) {
      auto extra = config_arguments(*config_path);
      argv.insert(argv.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(argv.begin(), argv.end());
    try {
      app.parse(argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err);
    }

    CLI::App* sub = app.get_subcommands().front();
    c.command = sub->get_name();
    c.objective = parse_objective(p.objective);
    if (p.mode == "word") {
      c.mode = Mode::word;
    } else if (p.mode == "character") {
      c.mode = Mode::character;
    } else {
      throw ConfigError("--mode must be word or character");
    }
    if (c.mode == Mode::character) {
      if (sub->count("--top-frequent") == 0) c.top_frequent = 0;
      if (sub->count("--max-gap") == 0) c.max_gap = 0;
      if (sub->count("--phi") == 0) c.phi = 25;
    }
    if (sub->count("--held-out")) c.held_out = p.held_out;
    auto opt_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
    c.function_words = opt_path(p.function_words);
    c.target_function_words = opt_path(p.target_function_words);
    c.source = opt_path(p.source);
    c.target = opt_path(p.target);
    c.ncc_list = opt_path(p.ncc_list);
    c.text = opt_path(p.text);
    c.models.assign(p.models.begin(), p.models.end());
    c.side = parse_side(p.side);
    if (p.lexicon == "bijective") {
      gs.lexicon = LexiconKind::bijective;
    } else if (p.lexicon == "many-to-one") {
      gs.lexicon = LexiconKind::many_to_one;
    } else {
      throw ConfigError("--lexicon must be bijective or many-to-one");
    }

    if (c.command == "induce") return cmd_induce(c, out);
    if (c.command == "discover") return cmd_discover(c, out);
    if (c.command == "evaluate") return cmd_evaluate(c, out);
    if (c.command == "fuse") return cmd_fuse(c, out);
    return cmd_generate(c, out);
  } catch (const ConfigError& e) {
    err << "ncc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "ncc: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ncc
