#include "ncc/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ncc/errors.hpp"

namespace ncc {

namespace {

constexpr double kMargin = 1e-12;

std::size_t side_index(Side s) { return s == Side::source ? 0 : 1; }

Bitext oriented(const Bitext& text, Side side) { return side == Side::source ? text : text.swapped(); }

TranslationModel e_oriented(const TranslationModel& m, Side side) {
  return side == Side::source ? m : m.transposed();
}

std::vector<std::string> joined_filler(const Vocabulary& vocab, const std::vector<TokenId>& ids) {
  std::vector<std::string> out;
  for (TokenId id : ids) out.push_back(vocab.surface(id));
  return out;
}

// The compound a candidate would fuse into, or nullopt when it would need a
// second retained gap.
std::optional<NccEntry> build_entry(const NccCandidate& c, const Vocabulary& vocab,
                                    const std::optional<std::vector<std::string>>& filler) {
  NccEntry e;
  const Token& x = vocab.token(c.x);
  const Token& y = vocab.token(c.y);
  e.key = BigramKey{x.surface, y.surface, c.gap};
  auto parts = [](const Token& t) {
    return t.kind == TokenKind::plain ? std::vector<std::string>{t.surface} : t.components;
  };
  std::vector<std::string> comps = parts(x);
  std::optional<std::size_t> gap;
  if (c.gap > 0) {
    if (filler) {
      e.gap = GapKind::filled;
      e.filler = *filler;
      for (const auto& f : *filler)
        for (auto& piece : defuse_surface(f)) comps.push_back(piece);
    } else {
      e.gap = GapKind::retained;
      gap = comps.size();
    }
  }
  if (y.gap_index) {
    if (gap) return std::nullopt;
    gap = comps.size() + *y.gap_index;
  }
  for (auto& piece : parts(y)) comps.push_back(piece);
  e.compound = Compound{std::move(comps), gap};
  return e;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

}  // namespace

FuseOptions ReplayOptions::fuse_options(Side side) const {
  FuseOptions o;
  o.max_gap = max_gap;
  if (const auto& f = fillers[side_index(side)]) {
    o.restrict_fillers = true;
    o.filler_words = *f;
  }
  return o;
}

Bitext apply_nccs(const Bitext& text, std::span<const NccEntry> list, const ReplayOptions& options) {
  Bitext out = text;
  std::size_t i = 0;
  while (i < list.size()) {
    std::size_t j = i;
    std::vector<Compound> batch;
    while (j < list.size() && list[j].validated_at == list[i].validated_at &&
           list[j].side == list[i].side)
      batch.push_back(list[j++].compound);
    out = fuse_side(out, list[i].side, batch, options.fuse_options(list[i].side));
    i = j;
  }
  return out;
}

std::set<BigramKey> DiscoveryState::blocked(Side s) const {
  std::set<BigramKey> out;
  for (const auto& e : stop_list)
    if (e.side == s) out.insert(e.key);
  for (const auto& e : ncc_list)
    if (e.side == s) out.insert(e.key);
  return out;
}

std::optional<std::vector<std::string>> choose_filler(
    const std::map<std::vector<std::string>, std::size_t>& fillers) {
  if (fillers.empty() || fillers.size() > 3) return std::nullopt;
  auto best = fillers.begin();
  for (auto it = fillers.begin(); it != fillers.end(); ++it)
    if (it->second > best->second) best = it;  // map order gives the lexicographic tie rule
  return best->first;
}

ReplayOptions replay_options(const DiscoveryState& state, const DiscoveryConfig& config) {
  ReplayOptions r;
  r.max_gap = config.max_gap;
  for (std::size_t s = 0; s < 2; ++s)
    r.fillers[s] = std::unordered_set<std::string>(state.function_words[s].begin(),
                                                   state.function_words[s].end());
  return r;
}

DiscoveryState initial_state(const Bitext& training, const DiscoveryConfig& config) {
  if (config.max_gap < 0 || config.max_gap > kMaxGap)
    throw ConfigError("gap limit must be between 0 and 2");
  if (config.phi < 1) throw ConfigError("phi must be at least 1");
  DiscoveryState st;
  st.text = training;
  for (Side side : {Side::source, Side::target}) {
    auto& words = st.function_words[side_index(side)];
    if (const auto& explicit_list = config.function_words[side_index(side)]) {
      words = *explicit_list;
    } else {
      auto fw = function_words_top_k(training, side, config.top_frequent);
      const auto& vocab = training.vocab(side);
      for (TokenId id : fw.members) words.push_back(vocab.surface(id));
      std::sort(words.begin(), words.end());
    }
  }
  return st;
}

double actual_delta(const PredictiveValueTable& base, const PredictiveValueTable& trial, TokenId x,
                    TokenId y, std::optional<TokenId> xy) {
  const double joined = xy ? trial(*xy) : 0.0;
  if (x == y) return trial(x) + joined - base(x);
  return trial(x) + trial(y) + joined - base(x) - base(y);
}

IterationReport run_iteration(DiscoveryState& state, Side side, const DiscoveryConfig& config) {
  IterationReport rep;
  rep.iteration = state.iteration + 1;
  rep.side = side;

  // Step 2: the state's text already carries every accepted NCC.
  const Bitext text = oriented(state.text, side);
  const Vocabulary& vocab = text.vocab(Side::source);
  const auto& fw_words = state.function_words[side_index(side)];
  const FunctionWordSet fw = function_words_from_list(text, Side::source, fw_words);

  // Step 3.
  InducedModel base = induce_model(text, config.induction);
  const PredictiveValueTable base_pv = predictive_values(base.model, config.objective);
  rep.base_objective = base_pv.total;

  // Steps 4-5.
  CandidateOptions copt;
  copt.phi = config.phi;
  copt.max_gap = config.max_gap;
  const std::vector<CandidateCount> counts =
      generate_candidates(text, fw, state.blocked(side), copt);
  const std::vector<ContextStats> stats =
      context_stats(base.model, base.links, text, fw, counts);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const DeltaEstimate d = estimate_delta(config.objective, base.model, base_pv, stats[c], counts[c]);
    if (!(d.delta_hat > kMargin)) continue;
    rep.ranked.push_back(NccCandidate{counts[c].x, counts[c].y, counts[c].gap, counts[c].frequency,
                                      d.delta_hat, d.delta_right, d.delta_left,
                                      counts[c].nested_gap});
  }
  rank_candidates(rep.ranked, vocab);

  auto gap_choice = [&](const NccCandidate& c) -> std::optional<std::vector<std::string>> {
    if (c.gap == 0) return std::nullopt;
    std::map<std::vector<std::string>, std::size_t> named;
    for (const auto& [ids, n] : filler_counts(text, fw, c.x, c.y, c.gap))
      named[joined_filler(vocab, ids)] += n;
    return choose_filler(named);
  };

  // A nested candidate that would keep its own gap cannot be encoded; drop it
  // before it can block other candidates in the filter.
  std::vector<NccCandidate> eligible;
  for (const auto& c : rep.ranked)
    if (!c.nested_gap || gap_choice(c)) eligible.push_back(c);

  // Step 6, then gap filling.
  std::set<std::vector<std::string>> defined;
  for (const auto& c : mutual_exclusion_filter(eligible)) {
    auto entry = build_entry(c, vocab, gap_choice(c));
    if (!entry || !defined.insert(entry->compound.components).second) continue;
    entry->side = side;
    entry->validated_at = rep.iteration;
    entry->objective = config.objective;
    rep.tested.push_back(TestedCandidate{c, std::move(*entry), 0.0, false});
  }

  // Steps 7-8.
  std::vector<Compound> batch;
  for (const auto& t : rep.tested) batch.push_back(t.entry.compound);
  const FuseOptions fopt = replay_options(state, config).fuse_options(side);
  FuseStats fstats;
  const Bitext trial_text = fuse_side(text, Side::source, batch, fopt, &fstats);
  InducedModel trial = induce_model(trial_text, config.induction);
  const PredictiveValueTable trial_pv = predictive_values(trial.model, config.objective);
  rep.trial_objective = trial_pv.total;

  // Steps 9-10.
  std::vector<Compound> accepted;
  const Vocabulary& tv = trial_text.vocab(Side::source);
  for (std::size_t k = 0; k < rep.tested.size(); ++k) {
    auto& t = rep.tested[k];
    t.entry.count = fstats.occurrences.empty() ? 0 : fstats.occurrences[k];
    t.delta_actual = actual_delta(base_pv, trial_pv, t.candidate.x, t.candidate.y,
                                  tv.find(t.entry.compound.surface()));
    t.entry.delta_actual = t.delta_actual;
    t.accepted = t.entry.count > 0 && t.delta_actual > kMargin;
    if (t.accepted) {
      state.ncc_list.push_back(t.entry);
      accepted.push_back(t.entry.compound);
    } else {
      state.stop_list.push_back(StopEntry{t.entry.key, side, rep.iteration});
    }
  }

  state.audit.push_back(AuditRecord{rep.iteration, side, text.types_in_use(Side::source),
                                    rep.tested.size(), accepted.size(), rep.base_objective});
  state.text = fuse_side(state.text, side, accepted, fopt);
  state.iteration = rep.iteration;
  state.side = side;

  if (config.archive_dir) {
    const auto& dir = *config.archive_dir;
    std::ostringstream m, t, c;
    write_model(e_oriented(base.model, side), m);
    write_model(e_oriented(trial.model, side), t);
    std::vector<NccCandidate> tested;
    for (const auto& x : rep.tested) tested.push_back(x.candidate);
    write_candidates(tested, vocab, c);
    write_file(dir / "models" / ("model_" + std::to_string(rep.iteration - 1) + ".tsv"), m.str());
    write_file(dir / "models" / ("trial_" + std::to_string(rep.iteration) + ".tsv"), t.str());
    write_file(dir / "candidates" / ("iter_" + std::to_string(rep.iteration) + ".tsv"), c.str());
  }

  rep.base = std::move(base.model);
  rep.trial = std::move(trial.model);
  return rep;
}

double replayed_objective(const Bitext& text, std::span<const NccEntry> list,
                          const ReplayOptions& replay, ObjectiveKind kind,
                          const InductionOptions& induction) {
  const Bitext fused = apply_nccs(text, list, replay);
  return objective_total(induce_model(fused, induction).model, kind);
}

DiscoveryResult run_discovery(const Bitext& bitext, const DiscoveryConfig& config) {
  if (config.max_iterations < 0) throw ConfigError("iteration count must be non-negative");
  if (bitext.empty()) throw ModelError("cannot discover compounds in an empty bitext");

  Bitext training = bitext;
  std::optional<Bitext> held_out;
  if (config.held_out_fraction) {
    const double f = *config.held_out_fraction;
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("held-out fraction must lie strictly between 0 and 1");
    const std::size_t n = bitext.size();
    const auto held = static_cast<std::size_t>(std::floor(static_cast<double>(n) * f));
    if (held == 0 || held >= n) throw ConfigError("held-out split leaves one part empty");
    training = bitext.slice(0, n - held);
    held_out = bitext.slice(n - held, n);
  }

  DiscoveryResult result;
  result.state = initial_state(training, config);
  DiscoveryState& st = result.state;
  const ReplayOptions replay = replay_options(st, config);

  if (held_out)
    result.held_out_objective.push_back(
        replayed_objective(*held_out, st.ncc_list, replay, config.objective, config.induction));

  for (int k = 1; k <= config.max_iterations; ++k) {
    const Side side = config.two_sided && k % 2 == 0 ? Side::target : Side::source;
    const Bitext before = st.text;
    const std::size_t listed = st.ncc_list.size();
    result.reports.push_back(run_iteration(st, side, config));
    if (!held_out) continue;
    const double h =
        replayed_objective(*held_out, st.ncc_list, replay, config.objective, config.induction);
    if (h < result.held_out_objective.back() - kMargin) {
      st.ncc_list.resize(listed);
      st.text = before;
      result.stopped_early = true;
      break;
    }
    result.held_out_objective.push_back(h);
  }

  if (config.refresh) {
    result.final_model = induce_model(st.text, config.induction).model;
    if (config.archive_dir) {
      std::ostringstream m;
      write_model(*result.final_model, m);
      write_file(*config.archive_dir / "models" / ("model_" + std::to_string(st.iteration) + ".tsv"),
                 m.str());
    }
  }
  return result;
}

void write_ncc_list(std::span<const NccEntry> list, std::ostream& out) {
  out << "surface_form\tside\titeration\tdelta_actual_nats\tcount\n";
  for (const auto& e : list)
    out << e.compound.surface() << '\t' << side_name(e.side) << '\t' << e.validated_at << '\t'
        << format_nats(e.delta_actual) << '\t' << e.count << '\n';
}

std::vector<NccEntry> read_ncc_list(std::istream& in) {
  std::vector<NccEntry> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (row == 1 && line.rfind("surface_form\t", 0) == 0)) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = "NCC list row " + std::to_string(row);
    if (cells.size() != 5) throw ParseError(where + ": expected 5 fields");
    NccEntry e;
    try {
      e.compound = Compound::parse(cells[0]);
      e.side = parse_side(cells[1]);
      e.validated_at = std::stoi(cells[2]);
      e.delta_actual = std::stod(cells[3]);
      e.count = std::stoull(cells[4]);
    } catch (const ParseError& err) {
      throw ParseError(where + ": " + err.what());
    } catch (const std::exception&) {
      throw ParseError(where + ": malformed field");
    }
    e.gap = e.compound.gap_index ? GapKind::retained : GapKind::none;
    out.push_back(std::move(e));
  }
  return out;
}

void write_stop_list(std::span<const StopEntry> list, std::ostream& out) {
  out << "x\ty\tside\titeration\tgap\n";
  for (const auto& e : list)
    out << e.key.x << '\t' << e.key.y << '\t' << side_name(e.side) << '\t' << e.iteration << '\t'
        << e.key.gap << '\n';
}

void write_audit(std::span<const AuditRecord> audit, std::ostream& out) {
  out << "iteration\tside\tvocab_size\tproposed\taccepted\tobjective_total_nats\n";
  for (const auto& a : audit)
    out << a.iteration << '\t' << side_name(a.side) << '\t' << a.vocab_size << '\t' << a.proposed
        << '\t' << a.accepted << '\t' << format_nats(a.objective_total) << '\n';
}

}  // namespace ncc
