#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ncc/discovery.hpp"
#include "ncc/errors.hpp"
#include "ncc/synthgen.hpp"

using namespace ncc;

namespace {

Bitext balance_sheet_bitext() {
  return bitext_from_lines(std::vector<std::string>{"balance", "sheet", "balance sheet"},
                           std::vector<std::string>{"équilibre", "feuille", "bilan"});
}

DiscoveryConfig tiny(ObjectiveKind kind) {
  DiscoveryConfig c;
  c.objective = kind;
  c.phi = 1;
  c.top_frequent = 0;
  c.max_iterations = 1;
  return c;
}

GeneratedCorpus planted_corpus(std::uint64_t seed, double noise, std::size_t segments = 1500) {
  GeneratorSpec g;
  g.segment_count = segments;
  g.source_vocab = g.target_vocab = 400;
  g.planted_count = 6;
  g.noise_rate = noise;
  g.seed = seed;
  return generate(g);
}

DiscoveryConfig planted_config(const GeneratedCorpus& c, ObjectiveKind kind, int iterations) {
  DiscoveryConfig cfg;
  cfg.objective = kind;
  cfg.max_iterations = iterations;
  cfg.function_words[0] = c.source_function_words;
  cfg.function_words[1] = c.target_function_words;
  return cfg;
}

std::string dump_list(const DiscoveryResult& r) {
  std::ostringstream out;
  write_ncc_list(r.state.ncc_list, out);
  write_audit(r.state.audit, out);
  write_stop_list(r.state.stop_list, out);
  return out.str();
}

}  // namespace

TEST_CASE("balance sheet: balance sheet is validated with the exact objective change") {
  auto r = run_discovery(balance_sheet_bitext(), tiny(ObjectiveKind::I));
  REQUIRE(r.reports.size() == 1);
  const auto& rep = r.reports[0];
  CHECK(std::abs(rep.base_objective - 2.0 / 3 * std::log(2.0)) < 1e-9);
  CHECK(std::abs(rep.trial_objective - std::log(3.0)) < 1e-9);
  REQUIRE(r.state.ncc_list.size() == 1);
  const auto& e = r.state.ncc_list[0];
  CHECK(e.compound.surface() == "balance_sheet");
  CHECK(std::abs(e.delta_actual - (std::log(3.0) - 2.0 / 3 * std::log(2.0))) < 1e-9);
  CHECK(e.count == 1);
  CHECK(r.state.stop_list.empty());
  REQUIRE(r.state.audit.size() == 1);
  CHECK(r.state.audit[0].proposed == 1);
  CHECK(r.state.audit[0].accepted == 1);
}

TEST_CASE("balance sheet under V") {
  auto r = run_discovery(balance_sheet_bitext(), tiny(ObjectiveKind::V));
  REQUIRE(r.state.ncc_list.size() == 1);
  CHECK(std::abs(r.state.ncc_list[0].delta_actual - (std::log(3.0) - 2.0 / 3 * std::log(2.0))) < 1e-9);
}

TEST_CASE("balance sheet, two-sided: the French side adds nothing") {
  auto cfg = tiny(ObjectiveKind::I);
  cfg.two_sided = true;
  cfg.max_iterations = 2;
  auto r = run_discovery(balance_sheet_bitext(), cfg);
  REQUIRE(r.state.audit.size() == 2);
  CHECK(r.state.audit[0].side == Side::source);
  CHECK(r.state.audit[0].accepted == 1);
  CHECK(r.state.audit[1].side == Side::target);
  CHECK(r.state.audit[1].accepted == 0);
  CHECK(r.state.ncc_list.size() == 1);
}

TEST_CASE("zero iterations") {
  auto cfg = tiny(ObjectiveKind::I);
  cfg.max_iterations = 0;
  auto r = run_discovery(balance_sheet_bitext(), cfg);
  CHECK(r.state.ncc_list.empty());
  CHECK(r.state.stop_list.empty());
  CHECK(r.state.audit.empty());
}

TEST_CASE("a word-for-word bijective corpus yields nothing") {
  GeneratorSpec g;
  g.segment_count = 800;
  g.source_vocab = g.target_vocab = 50;
  g.seed = 4;
  auto c = generate(g);
  for (auto kind : {ObjectiveKind::I, ObjectiveKind::V}) {
    auto r = run_discovery(c.bitext(), planted_config(c, kind, 2));
    CHECK(r.state.ncc_list.empty());
  }
}

TEST_CASE("planted compounds are found") {
  auto c = planted_corpus(3, 0.0);
  auto r = run_discovery(c.bitext(), planted_config(c, ObjectiveKind::V, 2));
  std::set<std::string> found;
  for (const auto& e : r.state.ncc_list) found.insert(e.compound.surface());
  std::size_t hits = 0;
  for (const auto& p : c.ground_truth) hits += found.count(planted_surface(p));
  CHECK(hits >= 5);
}

TEST_CASE("acceptance soundness, stop list effectiveness and disjointness") {
  auto c = planted_corpus(5, 0.05);
  for (auto kind : {ObjectiveKind::I, ObjectiveKind::V}) {
    auto r = run_discovery(c.bitext(), planted_config(c, kind, 3));
    for (const auto& e : r.state.ncc_list) CHECK(e.delta_actual > 0.0);
    for (const auto& rep : r.reports) {
      const auto base = predictive_values(rep.base, kind);
      const auto trial = predictive_values(rep.trial, kind);
      for (const auto& t : rep.tested) {
        const double d = actual_delta(base, trial, t.candidate.x, t.candidate.y,
                                      rep.trial.source_vocab().find(t.entry.compound.surface()));
        CHECK(std::abs(d - t.delta_actual) < 1e-9);
      }
    }
    std::set<BigramKey> stopped;
    for (const auto& rep : r.reports) {
      const auto& v = rep.base.source_vocab();
      for (const auto& cand : rep.ranked)
        CHECK_FALSE(stopped.contains(BigramKey{v.surface(cand.x), v.surface(cand.y), cand.gap}));
      for (const auto& t : rep.tested)
        if (!t.accepted) stopped.insert(t.entry.key);
    }
    std::set<BigramKey> listed;
    for (const auto& e : r.state.ncc_list) listed.insert(e.key);
    for (const auto& s : r.state.stop_list) CHECK_FALSE(listed.contains(s.key));
  }
}

TEST_CASE("trial model brackets the per-candidate changes") {
  auto c = planted_corpus(9, 0.0);
  auto r = run_discovery(c.bitext(), planted_config(c, ObjectiveKind::V, 1));
  const auto& rep = r.reports.at(0);
  REQUIRE_FALSE(rep.tested.empty());
  std::set<TokenId> words;
  double sum = 0.0;
  for (const auto& t : rep.tested) {
    CHECK(words.insert(t.candidate.x).second);
    CHECK(words.insert(t.candidate.y).second);
    sum += t.delta_actual;
  }
  CHECK(std::abs(rep.trial_objective - (rep.base_objective + sum)) < 1e-6);
}

TEST_CASE("training objective does not drop after accepting") {
  auto c = planted_corpus(2, 0.0);
  auto r = run_discovery(c.bitext(), planted_config(c, ObjectiveKind::I, 3));
  for (std::size_t k = 1; k < r.state.audit.size(); ++k)
    if (r.state.audit[k - 1].accepted > 0)
      CHECK(r.state.audit[k].objective_total >= r.state.audit[k - 1].objective_total - 1e-12);
}

TEST_CASE("gap filling") {
  using Fillers = std::map<std::vector<std::string>, std::size_t>;
  CHECK(choose_filler(Fillers{{{"his"}, 3}, {{"your"}, 1}}) == std::vector<std::string>{"his"});
  CHECK(choose_filler(Fillers{{{"his"}, 1}}) == std::vector<std::string>{"his"});
  CHECK(choose_filler(Fillers{{{"my"}, 2}, {{"his"}, 2}}) == std::vector<std::string>{"his"});
  CHECK_FALSE(choose_filler(Fillers{{{"a"}, 1}, {{"b"}, 1}, {{"c"}, 1}, {{"d"}, 1}, {{"e"}, 1}}));
}

TEST_CASE("gapped compounds: few fillers are filled, many are retained") {
  std::vector<std::string> src, tgt;
  const std::vector<std::string> owners{"his", "your", "my", "their", "her"};
  for (int i = 0; i < 40; ++i) {
    const std::string o = owners[i % 5];
    src.push_back("up " + o + " mind");
    tgt.push_back("decide " + o + "_f");
    src.push_back("blow the whistle");
    tgt.push_back("denounce the_f");
    src.push_back("up " + o);
    tgt.push_back("haut " + o + "_f");
    src.push_back(o + " mind");
    tgt.push_back(o + "_f esprit");
    src.push_back("blow " + o);
    tgt.push_back("souffler " + o + "_f");
    src.push_back(o + " whistle");
    tgt.push_back(o + "_f sifflet");
  }
  Bitext b = bitext_from_lines(src, tgt);
  DiscoveryConfig cfg;
  cfg.objective = ObjectiveKind::I;
  cfg.max_iterations = 2;
  cfg.function_words[0] = {"his", "your", "my", "their", "her", "the"};
  cfg.function_words[1] = std::vector<std::string>{};
  auto r = run_discovery(b, cfg);
  std::set<std::string> found;
  for (const auto& e : r.state.ncc_list) found.insert(e.compound.surface());
  CHECK(found.contains("blow_the_whistle"));
  CHECK(found.contains("up_<GAP>_mind"));
  bool retained = false;
  for (const auto& e : r.state.ncc_list)
    if (e.gap == GapKind::retained) {
      retained = true;
      CHECK(e.compound.surface().find("<GAP>") != std::string::npos);
    }
  CHECK(retained);
  // The retained gap keeps its filler in the text, right after the fused token.
  Bitext fused = r.state.text;
  bool seen = false;
  for (const auto& p : fused.pairs()) {
    const auto& v = fused.vocab(Side::source);
    for (std::size_t k = 0; k + 1 < p.source.size(); ++k)
      if (v.token(p.source[k]).gap_index) {
        seen = true;
        CHECK(std::find(owners.begin(), owners.end(), v.surface(p.source[k + 1])) != owners.end());
      }
  }
  CHECK(seen);
}

TEST_CASE("two-sided mode links compounds on both sides") {
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 30; ++i) {
    src.push_back("kick bucket w" + std::to_string(i % 3));
    tgt.push_back("casser pipe v" + std::to_string(i % 3));
    src.push_back("kick w" + std::to_string(i % 3));
    tgt.push_back("frapper v" + std::to_string(i % 3));
    src.push_back("bucket");
    tgt.push_back("seau");
    src.push_back("break w" + std::to_string(i % 3));
    tgt.push_back("casser v" + std::to_string(i % 3));
    src.push_back("pipe");
    tgt.push_back("pipe");
  }
  Bitext b = bitext_from_lines(src, tgt);
  DiscoveryConfig cfg;
  cfg.objective = ObjectiveKind::I;
  cfg.max_iterations = 2;
  cfg.two_sided = true;
  cfg.top_frequent = 0;
  cfg.refresh = true;
  auto r = run_discovery(b, cfg);
  REQUIRE(r.final_model);
  const auto& m = *r.final_model;
  auto s = m.source_vocab().find("kick_bucket");
  auto t = m.target_vocab().find("casser_pipe");
  REQUIRE(s);
  REQUIRE(t);
  CHECK(m.joint(*s, *t) > 0.0);
  CHECK(most_likely_translation(m, *s) == *t);
}

TEST_CASE("held-out stopping") {
  auto c = planted_corpus(7, 0.05);
  auto cfg = planted_config(c, ObjectiveKind::I, 3);
  cfg.held_out_fraction = 0.1;
  auto r = run_discovery(c.bitext(), cfg);
  CHECK(r.held_out_objective.size() >= 1);
  for (std::size_t k = 1; k < r.held_out_objective.size(); ++k)
    CHECK(r.held_out_objective[k] >= r.held_out_objective[k - 1] - 1e-12);
  for (double bad : {0.0, 1.0, -0.5, 1.5}) {
    cfg.held_out_fraction = bad;
    CHECK_THROWS_AS(run_discovery(c.bitext(), cfg), ConfigError);
  }
}

TEST_CASE("replaying the list reproduces the working text") {
  auto c = planted_corpus(8, 0.05);
  auto cfg = planted_config(c, ObjectiveKind::V, 3);
  cfg.two_sided = true;
  auto r = run_discovery(c.bitext(), cfg);
  Bitext replayed = apply_nccs(c.bitext(), r.state.ncc_list, replay_options(r.state, cfg));
  CHECK(side_lines(replayed, Side::source) == side_lines(r.state.text, Side::source));
  CHECK(side_lines(replayed, Side::target) == side_lines(r.state.text, Side::target));
}

TEST_CASE("same seed and any worker count give the same trajectory") {
  auto c = planted_corpus(11, 0.05);
  auto one = planted_config(c, ObjectiveKind::V, 3);
  auto many = one;
  many.induction.workers = 4;
  CHECK(dump_list(run_discovery(c.bitext(), one)) == dump_list(run_discovery(c.bitext(), many)));
}

TEST_CASE("NCC list round trip and malformed rows") {
  auto r = run_discovery(balance_sheet_bitext(), tiny(ObjectiveKind::I));
  std::ostringstream out;
  write_ncc_list(r.state.ncc_list, out);
  CHECK(out.str().rfind("surface_form\tside\titeration\tdelta_actual_nats\tcount\nbalance_sheet\tE\t1\t", 0) == 0);
  std::istringstream in(out.str());
  auto back = read_ncc_list(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].compound.surface() == "balance_sheet");
  CHECK(back[0].validated_at == 1);
  std::istringstream bad("surface_form\tside\titeration\tdelta_actual_nats\tcount\nsolo\tE\t1\t0.5\t1\n");
  CHECK_THROWS_AS(read_ncc_list(bad), ParseError);
  std::istringstream bad_side("a_b\tQ\t1\t0.5\t1\n");
  CHECK_THROWS_AS(read_ncc_list(bad_side), ParseError);
  std::istringstream short_row("a_b\tE\n");
  CHECK_THROWS_AS(read_ncc_list(short_row), ParseError);
}
