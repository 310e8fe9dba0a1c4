#include <map>
#include <sstream>

#include "doctest.h"
#include "ncc/discovery.hpp"
#include "ncc/errors.hpp"
#include "ncc/synthgen.hpp"

using namespace ncc;

TEST_CASE("the same seed gives the same corpus") {
  GeneratorSpec g;
  g.planted_count = 5;
  g.planted_gapped = 1;
  g.function_words = 3;
  g.function_rate = 0.1;
  g.noise_rate = 0.05;
  g.seed = 42;
  const auto a = generate(g);
  const auto b = generate(g);
  CHECK(a.source_lines == b.source_lines);
  CHECK(a.target_lines == b.target_lines);
  g.seed = 43;
  CHECK(generate(g).source_lines != a.source_lines);
}

TEST_CASE("segments respect the requested shape") {
  GeneratorSpec g;
  g.segment_count = 500;
  g.min_length = 3;
  g.max_length = 5;
  const auto c = generate(g);
  REQUIRE(c.source_lines.size() == 500);
  for (std::size_t i = 0; i < c.source_lines.size(); ++i) {
    const auto s = tokenize(c.source_lines[i]);
    const auto t = tokenize(c.target_lines[i]);
    CHECK(s.size() == t.size());
    CHECK(s.size() >= 3);
    CHECK(s.size() <= 5);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(t[k] == "t" + s[k].substr(1));
  }
}

TEST_CASE("a many-to-one lexicon folds source words") {
  GeneratorSpec g;
  g.lexicon = LexiconKind::many_to_one;
  g.source_vocab = 100;
  g.target_vocab = 50;
  g.segment_count = 50;
  const auto c = generate(g);
  for (std::size_t i = 0; i < c.source_lines.size(); ++i) {
    const auto s = tokenize(c.source_lines[i]);
    const auto t = tokenize(c.target_lines[i]);
    for (std::size_t k = 0; k < s.size(); ++k)
      CHECK(t[k] == "t" + std::to_string(std::stoul(s[k].substr(1)) / 2));
  }
}

TEST_CASE("planted compounds translate to their target as one word") {
  GeneratorSpec g;
  g.segment_count = 400;
  g.planted_count = 3;
  g.planted_rate = 0.2;
  g.seed = 7;
  const auto c = generate(g);
  REQUIRE(c.ground_truth.size() == 3);
  std::map<std::string, std::size_t> bigrams, targets;
  for (std::size_t i = 0; i < c.source_lines.size(); ++i) {
    const auto s = tokenize(c.source_lines[i]);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) ++bigrams[s[k] + " " + s[k + 1]];
    for (const auto& w : tokenize(c.target_lines[i])) ++targets[w];
  }
  for (const auto& p : c.ground_truth) {
    CHECK(p.x != p.y);
    CHECK(targets[p.target] > 0);
    CHECK(bigrams[p.x + " " + p.y] >= targets[p.target]);
  }
}

TEST_CASE("planted gapped compounds carry their filler") {
  GeneratorSpec g;
  g.planted_count = 2;
  g.planted_gapped = 1;
  g.function_words = 2;
  const auto c = generate(g);
  CHECK(c.ground_truth[0].filler == std::optional<std::string>("fs0"));
  CHECK_FALSE(c.ground_truth[1].filler);
  CHECK(planted_surface(c.ground_truth[0]) == c.ground_truth[0].x + "_fs0_" + c.ground_truth[0].y);
  CHECK(c.source_function_words == std::vector<std::string>{"fs0", "fs1"});
  CHECK(c.target_function_words == std::vector<std::string>{"ft0", "ft1"});
}

TEST_CASE("explicit planted compounds are honoured") {
  GeneratorSpec g;
  g.planted = {{"s1", "s2", "kick", std::nullopt}};
  g.planted_rate = 0.3;
  const auto c = generate(g);
  REQUIRE(c.ground_truth.size() == 1);
  bool seen = false;
  for (const auto& l : c.target_lines) seen = seen || l.find("kick") != std::string::npos;
  CHECK(seen);
}

TEST_CASE("invalid specs are rejected") {
  auto bad = [](auto edit) {
    GeneratorSpec g;
    edit(g);
    CHECK_THROWS_AS(generate(g), SpecError);
  };
  bad([](GeneratorSpec& g) { g.source_vocab = 0; });
  bad([](GeneratorSpec& g) { g.min_length = 6; g.max_length = 5; });
  bad([](GeneratorSpec& g) { g.target_vocab = 200; });
  bad([](GeneratorSpec& g) { g.noise_rate = 1.5; });
  bad([](GeneratorSpec& g) { g.planted_count = 1; g.planted_gapped = 2; });
  bad([](GeneratorSpec& g) { g.planted_count = 1; g.planted_gapped = 1; });
  bad([](GeneratorSpec& g) { g.planted_count = 200; });
  bad([](GeneratorSpec& g) { g.planted = {{"s1", "s2", "a", {}}, {"s2", "s3", "b", {}}}; });
  bad([](GeneratorSpec& g) { g.planted = {{"s1", "s1", "a", {}}}; });
  bad([](GeneratorSpec& g) { g.planted = {{"s1", "s999", "a", {}}}; });
  bad([](GeneratorSpec& g) { g.planted = {{"s1", "zz", "a", {}}}; });
  bad([](GeneratorSpec& g) { g.planted = {{"s1", "s2", "", {}}}; });
  bad([](GeneratorSpec& g) { g.planted = {{"s1", "s2", "a", "fs9"}}; g.function_words = 2; });
}

TEST_CASE("ground truth is written one compound per row") {
  std::vector<PlantedNcc> truth{{"s1", "s2", "p0", std::nullopt}, {"s3", "s4", "p1", "fs0"}};
  std::ostringstream out;
  write_ground_truth(truth, out);
  CHECK(out.str() == "x\ty\tfiller\ttarget\ns1\ts2\t\tp0\ns3\ts4\tfs0\tp1\n");
}

TEST_CASE("nothing planted, nothing discovered") {
  GeneratorSpec g;
  g.segment_count = 600;
  g.source_vocab = g.target_vocab = 80;
  g.seed = 12;
  const auto c = generate(g);
  DiscoveryConfig cfg;
  cfg.max_iterations = 2;
  cfg.function_words[0] = c.source_function_words;
  cfg.function_words[1] = c.target_function_words;
  for (auto kind : {ObjectiveKind::I, ObjectiveKind::V}) {
    cfg.objective = kind;
    CHECK(run_discovery(c.bitext(), cfg).state.ncc_list.empty());
  }
}
