#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "ncc/bible.hpp"
#include "ncc/errors.hpp"
#include "ncc/synthgen.hpp"

using namespace ncc;

namespace {

Bitext balance_sheet_bitext() {
  return bitext_from_lines(std::vector<std::string>{"balance", "sheet", "balance sheet"},
                           std::vector<std::string>{"équilibre", "feuille", "bilan"});
}

NccEntry balance_sheet() {
  NccEntry e;
  e.compound = Compound{{"balance", "sheet"}, std::nullopt};
  e.side = Side::source;
  e.validated_at = 1;
  e.key = BigramKey{"balance", "sheet", 0};
  return e;
}

// Every source word of `text` translates to the single target word `w`.
TranslationModel constant_model(const Bitext& text, const std::string& w) {
  auto tv = std::make_shared<Vocabulary>();
  const TokenId t = tv->intern(w);
  std::vector<JointEntry> counts;
  for (TokenId s = 0; s < text.vocab(Side::source).size(); ++s) counts.push_back({s, t, 1.0, 0.0});
  return TranslationModel::from_counts(text.vocab_ptr(Side::source), tv, std::move(counts));
}

}  // namespace

TEST_CASE("balance sheet: the correct model translates every segment exactly") {
  const Bitext text = balance_sheet_bitext();
  const std::vector<NccEntry> list{balance_sheet()};
  const Bitext fused = apply_nccs(text, list, {});
  const auto model = induce_model(fused).model;
  const auto s = evaluate(model, text, list, Direction::e_to_f);
  CHECK(s.a == 3);
  CHECK(s.b == 3);
  CHECK(s.c == 3);
  CHECK(s.f == doctest::Approx(1.0));
}

TEST_CASE("balance sheet without the compound loses the bilan segment") {
  const Bitext text = balance_sheet_bitext();
  const auto model = induce_model(text).model;
  const auto s = evaluate(model, text, {}, Direction::e_to_f);
  CHECK(s.b == 3);
  CHECK(s.c < 3);
  CHECK(s.f < 1.0);
}

TEST_CASE("self-translation of a bijective corpus is perfect") {
  GeneratorSpec g;
  g.segment_count = 300;
  g.source_vocab = g.target_vocab = 40;
  g.seed = 11;
  const Bitext text = generate(g).bitext();
  const auto model = induce_model(text).model;
  for (auto d : {Direction::e_to_f, Direction::f_to_e}) {
    const auto& m = d == Direction::e_to_f ? model : model.transposed();
    const auto s = evaluate(m, text, {}, d);
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall == doctest::Approx(1.0));
  }
}

TEST_CASE("a constant-output model scores the bag overlap of its one word") {
  std::mt19937 rng(5);
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 200; ++i) {
    std::string s, t;
    const int ls = 1 + static_cast<int>(rng() % 6), lt = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < ls; ++k) s += (k ? " w" : "w") + std::to_string(rng() % 20);
    for (int k = 0; k < lt; ++k) t += std::string(k ? " " : "") + (rng() % 3 == 0 ? "x" : "y" + std::to_string(rng() % 9));
    src.push_back(s);
    tgt.push_back(t);
  }
  const Bitext text = bitext_from_lines(src, tgt);
  const auto model = constant_model(text, "x");

  std::size_t a = 0, b = 0, c = 0, x_total = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto sw = tokenize(src[i]);
    const auto tw = tokenize(tgt[i]);
    const auto xs = static_cast<std::size_t>(std::count(tw.begin(), tw.end(), "x"));
    a += sw.size();
    b += tw.size();
    c += std::min(sw.size(), xs);
    x_total += xs;
  }
  const auto s = evaluate(model, text, {}, Direction::e_to_f);
  CHECK(s.a == a);
  CHECK(s.b == b);
  CHECK(s.c == c);
  CHECK(s.recall <= static_cast<double>(x_total) / static_cast<double>(b) + 1e-12);
}

TEST_CASE("scores stay within bounds and F is the harmonic mean") {
  GeneratorSpec g;
  g.segment_count = 400;
  g.planted_count = 4;
  g.noise_rate = 0.2;
  g.seed = 3;
  const Bitext text = generate(g).bitext();
  const auto model = induce_model(text).model;
  const auto s = evaluate(model, text, {}, Direction::e_to_f);
  CHECK(s.c <= std::min(s.a, s.b));
  CHECK(s.precision >= 0.0);
  CHECK(s.precision <= 1.0);
  CHECK(s.recall >= 0.0);
  CHECK(s.recall <= 1.0);
  CHECK(s.f == doctest::Approx(2 * s.precision * s.recall / (s.precision + s.recall)));
  const auto zero = BibleScore::from_counts(0, 0, 0);
  CHECK(zero.f == 0.0);
}

TEST_CASE("a model oriented the wrong way is rejected") {
  const Bitext text = balance_sheet_bitext();
  const auto model = induce_model(text).model;
  CHECK_THROWS_AS(evaluate(model, text, {}, Direction::f_to_e), DomainError);
  CHECK_THROWS_AS(evaluate(model.transposed(), text, {}, Direction::e_to_f), DomainError);
  CHECK_NOTHROW(evaluate(model.transposed(), text, {}, Direction::f_to_e));
}

TEST_CASE("only the NCCs of the translated side are fused") {
  const Bitext text = balance_sheet_bitext();
  const std::vector<NccEntry> list{balance_sheet()};
  const auto model = induce_model(apply_nccs(text, list, {})).model;
  const auto s = evaluate(model.transposed(), text, list, Direction::f_to_e);
  CHECK(s.a == 4);
  CHECK(s.b == 4);
  CHECK(s.c == 4);
}

TEST_CASE("unknown fused words are translated component by component") {
  const auto model = induce_model(balance_sheet_bitext()).model;
  const std::vector<std::string> in{"balance_sheet", "unseen"};
  auto out = translate_segment(model, in);
  REQUIRE(out.size() == 3);
  CHECK(out[2] == "unseen");
  std::vector<std::string> head(out.begin(), out.begin() + 2);
  for (const auto& w : head) CHECK(w != "balance_sheet");
}

TEST_CASE("worker count does not change the score") {
  GeneratorSpec g;
  g.segment_count = 600;
  g.planted_count = 5;
  g.noise_rate = 0.1;
  g.seed = 8;
  const Bitext text = generate(g).bitext();
  const auto model = induce_model(text).model;
  const auto one = evaluate(model, text, {}, Direction::e_to_f, {}, 1);
  const auto many = evaluate(model, text, {}, Direction::e_to_f, {}, 8);
  CHECK(one.a == many.a);
  CHECK(one.b == many.b);
  CHECK(one.c == many.c);
}

TEST_CASE("direction names round-trip") {
  for (auto d : {Direction::e_to_f, Direction::f_to_e}) CHECK(parse_direction(direction_name(d)) == d);
  CHECK_THROWS_AS(parse_direction("sideways"), ConfigError);
}
