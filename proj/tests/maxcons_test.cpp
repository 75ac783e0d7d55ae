#include <gtest/gtest.h>

#include <dop/maxcons.hpp>
#include <dop/reduction.hpp>
#include <dop/transform.hpp>

#include "support.hpp"

using namespace dop;

namespace
{
  const Sentence xx{"x", "x"};

  template <typename F>
  void expect_error(ErrorCode code, F&& f)
  {
    try {
      f();
      ADD_FAILURE() << "no error raised";
    } catch (const Error& error) {
      EXPECT_EQ(error.code(), code) << error.what();
    }
  }

  // sum of best-label posteriors over the nodes of a produced tree
  template <typename Value>
  Value tree_score(const PosteriorTable<Value>& g, const Tree& tree)
  {
    Value total(0);
    std::size_t position = 1;
    auto walk = [&](auto& self, const Tree& node) -> std::pair<std::size_t, std::size_t> {
      if (node.is_terminal()) {
        const std::size_t s = position ++;
        return {s, s};
      }
      std::size_t first = 0, last = 0;
      for (const auto& child : node.children) {
        const auto [s, t] = self(self, child);
        if (! first)
          first = s;
        last = t;
      }
      if (node.label != unlabeled)
        total += g.get(first, last, node.label);
      return {first, last};
    };
    walk(walk, tree);
    return total;
  }
}

TEST(MaximumConstituents, Figure3ExactPath)
{
  const auto g = stsg::to_table(stsg::oracle_posteriors(fixtures::figure3(), xx), 2);
  const auto result = maximum_constituents_parse(g, xx);
  EXPECT_EQ(result.score, 2);
  EXPECT_EQ(write_penn(result.tree), "(S (A x) (B x))");
}

TEST(MaximumConstituents, Figure3FloatPath)
{
  const auto g = posteriors(encode_stsg(fixtures::figure3()), xx);
  const auto result = maximum_constituents_parse(g, xx);
  EXPECT_NEAR(result.score, 2.0, 1e-12);
  EXPECT_EQ(write_penn(result.tree), "(S (A x) (B x))");
}

TEST(MaximumConstituents, ResultNeedNotBeDerivable)
{
  const auto distribution = stsg::tree_distribution(stsg::enumerate_derivations(fixtures::figure3(), xx));
  EXPECT_FALSE(distribution.count("(S (A x) (B x))"));
}

TEST(MaximumConstituents, Figure1RecoversTrainingTree)
{
  const auto grammar = reduce({fixtures::figure1()});
  const auto result = maximum_constituents_parse(posteriors(grammar, fixtures::figure1_sentence()),
                                                 fixtures::figure1_sentence());
  // four constituents, each certain
  EXPECT_NEAR(result.score, 4.0, 1e-12);
  EXPECT_EQ(write_penn(result.tree), fixtures::figure1_text);
}

TEST(MaximumConstituents, MatchesBruteForceOnRandomTables)
{
  fixtures::CorpusGenerator generator(61);
  const std::vector<std::string> labels{"A", "B", "C"};
  for (int i = 0; i != 200; ++ i) {
    const std::size_t n = generator.uniform(1, 8);
    PosteriorTable<double> g(n, labels);
    for (std::size_t s = 1; s <= n; ++ s)
      for (std::size_t t = s; t <= n; ++ t)
        for (std::size_t l = 0; l != labels.size(); ++ l)
          if (generator.chance(0.5))
            g.at(s, t, l) = std::uniform_real_distribution<double>(0.0, 1.0)(generator.rng());
    const Sentence sentence = generator.sentence(n);
    const auto result = maximum_constituents_parse(g, sentence);
    EXPECT_NEAR(result.score, fixtures::brute_force_maxcons(g), 1e-12);
    EXPECT_NEAR(tree_score(g, result.tree), result.score, 1e-12);
    EXPECT_EQ(yield_of(result.tree), sentence);
  }
}

TEST(MaximumConstituents, MatchesBruteForceExactly)
{
  fixtures::CorpusGenerator generator(67);
  const std::vector<std::string> labels{"A", "B"};
  for (int i = 0; i != 50; ++ i) {
    const std::size_t n = generator.uniform(1, 6);
    PosteriorTable<Rational> g(n, labels);
    for (std::size_t s = 1; s <= n; ++ s)
      for (std::size_t t = s; t <= n; ++ t)
        for (std::size_t l = 0; l != labels.size(); ++ l)
          g.at(s, t, l) = Rational(static_cast<long>(generator.uniform(0, 6)), 7);
    const auto result = maximum_constituents_parse(g, generator.sentence(n));
    EXPECT_EQ(result.score, fixtures::brute_force_maxcons(g));
    EXPECT_EQ(tree_score(g, result.tree), result.score);
  }
}

TEST(MaximumConstituents, MatchesBruteForceOnGrammarPosteriors)
{
  fixtures::CorpusGenerator generator(71);
  for (int i = 0; i != 40; ++ i) {
    const auto trees = generator.corpus();
    const auto sentence = yield_of(trees[0]);
    const auto g = posteriors(reduce(trees), sentence);
    const auto result = maximum_constituents_parse(g, sentence);
    EXPECT_NEAR(result.score, fixtures::brute_force_maxcons(g), 1e-12);
  }
}

TEST(MaximumConstituents, ZeroPosteriorSpans)
{
  const std::vector<std::string> labels{"A"};
  PosteriorTable<double> g(3, labels);
  g.at(1, 1, 0) = 0.5;
  const auto result = maximum_constituents_parse(g, {"a", "b", "c"});
  // ties on the split go to the smallest one
  EXPECT_EQ(write_penn(result.tree), "(X? (A a) (X? b c))");
  EXPECT_EQ(result.score, 0.5);

  PosteriorTable<double> single(1, labels);
  EXPECT_EQ(write_penn(maximum_constituents_parse(single, {"w"}).tree), "(X? w)");
}

TEST(MaximumConstituents, LabelTiesGoToSmallestLabel)
{
  const std::vector<std::string> labels{"NP", "AP", "VP"};
  PosteriorTable<double> g(2, labels);
  g.at(1, 2, *g.label_index("VP")) = 0.5;
  g.at(1, 2, *g.label_index("AP")) = 0.5;
  g.at(1, 1, *g.label_index("NP")) = 0.25;
  g.at(2, 2, *g.label_index("NP")) = 0.25;
  const auto result = maximum_constituents_parse(g, {"a", "b"});
  EXPECT_EQ(write_penn(result.tree), "(AP (NP a) (NP b))");
}

TEST(MaximumConstituents, Errors)
{
  PosteriorTable<double> g(2, {"A"});
  expect_error(ErrorCode::YieldMismatch, [&] { maximum_constituents_parse(g, {"a"}); });
  PosteriorTable<double> empty(0, {"A"});
  expect_error(ErrorCode::ZeroLength, [&] { maximum_constituents_parse(empty, {}); });
}

TEST(Fallback, Shapes)
{
  EXPECT_EQ(write_penn(fallback_parse({"w"})), "(X? w)");
  EXPECT_EQ(write_penn(fallback_parse({"a", "b", "c"})), "(X? a (X? b c))");
  EXPECT_EQ(write_penn(fallback_parse({"a", "b", "."})), "(TOP (X? a b) .)");
  EXPECT_EQ(write_penn(fallback_parse({"a", "."})), "(TOP a .)");
  EXPECT_EQ(write_penn(fallback_parse({"a", "!"}, {"!"})), "(TOP a !)");
  EXPECT_EQ(write_penn(fallback_parse({"."})), "(X? .)");
  expect_error(ErrorCode::ZeroLength, [] { fallback_parse({}); });
}

TEST(Fallback, YieldPreservedAndBinary)
{
  fixtures::CorpusGenerator generator(73);
  for (int i = 0; i != 50; ++ i) {
    auto sentence = generator.sentence(generator.uniform(1, 12));
    if (generator.chance(0.5))
      sentence.push_back(".");
    const Tree tree = fallback_parse(sentence);
    EXPECT_EQ(yield_of(tree), sentence);
    EXPECT_TRUE(is_binary_form(tree));
  }
}

TEST(ParseSentence, MaxconsOrFallback)
{
  const auto grammar = reduce({fixtures::figure1()});
  const auto parsed = parse_sentence(grammar, fixtures::figure1_sentence());
  EXPECT_EQ(parsed.method, ParseMethod::Maxcons);
  EXPECT_EQ(write_penn(parsed.tree), fixtures::figure1_text);

  const auto fallback = parse_sentence(grammar, {"PN", "CAT", "."});
  EXPECT_EQ(fallback.method, ParseMethod::Fallback);
  EXPECT_EQ(write_penn(fallback.tree), "(TOP (X? PN CAT) .)");

  expect_error(ErrorCode::ZeroLength, [&] { parse_sentence(grammar, {}); });
}

TEST(MaximumConstituents, SingleWord)
{
  PosteriorTable<double> g(1, {"A"});
  g.at(1, 1, 0) = 1.0;
  const auto result = maximum_constituents_parse(g, {"x"});
  EXPECT_EQ(write_penn(result.tree), "(A x)");
  EXPECT_EQ(result.score, 1.0);
}

TEST(MaxcTable, MonotoneInEveryCell)
{
  fixtures::CorpusGenerator generator(89);
  for (int i = 0; i != 50; ++ i) {
    const std::size_t n = generator.uniform(1, 10);
    PosteriorTable<double> g(n, {"A", "B"});
    for (std::size_t s = 1; s <= n; ++ s)
      for (std::size_t t = s; t <= n; ++ t)
        for (std::size_t l = 0; l != 2; ++ l)
          g.at(s, t, l) = std::uniform_real_distribution<double>(0.0, 1.0)(generator.rng());
    const auto table = fill_maxc(g);
    for (std::size_t s = 1; s <= n; ++ s)
      for (std::size_t t = s + 1; t <= n; ++ t) {
        double best = 0;
        for (std::size_t r = s; r < t; ++ r) {
          EXPECT_GE(table.score(s, t), table.score(s, r) + table.score(r + 1, t));
          best = std::max(best, table.score(s, r) + table.score(r + 1, t));
        }
        EXPECT_EQ(table.score(s, t), table.label_score(s, t) + best);
        EXPECT_GE(table.split(s, t), s);
        EXPECT_LT(table.split(s, t), t);
      }
  }
}
