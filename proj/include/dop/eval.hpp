// -*- mode: c++ -*-

#ifndef DOP_EVAL_HPP
#define DOP_EVAL_HPP

// Evaluation protocol: seeded train/test splits, crossing-bracket and
// exact-match scoring, paired t-tests over runs, and the unique-production
// coverage analysis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/hypergeometric.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <dop/error.hpp>
#include <dop/transform.hpp>
#include <dop/tree.hpp>

namespace dop
{
  // ------------------------------------------------------------------
  // portable randomness: the engine is fully specified by the standard and
  // the bounded draw and shuffle below do not depend on library internals

  inline std::uint64_t splitmix64(std::uint64_t& state)
  {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  class SplitRng
  {
  public:
    SplitRng(std::uint64_t seed, std::uint64_t stream)
    {
      std::uint64_t state = seed ^ (stream * 0xd1b54a32d192ed03ULL);
      engine_.seed(splitmix64(state));
    }

    // uniform on [0, bound), by rejection
    std::uint64_t below(std::uint64_t bound)
    {
      const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
      for (;;) {
        const std::uint64_t x = engine_();
        if (x < limit)
          return x % bound;
      }
    }

    template <typename T>
    void shuffle(std::vector<T>& items)
    {
      for (std::size_t i = items.size(); i > 1; -- i)
        std::swap(items[i - 1], items[below(i)]);
    }

  private:
    std::mt19937_64 engine_;
  };

  // ------------------------------------------------------------------
  // splits

  struct SplitConfig
  {
    std::size_t                train      = 700;
    std::size_t                test       = 88;
    std::optional<std::size_t> max_length = 30;
    std::size_t                runs       = 10;
    std::uint64_t              seed       = 0;
  };

  struct Split
  {
    std::vector<Tree>        train;
    std::vector<Tree>        test;
    std::vector<std::size_t> train_index;  // corpus positions
    std::vector<std::size_t> test_index;
  };

  // Shuffle, take the test set then the training set, then drop sentences
  // over the length limit from both.
  inline Split random_split(const std::vector<Tree>& corpus, const SplitConfig& config, std::size_t run)
  {
    if (config.runs == 0)
      throw Error(ErrorCode::Usage, "number of runs must be at least 1");
    if (config.train + config.test > corpus.size())
      throw Error(ErrorCode::CorpusTooSmall, "corpus has " + std::to_string(corpus.size()) + " trees, split needs "
                                                 + std::to_string(config.train + config.test));
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    SplitRng rng(config.seed, run);
    rng.shuffle(order);

    auto keep = [&](std::size_t index) {
      return ! config.max_length || yield_of(corpus[index]).size() <= *config.max_length;
    };
    Split split;
    for (std::size_t i = 0; i != config.test + config.train; ++ i) {
      const std::size_t index = order[i];
      if (! keep(index))
        continue;
      auto& trees = i < config.test ? split.test : split.train;
      auto& positions = i < config.test ? split.test_index : split.train_index;
      trees.push_back(corpus[index]);
      positions.push_back(index);
    }
    return split;
  }

  // ------------------------------------------------------------------
  // bracket scoring

  struct CrossingOptions
  {
    bool count_root         = false;
    bool count_single_words = false;
  };

  struct CrossingCount
  {
    std::size_t crossing     = 0;  // counted candidate constituents crossing some gold constituent
    std::size_t constituents = 0;  // counted candidate constituents
  };

  inline bool spans_cross(const Span& a, const Span& b)
  {
    return (a.begin < b.begin && b.begin <= a.end && a.end < b.end)
        || (b.begin < a.begin && a.begin <= b.end && b.end < a.end);
  }

  namespace detail
  {
    inline void require_same_yield(const Tree& candidate, const Tree& gold)
    {
      if (yield_of(candidate) != yield_of(gold))
        throw Error(ErrorCode::YieldMismatch, "candidate and gold trees cover different strings: " + write_penn(candidate)
                                                  + " vs " + write_penn(gold));
    }
  }

  inline CrossingCount crossing_brackets(const Tree& candidate, const Tree& gold, const CrossingOptions& options = {})
  {
    detail::require_same_yield(candidate, gold);
    const std::size_t n = yield_of(gold).size();
    const auto gold_spans = constituent_spans(gold);
    CrossingCount count;
    for (const auto& span : constituent_spans(candidate)) {
      if (! options.count_root && span.begin == 1 && span.end == n)
        continue;
      if (! options.count_single_words && span.length() == 1)
        continue;
      ++ count.constituents;
      if (std::any_of(gold_spans.begin(), gold_spans.end(), [&](const Span& g) { return spans_cross(span, g); }))
        ++ count.crossing;
    }
    return count;
  }

  // number of (a-node, b-node) pairs whose spans cross; symmetric in a and b
  inline std::size_t crossing_pairs(const Tree& a, const Tree& b)
  {
    detail::require_same_yield(a, b);
    const auto b_spans = constituent_spans(b);
    std::size_t pairs = 0;
    for (const auto& x : constituent_spans(a))
      for (const auto& y : b_spans)
        pairs += spans_cross(x, y);
    return pairs;
  }

  enum class MatchMode { Strict, Loose };

  inline std::string_view to_string(MatchMode mode) { return mode == MatchMode::Strict ? "strict" : "loose"; }

  // strict: labels and brackets of the binarized trees agree; loose: agree
  // once the symbols introduced by binarization are spliced out
  inline bool exact_match(const Tree& candidate, const Tree& gold, MatchMode mode = MatchMode::Strict)
  {
    detail::require_same_yield(candidate, gold);
    if (mode == MatchMode::Strict)
      return candidate == gold;
    return strip_introduced(candidate) == strip_introduced(gold);
  }

  struct RunMetrics
  {
    std::size_t sentences               = 0;
    std::size_t constituents            = 0;
    std::size_t crossing_constituents   = 0;
    std::size_t zero_crossing_sentences = 0;
    std::size_t exact_matches           = 0;
    std::size_t fallbacks               = 0;

    // with no countable constituents nothing can cross, so the rate is 100
    double crossing_rate() const
    {
      return constituents ? 100.0 * static_cast<double>(constituents - crossing_constituents) / static_cast<double>(constituents)
                          : 100.0;
    }
    double zero_crossing_rate() const { return percent(zero_crossing_sentences); }
    double exact_match_rate() const { return percent(exact_matches); }

    void add(const Tree& candidate, const Tree& gold, const CrossingOptions& crossing, MatchMode mode)
    {
      const auto count = crossing_brackets(candidate, gold, crossing);
      ++ sentences;
      constituents += count.constituents;
      crossing_constituents += count.crossing;
      zero_crossing_sentences += count.crossing == 0;
      exact_matches += exact_match(candidate, gold, mode);
    }

  private:
    double percent(std::size_t count) const
    {
      if (! sentences)
        throw Error(ErrorCode::EmptyCorpus, "no test sentences to score");
      return 100.0 * static_cast<double>(count) / static_cast<double>(sentences);
    }
  };

  // ------------------------------------------------------------------
  // statistics

  struct Summary
  {
    double min    = 0;
    double max    = 0;
    double range  = 0;
    double mean   = 0;
    double stddev = 0;  // sample standard deviation; 0 for a single value
  };

  inline Summary summarize(const std::vector<double>& values)
  {
    if (values.empty())
      throw Error(ErrorCode::EmptyCorpus, "no values to summarize");
    Summary out;
    out.min = *std::min_element(values.begin(), values.end());
    out.max = *std::max_element(values.begin(), values.end());
    out.range = out.max - out.min;
    double sum = 0;
    for (double v : values)
      sum += v;
    const double n = static_cast<double>(values.size());
    out.mean = sum / n;
    if (values.size() > 1) {
      double squares = 0;
      for (double v : values)
        squares += (v - out.mean) * (v - out.mean);
      out.stddev = std::sqrt(squares / (n - 1));
    }
    return out;
  }

  struct TTest
  {
    double      mean         = 0;
    double      stddev       = 0;
    std::size_t n            = 0;
    double      t            = 0;
    std::size_t df           = 0;
    double      p            = 1;  // two-sided
    double      significance = 0;  // 1 - p
  };

  inline TTest t_from_summary(double mean, double stddev, std::size_t n)
  {
    if (n < 2)
      throw Error(ErrorCode::DegenerateVariance, "a t-test needs at least two runs");
    if (! (stddev > 0))
      throw Error(ErrorCode::DegenerateVariance, "paired differences have zero variance");
    TTest out;
    out.mean = mean;
    out.stddev = stddev;
    out.n = n;
    out.df = n - 1;
    out.t = mean / (stddev / std::sqrt(static_cast<double>(n)));
    const boost::math::students_t distribution(static_cast<double>(out.df));
    out.p = 2 * boost::math::cdf(boost::math::complement(distribution, std::abs(out.t)));
    out.significance = 1 - out.p;
    return out;
  }

  inline TTest paired_t_test(const std::vector<double>& differences)
  {
    if (differences.size() < 2)
      throw Error(ErrorCode::DegenerateVariance, "a t-test needs at least two runs");
    const auto summary = summarize(differences);
    return t_from_summary(summary.mean, summary.stddev, differences.size());
  }

  // ------------------------------------------------------------------
  // coverage

  struct CoverageOptions
  {
    BinarizationScheme    scheme         = BinarizationScheme::Correct;
    bool                  retain_unary   = false;
    std::size_t           test_size      = 75;
    bool                  hypergeometric = false;
    std::set<std::string> empty_markers  = default_empty_markers();
  };

  struct CoverageResult
  {
    std::size_t sentences        = 0;
    std::size_t unique_sentences = 0;  // sentences with a production found in no other sentence
    double      p                = 1;  // generatable fraction
    double      prob_one         = 0;  // one ungeneratable sentence in a test set of test_size
  };

  inline std::string production_of(const Tree& node)
  {
    std::string out = node.label + " ->";
    for (const auto& child : node.children)
      out += " " + child.label;
    return out;
  }

  inline std::set<std::string> productions(const Tree& tree)
  {
    std::set<std::string> out;
    auto walk = [&](auto& self, const Tree& node) -> void {
      if (! node.is_internal())
        return;
      out.insert(production_of(node));
      for (const auto& child : node.children)
        self(self, child);
    };
    walk(walk, tree);
    return out;
  }

  // m p^(m-1) (1-p)
  inline double probability_one_ungeneratable(double p, std::size_t m)
  {
    if (m == 0)
      return 0.0;
    return static_cast<double>(m) * std::pow(p, static_cast<double>(m - 1)) * (1 - p);
  }

  // the same event drawing m of the corpus sentences without replacement
  inline double probability_one_ungeneratable_exact(std::size_t unique, std::size_t sentences, std::size_t m)
  {
    if (m > sentences)
      throw Error(ErrorCode::CorpusTooSmall, "test size exceeds the corpus");
    if (unique == 0)
      return 0.0;
    const boost::math::hypergeometric_distribution<double> distribution(static_cast<unsigned>(unique),
                                                                        static_cast<unsigned>(m),
                                                                        static_cast<unsigned>(sentences));
    if (1 < boost::math::range(distribution).first || 1 > boost::math::range(distribution).second)
      return 0.0;
    return boost::math::pdf(distribution, 1u);
  }

  inline CoverageResult coverage_of(const std::vector<Tree>& prepared, std::size_t test_size, bool hypergeometric)
  {
    if (prepared.empty())
      throw Error(ErrorCode::EmptyCorpus, "coverage analysis of an empty corpus");
    std::vector<std::set<std::string>> sets;
    std::map<std::string, std::size_t> sentence_count;
    for (const auto& tree : prepared) {
      sets.push_back(productions(tree));
      for (const auto& production : sets.back())
        ++ sentence_count[production];
    }
    CoverageResult out;
    out.sentences = prepared.size();
    for (const auto& set : sets)
      out.unique_sentences += std::any_of(set.begin(), set.end(), [&](const std::string& p) { return sentence_count[p] == 1; });
    out.p = 1 - static_cast<double>(out.unique_sentences) / static_cast<double>(out.sentences);
    out.prob_one = hypergeometric ? probability_one_ungeneratable_exact(out.unique_sentences, out.sentences, test_size)
                                  : probability_one_ungeneratable(out.p, test_size);
    return out;
  }

  inline CoverageResult coverage_analysis(const std::vector<Tree>& corpus, const CoverageOptions& options = {})
  {
    PreprocessOptions preprocess_options;
    preprocess_options.scheme = options.scheme;
    preprocess_options.retain_unary = options.retain_unary;
    preprocess_options.empty_markers = options.empty_markers;
    return coverage_of(preprocess(corpus, preprocess_options), options.test_size, options.hypergeometric);
  }
}

#endif
