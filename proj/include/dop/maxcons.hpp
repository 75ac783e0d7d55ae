// -*- mode: c++ -*-

#ifndef DOP_MAXCONS_HPP
#define DOP_MAXCONS_HPP

// Maximum Constituents parse: the binary bracketing that maximizes the
// expected number of correct labeled constituents under g(s,t,L).
//
//   maxc[s][s] = max_L g(s,s,L)
//   maxc[s][t] = max_L g(s,t,L) + max_{s<=r<t} (maxc[s][r] + maxc[r+1][t])
//
// The result need not be derivable by the grammar.

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include <dop/chart.hpp>
#include <dop/error.hpp>
#include <dop/posterior.hpp>
#include <dop/tree.hpp>

namespace dop
{
  // label for spans no grammar constituent covers
  inline const std::string unlabeled = "X?";

  template <typename Value>
  class MaxcTable
  {
  public:
    explicit MaxcTable(std::size_t n)
      : n_(n), score_(n * n, Value(0)), label_(n * n, unlabeled), label_score_(n * n, Value(0)), split_(n * n, 0) {}

    std::size_t length() const { return n_; }

    Value& score(std::size_t s, std::size_t t) { return score_[index(s, t)]; }
    const Value& score(std::size_t s, std::size_t t) const { return score_[index(s, t)]; }
    std::string& label(std::size_t s, std::size_t t) { return label_[index(s, t)]; }
    const std::string& label(std::size_t s, std::size_t t) const { return label_[index(s, t)]; }
    Value& label_score(std::size_t s, std::size_t t) { return label_score_[index(s, t)]; }
    const Value& label_score(std::size_t s, std::size_t t) const { return label_score_[index(s, t)]; }
    std::size_t& split(std::size_t s, std::size_t t) { return split_[index(s, t)]; }
    std::size_t split(std::size_t s, std::size_t t) const { return split_[index(s, t)]; }

  private:
    std::size_t index(std::size_t s, std::size_t t) const { return (s - 1) * n_ + (t - 1); }

    std::size_t              n_;
    std::vector<Value>       score_;
    std::vector<std::string> label_;
    std::vector<Value>       label_score_;
    std::vector<std::size_t> split_;
  };

  template <typename Value>
  struct MaxconsResult
  {
    Tree             tree;
    Value            score;
    MaxcTable<Value> table;
  };

  template <typename Value>
  MaxcTable<Value> fill_maxc(const PosteriorTable<Value>& g)
  {
    const std::size_t n = g.length();
    if (n == 0)
      throw Error(ErrorCode::ZeroLength, "cannot bracket an empty sentence");
    MaxcTable<Value> table(n);
    const auto& labels = g.labels();

    // labels are sorted, so the first strict maximum is the smallest tied label
    auto best_label = [&](std::size_t s, std::size_t t) {
      for (std::size_t l = 0; l != labels.size(); ++ l)
        if (g.at(s, t, l) > table.label_score(s, t)) {
          table.label_score(s, t) = g.at(s, t, l);
          table.label(s, t) = labels[l];
        }
    };

    for (std::size_t s = 1; s <= n; ++ s) {
      best_label(s, s);
      table.score(s, s) = table.label_score(s, s);
    }
    for (std::size_t length = 2; length <= n; ++ length)
      for (std::size_t s = 1; s + length - 1 <= n; ++ s) {
        const std::size_t t = s + length - 1;
        best_label(s, t);
        Value best_split = table.score(s, s) + table.score(s + 1, t);
        table.split(s, t) = s;
        for (std::size_t r = s + 1; r < t; ++ r) {
          Value candidate = table.score(s, r) + table.score(r + 1, t);
          if (candidate > best_split) {
            best_split = candidate;
            table.split(s, t) = r;
          }
        }
        table.score(s, t) = table.label_score(s, t) + best_split;
      }
    return table;
  }

  template <typename Value>
  Tree bracketing_from(const MaxcTable<Value>& table, const Sentence& sentence, std::size_t s, std::size_t t)
  {
    if (s == t) {
      if (table.label_score(s, s) > Value(0))
        return Tree::node(table.label(s, s), {Tree::leaf(sentence[s - 1])});
      return Tree::leaf(sentence[s - 1]);
    }
    const std::size_t r = table.split(s, t);
    return Tree::node(table.label(s, t),
                      {bracketing_from(table, sentence, s, r), bracketing_from(table, sentence, r + 1, t)});
  }

  template <typename Value>
  MaxconsResult<Value> maximum_constituents_parse(const PosteriorTable<Value>& g, const Sentence& sentence)
  {
    if (sentence.size() != g.length())
      throw Error(ErrorCode::YieldMismatch, "posterior table and sentence lengths differ");
    auto table = fill_maxc(g);
    Tree tree = bracketing_from(table, sentence, 1, sentence.size());
    if (! tree.is_internal())
      tree = Tree::node(unlabeled, {std::move(tree)});
    Value score = table.score(1, sentence.size());
    return {std::move(tree), std::move(score), std::move(table)};
  }

  inline const std::set<std::string>& default_final_punctuation()
  {
    static const std::set<std::string> punctuation{"."};
    return punctuation;
  }

  namespace detail
  {
    inline Tree right_branching(const Sentence& sentence, std::size_t first, std::size_t last)
    {
      if (first + 1 == last)
        return Tree::leaf(sentence[first]);
      return Tree::node(unlabeled, {Tree::leaf(sentence[first]), right_branching(sentence, first + 1, last)});
    }
  }

  // Right-branching with sentence-final punctuation attached at the top:
  // (TOP (X? w1 (X? w2 ...)) .)
  inline Tree fallback_parse(const Sentence& sentence,
                             const std::set<std::string>& punctuation = default_final_punctuation())
  {
    const std::size_t n = sentence.size();
    if (n == 0)
      throw Error(ErrorCode::ZeroLength, "cannot bracket an empty sentence");
    if (n == 1)
      return Tree::node(unlabeled, {Tree::leaf(sentence[0])});
    if (punctuation.count(sentence.back()))
      return Tree::node("TOP", {detail::right_branching(sentence, 0, n - 1), Tree::leaf(sentence.back())});
    return detail::right_branching(sentence, 0, n);
  }

  enum class ParseMethod { Maxcons, Fallback };

  inline std::string_view to_string(ParseMethod method)
  {
    return method == ParseMethod::Maxcons ? "maxcons" : "fallback";
  }

  struct ParseOutcome
  {
    Tree        tree;
    ParseMethod method = ParseMethod::Fallback;
    double      score  = 0;
  };

  struct ParseOptions
  {
    std::set<std::string> final_punctuation = default_final_punctuation();
  };

  inline ParseOutcome parse_sentence(const Pcfg& grammar, const Sentence& sentence, const ParseOptions& options = {})
  {
    if (sentence.empty())
      throw Error(ErrorCode::ZeroLength, "cannot parse an empty sentence");
    const auto e = inside(grammar, sentence);
    if (! e.parsable())
      return {fallback_parse(sentence, options.final_punctuation), ParseMethod::Fallback, 0.0};
    const auto f = outside(grammar, sentence, e);
    auto result = maximum_constituents_parse(posteriors(e, f), sentence);
    return {std::move(result.tree), ParseMethod::Maxcons, result.score};
  }
}

#endif
