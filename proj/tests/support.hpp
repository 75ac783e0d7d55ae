// -*- mode: c++ -*-
//
// Test-only fixtures, generators and brute-force oracles. Nothing here calls
// into the chart or maxcons code paths it is used to check.

#ifndef DOP_TESTS_SUPPORT_HPP
#define DOP_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <dop/grammar.hpp>
#include <dop/numeric.hpp>
#include <dop/posterior.hpp>
#include <dop/stsg.hpp>
#include <dop/tree.hpp>

namespace dop::fixtures
{
  inline const char* figure1_text = "(S (NP PN PN) (VP V (NP DET N)))";

  inline Tree figure1() { return read_tree(figure1_text); }

  inline std::vector<std::string> figure1_sentence() { return {"PN", "PN", "V", "DET", "N"}; }

  // elementary trees of the simple example grammar over "x x"
  inline const char* figure3_text =
    "%start S\n"
    "3 (S (A x) (C x))\n"
    "2 (S (A x) (D x))\n"
    "2 (S (E x) (B x))\n"
    "2 (S (E x) B)\n"
    "1 (B x)\n";

  inline stsg::ExplicitStsg figure3()
  {
    std::istringstream is(figure3_text);
    return stsg::read_stsg(is);
  }

  // ------------------------------------------------------------------
  // random binary/preterminal corpora

  struct CorpusShape
  {
    std::size_t              max_trees = 3;
    std::size_t              max_width = 5;  // terminals per tree
    std::size_t              max_nodes = 50; // across the corpus
    std::vector<std::string> labels{"S", "NP", "VP", "PP"};
    std::vector<std::string> terminals{"a", "b", "c"};
    std::string              root = "S";
    double                   preterminal_rate = 0.3;
  };

  class CorpusGenerator
  {
  public:
    CorpusGenerator(std::uint64_t seed, CorpusShape shape = {}) : rng_(seed), shape_(std::move(shape)) {}

    std::size_t uniform(std::size_t low, std::size_t high)
    {
      return std::uniform_int_distribution<std::size_t>(low, high)(rng_);
    }

    bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

    const std::string& pick(const std::vector<std::string>& items) { return items[uniform(0, items.size() - 1)]; }

    Tree tree(std::size_t width, const std::string& label)
    {
      if (width == 1)
        return Tree::node(label, {Tree::leaf(pick(shape_.terminals))});
      const std::size_t left = uniform(1, width - 1);
      return Tree::node(label, {child(left), child(width - left)});
    }

    std::vector<Tree> corpus()
    {
      for (;;) {
        std::vector<Tree> out;
        const std::size_t trees = uniform(1, shape_.max_trees);
        std::size_t nodes = 0;
        for (std::size_t i = 0; i != trees; ++ i) {
          out.push_back(tree(uniform(1, shape_.max_width), shape_.root));
          nodes += count_internal_nodes(out.back());
        }
        if (nodes <= shape_.max_nodes)
          return out;
      }
    }

    std::vector<std::string> sentence(std::size_t length)
    {
      std::vector<std::string> out;
      for (std::size_t i = 0; i != length; ++ i)
        out.push_back(pick(shape_.terminals));
      return out;
    }

    std::mt19937_64& rng() { return rng_; }

  private:
    Tree child(std::size_t width)
    {
      if (width == 1 && ! chance(shape_.preterminal_rate))
        return Tree::leaf(pick(shape_.terminals));
      return tree(width, pick(shape_.labels));
    }

    std::mt19937_64 rng_;
    CorpusShape     shape_;
  };

  // ------------------------------------------------------------------
  // brute-force PCFG derivation enumeration

  struct PcfgDerivation
  {
    Tree   tree;  // symbol names, interior @k kept
    double probability;
  };

  class PcfgEnumerator
  {
  public:
    PcfgEnumerator(const Pcfg& grammar, const std::vector<std::string>& sentence)
      : grammar_(grammar), sentence_(sentence) {}

    const std::vector<PcfgDerivation>& derive(SymbolId x, std::size_t begin, std::size_t end)
    {
      const auto key = std::make_tuple(x, begin, end);
      if (auto iter = memo_.find(key); iter != memo_.end())
        return iter->second;
      std::vector<PcfgDerivation> out;
      const std::string name = grammar_.symbols()[x].name();
      for (std::size_t index : grammar_.rules_for(x)) {
        const Rule& rule = grammar_.rules()[index];
        if (rule.arity == 1) {
          if (rule.rhs[0].terminal) {
            if (end == begin + 1 && sentence_[begin] == grammar_.terminals()[rule.rhs[0].id])
              out.push_back({Tree::node(name, {Tree::leaf(sentence_[begin])}), rule.probability});
          } else
            for (const auto& sub : derive(rule.rhs[0].id, begin, end))
              out.push_back({sub.tree, rule.probability * sub.probability});
          continue;
        }
        for (std::size_t split = begin + 1; split < end; ++ split) {
          const auto left = side(rule.rhs[0], begin, split);
          if (left.empty())
            continue;
          const auto right = side(rule.rhs[1], split, end);
          for (const auto& l : left)
            for (const auto& r : right)
              out.push_back({Tree::node(name, {l.tree, r.tree}), rule.probability * l.probability * r.probability});
        }
      }
      return memo_.emplace(key, std::move(out)).first->second;
    }

  private:
    std::vector<PcfgDerivation> side(const RhsItem& item, std::size_t begin, std::size_t end)
    {
      if (item.terminal) {
        if (end == begin + 1 && sentence_[begin] == grammar_.terminals()[item.id])
          return {{Tree::leaf(sentence_[begin]), 1.0}};
        return {};
      }
      return derive(item.id, begin, end);
    }

    const Pcfg&                                                                      grammar_;
    const std::vector<std::string>&                                                  sentence_;
    std::map<std::tuple<SymbolId, std::size_t, std::size_t>, std::vector<PcfgDerivation>> memo_;
  };

  // exterior-tree distribution of a PCFG for one sentence, by enumeration
  inline std::map<std::string, double> pcfg_tree_distribution(const Pcfg& grammar, const std::vector<std::string>& sentence)
  {
    PcfgEnumerator enumerator(grammar, sentence);
    std::map<std::string, double> out;
    // unary start rules pass the child tree through, so no TOP node appears
    for (const auto& derivation : enumerator.derive(grammar.start(), 0, sentence.size()))
      out[write_penn(erase_interior(derivation.tree))] += derivation.probability;
    return out;
  }

  // ------------------------------------------------------------------
  // per-tree probabilities, for languages too ambiguous to enumerate
  // derivations of

  // Every tree built from the corpus productions has positive probability
  // under the subtree grammar and no other tree does, so this CFG enumerates
  // the support of the tree distribution.
  class TreebankTrees
  {
  public:
    explicit TreebankTrees(const std::vector<Tree>& corpus)
    {
      for (const auto& tree : corpus) {
        roots_.insert(tree.label);
        collect(tree);
      }
    }

    std::vector<Tree> parses(const std::vector<std::string>& sentence)
    {
      sentence_ = &sentence;
      memo_.clear();
      std::vector<Tree> out;
      for (const auto& root : roots_)
        for (const auto& tree : derive(root, 0, sentence.size()))
          out.push_back(tree);
      return out;
    }

  private:
    using Production = std::vector<std::pair<bool, std::string>>;  // (terminal, symbol)

    void collect(const Tree& node)
    {
      if (! node.is_internal())
        return;
      Production production;
      for (const auto& child : node.children) {
        production.emplace_back(child.is_terminal(), child.label);
        collect(child);
      }
      productions_[node.label].insert(production);
    }

    const std::vector<Tree>& derive(const std::string& label, std::size_t begin, std::size_t end)
    {
      const auto key = std::make_tuple(label, begin, end);
      if (auto iter = memo_.find(key); iter != memo_.end())
        return iter->second;
      std::vector<Tree> out;
      if (auto iter = productions_.find(label); iter != productions_.end())
        for (const auto& production : iter->second) {
          std::vector<Tree> children;
          expand(production, 0, begin, end, children, [&] { out.push_back(Tree::node(label, children)); });
        }
      return memo_.emplace(key, std::move(out)).first->second;
    }

    template <typename Emit>
    void expand(const Production& production, std::size_t position, std::size_t begin, std::size_t end,
                std::vector<Tree>& children, Emit&& emit)
    {
      if (position == production.size()) {
        if (begin == end)
          emit();
        return;
      }
      const std::size_t remaining = production.size() - position - 1;
      if (begin + remaining >= end)
        return;
      const auto& [terminal, symbol] = production[position];
      if (terminal) {
        if ((*sentence_)[begin] == symbol) {
          children.push_back(Tree::leaf(symbol));
          expand(production, position + 1, begin + 1, end, children, emit);
          children.pop_back();
        }
        return;
      }
      // a unary chain would recurse on the same span; corpora here have none
      if (production.size() == 1)
        throw std::logic_error("unary nonterminal productions are not supported");
      for (std::size_t split = begin + 1; split + remaining <= end; ++ split)
        for (const auto& sub : derive(symbol, begin, split)) {
          children.push_back(sub);
          expand(production, position + 1, split, end, children, emit);
          children.pop_back();
        }
    }

    std::set<std::string>                                                          roots_;
    std::map<std::string, std::set<Production>>                                    productions_;
    const std::vector<std::string>*                                                sentence_ = nullptr;
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<Tree>> memo_;
  };

  // sum over derivations of one tree: at each node, every elementary tree that
  // matches from there times the values at its substitution sites
  inline Rational stsg_tree_probability(const stsg::ExplicitStsg& grammar, const Tree& tree)
  {
    std::map<const Tree*, Rational> memo;
    auto matches = [](auto& self, const Tree& fragment, const Tree& node, std::vector<const Tree*>& sites) -> bool {
      if (fragment.is_site()) {
        if (! node.is_internal() || node.label != fragment.label)
          return false;
        sites.push_back(&node);
        return true;
      }
      if (fragment.is_terminal())
        return node.is_terminal() && node.label == fragment.label;
      if (! node.is_internal() || node.label != fragment.label || node.children.size() != fragment.children.size())
        return false;
      for (std::size_t i = 0; i != node.children.size(); ++ i)
        if (! self(self, fragment.children[i], node.children[i], sites))
          return false;
      return true;
    };
    auto value = [&](auto& self, const Tree& node) -> Rational {
      if (auto iter = memo.find(&node); iter != memo.end())
        return iter->second;
      Rational total = 0;
      for (std::size_t index : grammar.rooted_at(node.label)) {
        std::vector<const Tree*> sites;
        if (! matches(matches, grammar.trees()[index].tree, node, sites))
          continue;
        Rational product = grammar.probability(index);
        for (const Tree* site : sites)
          product *= self(self, *site);
        total += product;
      }
      return memo[&node] = total;
    };
    const auto start = grammar.start().find(tree.label);
    if (start == grammar.start().end())
      return 0;
    return start->second * value(value, tree);
  }

  // sum over reduced-grammar derivations whose exterior tree is `tree`
  inline double pcfg_tree_probability(const Pcfg& grammar, const Tree& tree)
  {
    std::map<std::pair<const Tree*, SymbolId>, double> memo;
    auto value = [&](auto& self, const Tree& node, SymbolId x) -> double {
      const auto key = std::make_pair(&node, x);
      if (auto iter = memo.find(key); iter != memo.end())
        return iter->second;
      double total = 0;
      for (std::size_t index : grammar.rules_for(x)) {
        const Rule& rule = grammar.rules()[index];
        if (rule.arity != node.children.size())
          continue;
        double product = rule.probability;
        for (std::size_t i = 0; i != rule.arity && product != 0; ++ i) {
          const RhsItem& item = rule.rhs[i];
          const Tree& child = node.children[i];
          if (item.terminal)
            product *= child.is_terminal() && grammar.terminals()[item.id] == child.label ? 1.0 : 0.0;
          else if (child.is_internal() && grammar.symbols()[item.id].base == child.label)
            product *= self(self, child, item.id);
          else
            product = 0;
        }
        total += product;
      }
      return memo[key] = total;
    };
    if (! grammar.synthetic_start())
      return grammar.symbols()[grammar.start()].base == tree.label ? value(value, tree, grammar.start()) : 0.0;
    double total = 0;
    for (std::size_t index : grammar.rules_for(grammar.start())) {
      const Rule& rule = grammar.rules()[index];
      if (grammar.symbols()[rule.rhs[0].id].base == tree.label)
        total += rule.probability * value(value, tree, rule.rhs[0].id);
    }
    return total;
  }

  // ------------------------------------------------------------------
  // exhaustive search over binary bracketings

  struct Bracketing
  {
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // every node, leaves included
  };

  inline void all_bracketings(std::size_t s, std::size_t t, std::vector<Bracketing>& out)
  {
    if (s == t) {
      out.push_back({{{s, s}}});
      return;
    }
    for (std::size_t r = s; r < t; ++ r) {
      std::vector<Bracketing> left, right;
      all_bracketings(s, r, left);
      all_bracketings(r + 1, t, right);
      for (const auto& l : left)
        for (const auto& rr : right) {
          Bracketing b;
          b.spans.emplace_back(s, t);
          b.spans.insert(b.spans.end(), l.spans.begin(), l.spans.end());
          b.spans.insert(b.spans.end(), rr.spans.begin(), rr.spans.end());
          out.push_back(std::move(b));
        }
    }
  }

  // max over bracketings of the summed best-label posterior of every span
  template <typename Value>
  Value brute_force_maxcons(const PosteriorTable<Value>& g)
  {
    std::vector<Bracketing> bracketings;
    all_bracketings(1, g.length(), bracketings);
    Value best(0);
    bool first = true;
    for (const auto& bracketing : bracketings) {
      Value total(0);
      for (const auto& [s, t] : bracketing.spans) {
        Value top(0);
        for (std::size_t l = 0; l != g.labels().size(); ++ l)
          top = std::max(top, g.at(s, t, l));
        total += top;
      }
      if (first || total > best) {
        best = total;
        first = false;
      }
    }
    return best;
  }
}

#endif
