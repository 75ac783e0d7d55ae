// -*- mode: c++ -*-

#ifndef DOP_STSG_HPP
#define DOP_STSG_HPP

// Explicit stochastic tree substitution grammar built from every subtree of
// a corpus. Exponential in tree size: this is the brute-force reference the
// reduced grammar is checked against, not something to parse with.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <dop/error.hpp>
#include <dop/numeric.hpp>
#include <dop/posterior.hpp>
#include <dop/tree.hpp>

namespace dop::stsg
{
  struct ElementaryTree
  {
    Tree        tree;
    Rational    weight;
    std::string key;  // written form; identity for merging
  };

  class ExplicitStsg
  {
  public:
    ExplicitStsg() = default;

    // weights per root are normalized on construction
    ExplicitStsg(std::vector<ElementaryTree> trees, std::map<std::string, Rational> start)
      : trees_(std::move(trees)), start_(std::move(start))
    {
      for (std::size_t i = 0; i != trees_.size(); ++ i) {
        if (trees_[i].key.empty())
          trees_[i].key = write_penn(trees_[i].tree);
        normalizer_[trees_[i].tree.label] += trees_[i].weight;
        by_root_[trees_[i].tree.label].push_back(i);
      }
    }

    const std::vector<ElementaryTree>& trees() const { return trees_; }
    const std::map<std::string, Rational>& start() const { return start_; }
    const std::map<std::string, Rational>& normalizers() const { return normalizer_; }

    Rational probability(std::size_t index) const
    {
      const auto& tree = trees_[index];
      return tree.weight / normalizer_.at(tree.tree.label);
    }

    const std::vector<std::size_t>& rooted_at(const std::string& label) const
    {
      static const std::vector<std::size_t> none;
      auto iter = by_root_.find(label);
      return iter == by_root_.end() ? none : iter->second;
    }

    bool empty() const { return trees_.empty(); }

  private:
    std::vector<ElementaryTree>                       trees_;
    std::map<std::string, Rational>                   start_;
    std::map<std::string, Rational>                   normalizer_;
    std::map<std::string, std::vector<std::size_t>>   by_root_;
  };

  struct ExtractOptions
  {
    bool        merge = true;         // identical subtrees share one elementary tree
    std::size_t cap   = 1'000'000;    // total subtree occurrences
  };

  // number of subtrees headed by a node, counted directly from its fragments
  inline std::vector<Tree> subtrees_headed_by(const Tree& node)
  {
    std::vector<Tree> partial{Tree::node(node.label, {})};
    for (const auto& child : node.children) {
      std::vector<Tree> options;
      if (child.is_internal()) {
        options.push_back(Tree::site(child.label));
        for (auto& sub : subtrees_headed_by(child))
          options.push_back(std::move(sub));
      } else
        options.push_back(child);

      std::vector<Tree> next;
      next.reserve(partial.size() * options.size());
      for (const auto& prefix : partial)
        for (const auto& option : options) {
          Tree extended = prefix;
          extended.children.push_back(option);
          next.push_back(std::move(extended));
        }
      partial = std::move(next);
    }
    return partial;
  }

  namespace detail
  {
    inline Count occurrence_count(const Tree& node, Count& total)
    {
      Count count = 1;
      for (const auto& child : node.children)
        if (child.is_internal())
          count *= occurrence_count(child, total) + 1;
      total += count;
      return count;
    }

    inline void collect_nodes(const Tree& tree, std::vector<const Tree*>& out)
    {
      if (! tree.is_internal())
        return;
      out.push_back(&tree);
      for (const auto& child : tree.children)
        collect_nodes(child, out);
    }
  }

  inline ExplicitStsg extract_all_subtrees(const std::vector<Tree>& corpus, const ExtractOptions& options = {})
  {
    Count total = 0;
    for (const auto& tree : corpus)
      detail::occurrence_count(tree, total);
    if (total > options.cap)
      throw Error(ErrorCode::SubtreeCapExceeded, total.str() + " subtrees exceed the cap of " + std::to_string(options.cap));

    std::vector<ElementaryTree> trees;
    std::map<std::string, std::size_t> index;
    std::map<std::string, Rational> roots;

    for (const auto& tree : corpus) {
      roots[tree.label] += 1;
      std::vector<const Tree*> nodes;
      detail::collect_nodes(tree, nodes);
      for (const Tree* node : nodes)
        for (auto& sub : subtrees_headed_by(*node)) {
          std::string key = write_penn(sub);
          if (options.merge) {
            auto [iter, inserted] = index.emplace(key, trees.size());
            if (! inserted) {
              trees[iter->second].weight += 1;
              continue;
            }
          }
          trees.push_back({std::move(sub), Rational(1), std::move(key)});
        }
    }

    std::sort(trees.begin(), trees.end(), [](const ElementaryTree& x, const ElementaryTree& y) {
      return std::tie(x.tree.label, x.key) < std::tie(y.tree.label, y.key);
    });

    for (auto& [label, weight] : roots)
      weight /= Rational(corpus.size());
    return ExplicitStsg(std::move(trees), std::move(roots));
  }

  struct Derivation
  {
    std::vector<std::size_t> elementary;  // leftmost-substitution order
    Tree                     tree;
    Rational                 probability;
  };

  struct EnumerateOptions
  {
    std::size_t max_length      = 10;
    std::size_t max_derivations = 1'000'000;
  };

  namespace detail
  {
    struct Partial
    {
      std::vector<std::size_t> elementary;
      Tree                     tree;
      Rational                 probability;
    };

    class Enumerator
    {
    public:
      Enumerator(const ExplicitStsg& grammar, const std::vector<std::string>& sentence, const EnumerateOptions& options)
        : grammar_(grammar), sentence_(sentence), options_(options) {}

      const std::vector<Partial>& derive(const std::string& label, std::size_t begin, std::size_t end)
      {
        const auto key = std::make_tuple(label, begin, end);
        if (auto iter = memo_.find(key); iter != memo_.end())
          return iter->second;
        if (! active_.insert(key).second)
          throw Error(ErrorCode::EnumerationCapExceeded,
                      "cyclic unary substitution through '" + label + "' yields unboundedly many derivations");

        std::vector<Partial> out;
        for (std::size_t index : grammar_.rooted_at(label)) {
          const auto& elementary = grammar_.trees()[index];
          std::vector<const Tree*> frontier;
          collect_frontier(elementary.tree, frontier);
          if (frontier.size() > end - begin)
            continue;

          std::vector<const Partial*> chosen;
          match(frontier, 0, begin, end, chosen, [&] {
            Partial partial;
            partial.elementary.push_back(index);
            partial.probability = grammar_.probability(index);
            for (const Partial* sub : chosen) {
              partial.elementary.insert(partial.elementary.end(), sub->elementary.begin(), sub->elementary.end());
              partial.probability *= sub->probability;
            }
            std::size_t next = 0;
            partial.tree = substitute(elementary.tree, chosen, next);
            out.push_back(std::move(partial));
            if (out.size() > options_.max_derivations)
              throw Error(ErrorCode::EnumerationCapExceeded,
                          "more than " + std::to_string(options_.max_derivations) + " derivations");
          });
        }

        active_.erase(key);
        return memo_.emplace(key, std::move(out)).first->second;
      }

    private:
      static void collect_frontier(const Tree& tree, std::vector<const Tree*>& out)
      {
        if (! tree.is_internal()) {
          out.push_back(&tree);
          return;
        }
        for (const auto& child : tree.children)
          collect_frontier(child, out);
      }

      static Tree substitute(const Tree& tree, const std::vector<const Partial*>& chosen, std::size_t& next)
      {
        if (tree.is_site())
          return chosen[next ++]->tree;
        if (tree.is_terminal())
          return tree;
        Tree out = Tree::node(tree.label, {});
        out.children.reserve(tree.children.size());
        for (const auto& child : tree.children)
          out.children.push_back(substitute(child, chosen, next));
        return out;
      }

      template <typename Emit>
      void match(const std::vector<const Tree*>& frontier, std::size_t position, std::size_t begin, std::size_t end,
                 std::vector<const Partial*>& chosen, Emit&& emit)
      {
        if (position == frontier.size()) {
          if (begin == end)
            emit();
          return;
        }
        const Tree& leaf = *frontier[position];
        const std::size_t remaining = frontier.size() - position - 1;
        if (begin + remaining >= end)
          return;

        if (leaf.is_terminal()) {
          if (sentence_[begin] == leaf.label)
            match(frontier, position + 1, begin + 1, end, chosen, emit);
          return;
        }
        for (std::size_t split = begin + 1; split + remaining <= end; ++ split) {
          const std::vector<Partial>* subs = &derive(leaf.label, begin, split);
          for (std::size_t i = 0; i != subs->size(); ++ i) {
            chosen.push_back(&(*subs)[i]);
            match(frontier, position + 1, split, end, chosen, emit);
            chosen.pop_back();
          }
        }
      }

      const ExplicitStsg&                                                   grammar_;
      const std::vector<std::string>&                                       sentence_;
      EnumerateOptions                                                      options_;
      std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<Partial>> memo_;
      std::set<std::tuple<std::string, std::size_t, std::size_t>>          active_;
    };
  }

  inline std::vector<Derivation> enumerate_derivations(const ExplicitStsg& grammar,
                                                       const std::vector<std::string>& sentence,
                                                       const EnumerateOptions& options = {})
  {
    if (sentence.size() > options.max_length)
      throw Error(ErrorCode::EnumerationCapExceeded,
                  "sentence length " + std::to_string(sentence.size()) + " exceeds " + std::to_string(options.max_length));
    std::vector<Derivation> out;
    if (grammar.empty() || sentence.empty())
      return out;

    detail::Enumerator enumerator(grammar, sentence, options);
    for (const auto& [label, weight] : grammar.start())
      for (const auto& partial : enumerator.derive(label, 0, sentence.size())) {
        out.push_back({partial.elementary, partial.tree, partial.probability * weight});
        if (out.size() > options.max_derivations)
          throw Error(ErrorCode::EnumerationCapExceeded,
                      "more than " + std::to_string(options.max_derivations) + " derivations");
      }
    return out;
  }

  // parse trees keyed by written form
  using TreeDistribution = std::map<std::string, Rational>;

  inline TreeDistribution tree_distribution(const std::vector<Derivation>& derivations)
  {
    TreeDistribution out;
    for (const auto& derivation : derivations)
      out[write_penn(derivation.tree)] += derivation.probability;
    return out;
  }

  inline Rational total_mass(const std::vector<Derivation>& derivations)
  {
    Rational total = 0;
    for (const auto& derivation : derivations)
      total += derivation.probability;
    return total;
  }

  using SpanKey       = std::tuple<std::size_t, std::size_t, std::string>;
  using PosteriorMap  = std::map<SpanKey, Rational>;

  // probability, given the sentence, that a constituent with the label spans (s,t)
  inline PosteriorMap posteriors_from(const TreeDistribution& distribution)
  {
    PosteriorMap out;
    Rational total = 0;
    for (const auto& [key, probability] : distribution)
      total += probability;
    if (total == 0)
      return out;
    for (const auto& [key, probability] : distribution) {
      const Tree tree = read_tree(key, {.allow_reserved = true});
      // a tree with a unary chain can hold the same labeled span twice; count it once
      std::set<SpanKey> seen;
      for (const auto& span : constituent_spans(tree))
        seen.emplace(span.begin, span.end, span.label);
      for (const auto& span : seen)
        out[span] += probability / total;
    }
    return out;
  }

  inline PosteriorMap oracle_posteriors(const ExplicitStsg& grammar, const std::vector<std::string>& sentence,
                                        const EnumerateOptions& options = {})
  {
    return posteriors_from(tree_distribution(enumerate_derivations(grammar, sentence, options)));
  }

  inline PosteriorTable<Rational> to_table(const PosteriorMap& posteriors, std::size_t length)
  {
    std::vector<std::string> labels;
    for (const auto& [key, value] : posteriors)
      labels.push_back(std::get<2>(key));
    PosteriorTable<Rational> table(length, std::move(labels));
    for (const auto& [key, value] : posteriors)
      table.add(std::get<0>(key), std::get<1>(key), std::get<2>(key), value);
    return table;
  }

  inline Derivation oracle_mpd(const ExplicitStsg& grammar, const std::vector<std::string>& sentence,
                               const EnumerateOptions& options = {})
  {
    auto derivations = enumerate_derivations(grammar, sentence, options);
    if (derivations.empty())
      throw Error(ErrorCode::NoParse, "no derivation of the sentence");
    std::size_t best = 0;
    std::string best_key = write_penn(derivations[0].tree);
    for (std::size_t i = 1; i != derivations.size(); ++ i) {
      std::string key = write_penn(derivations[i].tree);
      const auto& candidate = derivations[i];
      const auto& incumbent = derivations[best];
      if (candidate.probability > incumbent.probability
          || (candidate.probability == incumbent.probability
              && std::tie(key, candidate.elementary) < std::tie(best_key, incumbent.elementary))) {
        best = i;
        best_key = std::move(key);
      }
    }
    return derivations[best];
  }

  struct ParseTree
  {
    Tree     tree;
    Rational probability;
  };

  inline ParseTree oracle_mpp(const ExplicitStsg& grammar, const std::vector<std::string>& sentence,
                              const EnumerateOptions& options = {})
  {
    const auto distribution = tree_distribution(enumerate_derivations(grammar, sentence, options));
    if (distribution.empty())
      throw Error(ErrorCode::NoParse, "no derivation of the sentence");
    // map order is lexicographic, so strict > keeps the smallest tied key
    auto best = distribution.begin();
    for (auto iter = distribution.begin(); iter != distribution.end(); ++ iter)
      if (iter->second > best->second)
        best = iter;
    return {read_tree(best->first, {.allow_reserved = true}), best->second};
  }

  // Text form: "<weight> <bracketed tree>" per line, weights integer or p/q.
  // A bare leaf is a substitution site when its symbol labels an internal
  // node somewhere in the file. "%start <label> [weight]" lines set the root
  // distribution; without them the first tree's root is the start symbol.
  inline void write_stsg(std::ostream& os, const ExplicitStsg& grammar)
  {
    for (const auto& [label, weight] : grammar.start())
      os << "%start " << label << ' ' << weight.str() << '\n';
    for (const auto& tree : grammar.trees())
      os << tree.weight.str() << ' ' << tree.key << '\n';
  }

  namespace detail
  {
    inline void collect_labels(const Tree& tree, std::set<std::string>& out)
    {
      if (! tree.is_internal())
        return;
      out.insert(tree.label);
      for (const auto& child : tree.children)
        collect_labels(child, out);
    }

    inline void mark_sites(Tree& tree, const std::set<std::string>& nonterminals)
    {
      for (auto& child : tree.children) {
        if (child.is_internal())
          mark_sites(child, nonterminals);
        else if (nonterminals.count(child.label))
          child.terminal = false;
      }
    }
  }

  inline ExplicitStsg read_stsg(std::istream& is)
  {
    std::vector<ElementaryTree> trees;
    std::map<std::string, Rational> start;
    std::string line;
    std::size_t number = 0;
    while (std::getline(is, line)) {
      ++ number;
      std::istringstream fields(line);
      std::string first;
      if (! (fields >> first) || first.starts_with('#'))
        continue;
      if (first == "%start") {
        std::string label, weight = "1";
        fields >> label >> weight;
        if (label.empty())
          throw Error(ErrorCode::MalformedGrammar, "line " + std::to_string(number) + ": %start without a label");
        start[label] = Rational(weight);
        continue;
      }
      Rational weight;
      try {
        weight = Rational(first);
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedGrammar, "line " + std::to_string(number) + ": bad weight '" + first + "'");
      }
      std::string rest;
      std::getline(fields, rest);
      trees.push_back({read_tree(rest), weight, {}});
    }

    std::set<std::string> nonterminals;
    for (const auto& tree : trees)
      detail::collect_labels(tree.tree, nonterminals);
    for (auto& tree : trees) {
      detail::mark_sites(tree.tree, nonterminals);
      tree.key = write_penn(tree.tree);
    }
    if (start.empty() && ! trees.empty())
      start[trees.front().tree.label] = 1;
    return ExplicitStsg(std::move(trees), std::move(start));
  }
}

#endif
