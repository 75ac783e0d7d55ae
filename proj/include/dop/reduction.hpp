// -*- mode: c++ -*-

#ifndef DOP_REDUCTION_HPP
#define DOP_REDUCTION_HPP

// Reduction of the all-subtrees grammar of a binarized corpus to a PCFG with
// at most eight rules per training node.
//
// For a node A@j with children B@k, C@l (b_k, c_l subtrees below them):
//
//   a_j = (b_k + 1)(c_l + 1),   a = sum of a_j over nodes labeled A
//
//   A_j -> B C      1/a_j           A -> B C      1/a
//   A_j -> B_k C    b_k/a_j         A -> B_k C    b_k/a
//   A_j -> B C_l    c_l/a_j         A -> B C_l    c_l/a
//   A_j -> B_k C_l  b_k c_l/a_j     A -> B_k C_l  b_k c_l/a
//
// A terminal child has no interior variant and contributes a factor of 1.

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <dop/error.hpp>
#include <dop/grammar.hpp>
#include <dop/numeric.hpp>
#include <dop/stsg.hpp>
#include <dop/tree.hpp>

namespace dop
{
  struct AddressedChild
  {
    bool        terminal = false;
    std::string symbol;       // terminal symbol or child label
    std::size_t address = 0;  // nonterminal children only
  };

  struct AddressedNode
  {
    std::string                 label;
    std::size_t                 address = 0;
    std::vector<AddressedChild> children;
    bool                        root = false;
    Count                       subtree_count = 0;
  };

  // nodes[k - 1] is the node at address k
  struct AddressedCorpus
  {
    std::vector<AddressedNode>   nodes;
    std::vector<std::size_t>     roots;   // root addresses in corpus order
    std::map<std::string, Count> totals;  // a, per exterior label
    bool                         counted = false;

    const AddressedNode& at(std::size_t address) const { return nodes.at(address - 1); }
  };

  namespace detail
  {
    inline std::size_t address_tree(const Tree& tree, AddressedCorpus& corpus, bool root)
    {
      if (tree.children.empty() || tree.children.size() > 2
          || (tree.children.size() == 1 && ! tree.children.front().is_terminal()))
        throw Error(ErrorCode::ArityViolation,
                    "node '" + tree.label + "' with " + std::to_string(tree.children.size())
                        + " children is not in binary/preterminal form: " + write_penn(tree));

      const std::size_t address = corpus.nodes.size() + 1;
      corpus.nodes.push_back({tree.label, address, {}, root, 0});
      std::vector<AddressedChild> children;
      for (const auto& child : tree.children) {
        if (child.is_terminal())
          children.push_back({true, child.label, 0});
        else
          children.push_back({false, child.label, address_tree(child, corpus, false)});
      }
      corpus.nodes[address - 1].children = std::move(children);
      return address;
    }
  }

  // preorder, left to right, corpus order; addresses start at 1
  inline AddressedCorpus assign_addresses(const std::vector<Tree>& corpus)
  {
    AddressedCorpus out;
    for (const auto& tree : corpus)
      out.roots.push_back(detail::address_tree(tree, out, true));
    return out;
  }

  inline void count_subtrees(AddressedCorpus& corpus)
  {
    corpus.totals.clear();
    // children always carry larger addresses than their parent
    for (auto node = corpus.nodes.rbegin(); node != corpus.nodes.rend(); ++ node) {
      Count count = 1;
      for (const auto& child : node->children)
        if (! child.terminal)
          count *= corpus.nodes[child.address - 1].subtree_count + 1;
      node->subtree_count = std::move(count);
    }
    for (const auto& node : corpus.nodes)
      corpus.totals[node.label] += node.subtree_count;
    corpus.counted = true;
  }

  // Root nodes get no interior rules: nothing can rewrite to their interior
  // symbol, so those rules would be unreachable.
  inline Pcfg build_pcfg(const AddressedCorpus& corpus)
  {
    if (corpus.nodes.empty())
      throw Error(ErrorCode::EmptyCorpus, "cannot build a grammar from an empty corpus");
    if (! corpus.counted) {
      AddressedCorpus counted = corpus;
      count_subtrees(counted);
      return build_pcfg(counted);
    }

    using RhsKey = std::vector<std::pair<bool, std::string>>;  // (terminal, name)
    struct Variant
    {
      bool        terminal;
      Symbol      symbol;
      std::string terminal_symbol;
      Count       weight;
    };

    std::map<std::pair<std::string, RhsKey>, Count> exterior;
    std::vector<std::tuple<Symbol, std::vector<Variant>, Rational>> interior;

    auto variants_of = [&](const AddressedChild& child) {
      std::vector<Variant> out;
      if (child.terminal)
        out.push_back({true, {}, child.symbol, 1});
      else {
        out.push_back({false, Symbol{child.symbol, 0}, {}, 1});
        out.push_back({false, Symbol{child.symbol, child.address}, {}, corpus.at(child.address).subtree_count});
      }
      return out;
    };

    auto key_of = [](const std::vector<Variant>& rhs) {
      RhsKey key;
      for (const auto& item : rhs)
        key.emplace_back(item.terminal, item.terminal ? item.terminal_symbol : item.symbol.name());
      return key;
    };

    for (const auto& node : corpus.nodes) {
      std::vector<std::vector<Variant>> combinations{{}};
      for (const auto& child : node.children) {
        std::vector<std::vector<Variant>> next;
        for (const auto& prefix : combinations)
          for (auto& variant : variants_of(child)) {
            auto extended = prefix;
            extended.push_back(variant);
            next.push_back(std::move(extended));
          }
        combinations = std::move(next);
      }

      for (auto& rhs : combinations) {
        Count numerator = 1;
        for (const auto& item : rhs)
          numerator *= item.weight;
        exterior[{node.label, key_of(rhs)}] += numerator;
        if (! node.root)
          interior.emplace_back(Symbol{node.label, node.address}, rhs, Rational(numerator, node.subtree_count));
      }
    }

    Pcfg grammar;
    // exterior labels first, then interior symbols by address
    std::set<std::string> labels;
    for (const auto& node : corpus.nodes)
      labels.insert(node.label);
    for (const auto& label : labels)
      grammar.intern_symbol({label, 0});
    for (const auto& node : corpus.nodes)
      if (! node.root)
        grammar.intern_symbol({node.label, node.address});

    auto make_item = [&](bool terminal, const std::string& name) {
      return terminal ? RhsItem{true, grammar.intern_terminal(name)} : RhsItem{false, *grammar.find_symbol(name)};
    };

    for (const auto& [key, numerator] : exterior) {
      const auto& [lhs, rhs] = key;
      Rule rule;
      rule.lhs = *grammar.find_symbol(lhs);
      rule.arity = static_cast<std::uint8_t>(rhs.size());
      for (std::size_t i = 0; i != rhs.size(); ++ i)
        rule.rhs[i] = make_item(rhs[i].first, rhs[i].second);
      rule.probability = ratio(numerator, corpus.totals.at(lhs));
      grammar.add_rule(rule);
    }
    for (const auto& [lhs, rhs, probability] : interior) {
      Rule rule;
      rule.lhs = *grammar.find_symbol(lhs.name());
      rule.arity = static_cast<std::uint8_t>(rhs.size());
      for (std::size_t i = 0; i != rhs.size(); ++ i)
        rule.rhs[i] = make_item(rhs[i].terminal, rhs[i].terminal ? rhs[i].terminal_symbol : rhs[i].symbol.name());
      rule.probability = to_double(probability);
      grammar.add_rule(rule);
    }

    // one root label: it is the start symbol; several: a synthetic start
    // rewrites to each root label in proportion to its corpus frequency
    std::map<std::string, std::size_t> root_labels;
    for (std::size_t address : corpus.roots)
      ++ root_labels[corpus.at(address).label];
    if (root_labels.size() == 1)
      grammar.set_start(*grammar.find_symbol(root_labels.begin()->first), false);
    else {
      std::string name = "TOP";
      while (labels.count(name))
        name = "*" + name;
      const SymbolId start = grammar.intern_symbol({name, 0});
      for (const auto& [label, count] : root_labels) {
        Rule rule;
        rule.lhs = start;
        rule.arity = 1;
        rule.rhs[0] = {false, *grammar.find_symbol(label)};
        rule.probability = static_cast<double>(count) / static_cast<double>(corpus.roots.size());
        grammar.add_rule(rule);
      }
      grammar.set_start(start, true);
    }

    grammar.set_corpus_nodes(corpus.nodes.size());
    grammar.finalize();
    return grammar;
  }

  inline Pcfg reduce(const std::vector<Tree>& corpus)
  {
    if (corpus.empty())
      throw Error(ErrorCode::EmptyCorpus, "cannot build a grammar from an empty corpus");
    auto addressed = assign_addresses(corpus);
    count_subtrees(addressed);
    return build_pcfg(addressed);
  }

  // Encodes an explicit STSG as a PCFG, giving every non-root node of every
  // elementary tree its own interior symbol. Derivations correspond one to
  // one, so Viterbi over the result is the STSG's most probable derivation.
  inline Pcfg encode_stsg(const stsg::ExplicitStsg& grammar)
  {
    if (grammar.empty())
      throw Error(ErrorCode::EmptyCorpus, "cannot encode an empty STSG");

    Pcfg out;
    std::set<std::string> labels;
    for (const auto& tree : grammar.trees())
      labels.insert(tree.tree.label);
    for (const auto& label : labels)
      out.intern_symbol({label, 0});

    std::size_t next_address = 1;
    std::map<std::tuple<SymbolId, RhsItem, RhsItem, std::uint8_t>, double> merged;

    auto add = [&](SymbolId lhs, const std::vector<RhsItem>& rhs, double probability) {
      RhsItem second = rhs.size() > 1 ? rhs[1] : RhsItem{};
      auto key = std::make_tuple(lhs, rhs[0], second, static_cast<std::uint8_t>(rhs.size()));
      merged[key] += probability;
    };

    auto encode = [&](auto& self, const Tree& node, SymbolId lhs, double probability) -> void {
      if (node.children.size() > 2 || (node.children.size() == 1 && ! node.children[0].is_terminal()))
        throw Error(ErrorCode::ArityViolation, "elementary tree node is not binary: " + write_penn(node));
      std::vector<RhsItem> rhs;
      std::vector<std::pair<const Tree*, SymbolId>> expand;
      for (const auto& child : node.children) {
        if (child.is_terminal())
          rhs.push_back({true, out.intern_terminal(child.label)});
        else if (child.is_site())
          rhs.push_back({false, out.intern_symbol({child.label, 0})});
        else {
          const SymbolId id = out.intern_symbol({child.label, next_address ++});
          rhs.push_back({false, id});
          expand.emplace_back(&child, id);
        }
      }
      add(lhs, rhs, probability);
      for (const auto& [child, id] : expand)
        self(self, *child, id, 1.0);
    };

    for (std::size_t index = 0; index != grammar.trees().size(); ++ index) {
      const auto& tree = grammar.trees()[index].tree;
      encode(encode, tree, *out.find_symbol(tree.label), to_double(grammar.probability(index)));
    }

    for (const auto& [key, probability] : merged) {
      const auto& [lhs, first, second, arity] = key;
      Rule rule;
      rule.lhs = lhs;
      rule.arity = arity;
      rule.rhs = {first, second};
      rule.probability = probability;
      out.add_rule(rule);
    }

    if (grammar.start().size() == 1 && grammar.start().begin()->second == 1)
      out.set_start(out.intern_symbol({grammar.start().begin()->first, 0}), false);
    else {
      const SymbolId start = out.intern_symbol({"*TOP", 0});
      for (const auto& [label, weight] : grammar.start()) {
        Rule rule;
        rule.lhs = start;
        rule.arity = 1;
        rule.rhs[0] = {false, out.intern_symbol({label, 0})};
        rule.probability = to_double(weight);
        out.add_rule(rule);
      }
      out.set_start(start, true);
    }
    out.finalize();
    return out;
  }

  struct GrammarStats
  {
    std::size_t nodes                 = 0;
    std::size_t rules                 = 0;
    std::size_t exterior_nonterminals = 0;
    std::size_t interior_nonterminals = 0;
    std::size_t terminals             = 0;
    double      rules_per_node        = 0;
  };

  inline GrammarStats grammar_stats(const Pcfg& grammar)
  {
    GrammarStats stats;
    stats.nodes = grammar.corpus_nodes();
    stats.rules = grammar.rules().size();
    for (const auto& symbol : grammar.symbols())
      ++ (symbol.interior() ? stats.interior_nonterminals : stats.exterior_nonterminals);
    stats.terminals = grammar.terminals().size();
    stats.rules_per_node = stats.nodes ? static_cast<double>(stats.rules) / static_cast<double>(stats.nodes) : 0.0;
    return stats;
  }
}

#endif
