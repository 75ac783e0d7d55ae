// -*- mode: c++ -*-

#ifndef DOP_GRAMMAR_HPP
#define DOP_GRAMMAR_HPP

// binary/lexical PCFG over exterior and interior nonterminals

#include <algorithm>
#include <array>
#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <dop/error.hpp>
#include <dop/tree.hpp>

namespace dop
{
  using SymbolId   = std::uint32_t;
  using TerminalId = std::uint32_t;

  // Exterior symbols are treebank labels; interior symbols label@k are tied
  // to the training node at address k and never appear in output trees.
  struct Symbol
  {
    std::string base;
    std::size_t address = 0;  // 0: exterior

    bool interior() const { return address != 0; }

    std::string name() const { return interior() ? base + "@" + std::to_string(address) : base; }

    static Symbol parse(std::string_view name)
    {
      const auto at = name.rfind('@');
      if (at == std::string_view::npos || at == 0 || at + 1 == name.size())
        return {std::string(name), 0};
      std::size_t address = 0;
      const auto* first = name.data() + at + 1;
      const auto* last = name.data() + name.size();
      auto [ptr, ec] = std::from_chars(first, last, address);
      if (ec != std::errc() || ptr != last || address == 0)
        return {std::string(name), 0};
      return {std::string(name.substr(0, at)), address};
    }

    friend bool operator==(const Symbol&, const Symbol&) = default;
  };

  struct RhsItem
  {
    bool          terminal = false;
    std::uint32_t id       = 0;

    friend auto operator<=>(const RhsItem&, const RhsItem&) = default;
  };

  struct Rule
  {
    SymbolId               lhs = 0;
    std::array<RhsItem, 2> rhs{};
    std::uint8_t           arity = 0;
    double                 probability = 0;
  };

  class Pcfg
  {
  public:
    struct BinaryEntry
    {
      SymbolId    lhs;
      SymbolId    other;  // the remaining nonterminal child, if any
      double      probability;
      std::size_t rule;
    };

    struct LexicalEntry
    {
      SymbolId    lhs;
      double      probability;
      std::size_t rule;
    };

    struct DoubleTerminalEntry
    {
      SymbolId    lhs;
      TerminalId  right;
      double      probability;
      std::size_t rule;
    };

    SymbolId intern_symbol(const Symbol& symbol)
    {
      const std::string name = symbol.name();
      auto [iter, inserted] = symbol_index_.emplace(name, static_cast<SymbolId>(symbols_.size()));
      if (inserted)
        symbols_.push_back(symbol);
      return iter->second;
    }

    TerminalId intern_terminal(const std::string& terminal)
    {
      auto [iter, inserted] = terminal_index_.emplace(terminal, static_cast<TerminalId>(terminals_.size()));
      if (inserted)
        terminals_.push_back(terminal);
      return iter->second;
    }

    std::optional<SymbolId> find_symbol(const std::string& name) const
    {
      auto iter = symbol_index_.find(name);
      if (iter == symbol_index_.end())
        return std::nullopt;
      return iter->second;
    }

    std::optional<TerminalId> find_terminal(const std::string& terminal) const
    {
      auto iter = terminal_index_.find(terminal);
      if (iter == terminal_index_.end())
        return std::nullopt;
      return iter->second;
    }

    void add_rule(Rule rule) { rules_.push_back(rule); }

    void set_start(SymbolId start, bool synthetic)
    {
      start_ = start;
      synthetic_start_ = synthetic;
    }

    // Sorts rules into the canonical (lhs name, rhs names) order and builds
    // the lookup tables the chart needs. Call once after the last add_rule.
    void finalize()
    {
      std::vector<std::pair<std::string, Rule>> keyed;
      keyed.reserve(rules_.size());
      for (const auto& rule : rules_)
        keyed.emplace_back(sort_key(rule), rule);
      std::stable_sort(keyed.begin(), keyed.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      rules_.clear();
      for (auto& [key, rule] : keyed)
        rules_.push_back(rule);

      by_lhs_.assign(symbols_.size(), {});
      by_left_.assign(symbols_.size(), {});
      by_right_.assign(symbols_.size(), {});
      left_terminal_.assign(terminals_.size(), {});
      right_terminal_.assign(terminals_.size(), {});
      double_terminal_.assign(terminals_.size(), {});
      lexical_.assign(terminals_.size(), {});
      start_rules_.clear();

      for (std::size_t index = 0; index != rules_.size(); ++ index) {
        const Rule& rule = rules_[index];
        by_lhs_[rule.lhs].push_back(index);
        if (rule.arity == 1) {
          if (! rule.rhs[0].terminal && (rule.lhs != start_ || ! synthetic_start_))
            throw Error(ErrorCode::MalformedGrammar,
                        "unary rule " + rule_string(rule) + " outside the synthetic start symbol");
          if (rule.rhs[0].terminal)
            lexical_[rule.rhs[0].id].push_back({rule.lhs, rule.probability, index});
          else
            start_rules_.push_back({rule.lhs, rule.rhs[0].id, rule.probability, index});
          continue;
        }
        const auto& [left, right] = rule.rhs;
        if (! left.terminal && ! right.terminal) {
          by_left_[left.id].push_back({rule.lhs, right.id, rule.probability, index});
          by_right_[right.id].push_back({rule.lhs, left.id, rule.probability, index});
        }
        else if (left.terminal && ! right.terminal)
          left_terminal_[left.id].push_back({rule.lhs, right.id, rule.probability, index});
        else if (! left.terminal && right.terminal)
          right_terminal_[right.id].push_back({rule.lhs, left.id, rule.probability, index});
        else
          double_terminal_[left.id].push_back({rule.lhs, right.id, rule.probability, index});
      }
    }

    const std::vector<Symbol>& symbols() const { return symbols_; }
    const std::vector<std::string>& terminals() const { return terminals_; }
    const std::vector<Rule>& rules() const { return rules_; }
    SymbolId start() const { return start_; }
    bool synthetic_start() const { return synthetic_start_; }

    std::size_t corpus_nodes() const { return corpus_nodes_; }
    void set_corpus_nodes(std::size_t nodes) { corpus_nodes_ = nodes; }

    const std::vector<std::size_t>& rules_for(SymbolId lhs) const { return by_lhs_[lhs]; }
    // X -> Y Z keyed by Y; entry.other is Z
    const std::vector<BinaryEntry>& binary_by_left(SymbolId left) const { return by_left_[left]; }
    // X -> Y Z keyed by Z; entry.other is Y
    const std::vector<BinaryEntry>& binary_by_right(SymbolId right) const { return by_right_[right]; }
    // X -> w Z keyed by w; entry.other is Z
    const std::vector<BinaryEntry>& left_terminal(TerminalId word) const { return left_terminal_[word]; }
    // X -> Y w keyed by w; entry.other is Y
    const std::vector<BinaryEntry>& right_terminal(TerminalId word) const { return right_terminal_[word]; }
    const std::vector<DoubleTerminalEntry>& double_terminal(TerminalId left) const { return double_terminal_[left]; }
    const std::vector<LexicalEntry>& lexical(TerminalId word) const { return lexical_[word]; }
    // synthetic start -> R, applied only over the whole sentence; entry.other is R
    const std::vector<BinaryEntry>& start_rules() const { return start_rules_; }

    std::string rhs_name(const RhsItem& item) const
    {
      return item.terminal ? terminals_[item.id] : symbols_[item.id].name();
    }

    std::string rule_string(const Rule& rule) const
    {
      std::string out = symbols_[rule.lhs].name() + " →";
      for (std::size_t i = 0; i != rule.arity; ++ i)
        out += " " + rhs_name(rule.rhs[i]);
      return out;
    }

  private:
    std::string sort_key(const Rule& rule) const
    {
      std::string key = symbols_[rule.lhs].name();
      for (std::size_t i = 0; i != rule.arity; ++ i) {
        key += '\x01';
        key += rhs_name(rule.rhs[i]);
      }
      return key;
    }

    std::vector<Symbol>                          symbols_;
    std::unordered_map<std::string, SymbolId>    symbol_index_;
    std::vector<std::string>                     terminals_;
    std::unordered_map<std::string, TerminalId>  terminal_index_;
    std::vector<Rule>                            rules_;
    SymbolId                                     start_ = 0;
    bool                                         synthetic_start_ = false;
    std::size_t                                  corpus_nodes_ = 0;

    std::vector<std::vector<std::size_t>>         by_lhs_;
    std::vector<std::vector<BinaryEntry>>         by_left_;
    std::vector<std::vector<BinaryEntry>>         by_right_;
    std::vector<std::vector<BinaryEntry>>         left_terminal_;
    std::vector<std::vector<BinaryEntry>>         right_terminal_;
    std::vector<std::vector<DoubleTerminalEntry>> double_terminal_;
    std::vector<std::vector<LexicalEntry>>        lexical_;
    std::vector<BinaryEntry>                      start_rules_;
  };

  // per-lhs probability mass; 1 for every lhs of a well-formed grammar
  inline std::map<std::string, double> lhs_mass(const Pcfg& grammar)
  {
    std::map<std::string, double> mass;
    for (const auto& rule : grammar.rules())
      mass[grammar.symbols()[rule.lhs].name()] += rule.probability;
    return mass;
  }

  // relabels interior symbols with their exterior base label
  inline Tree erase_interior(const Tree& tree)
  {
    if (! tree.is_internal())
      return tree;
    Tree out = Tree::node(Symbol::parse(tree.label).base, {});
    out.children.reserve(tree.children.size());
    for (const auto& child : tree.children)
      out.children.push_back(erase_interior(child));
    return out;
  }

  // "%start S" header, then one "lhs → rhs1 [rhs2]<TAB>probability" per rule
  inline void write_pcfg(std::ostream& os, const Pcfg& grammar)
  {
    os << "%start " << grammar.symbols()[grammar.start()].name();
    if (grammar.synthetic_start())
      os << " synthetic";
    os << '\n';
    char buffer[32];
    for (const auto& rule : grammar.rules()) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", rule.probability);
      os << grammar.rule_string(rule) << '\t' << buffer << '\n';
    }
  }

  inline Pcfg read_pcfg(std::istream& is)
  {
    struct Line
    {
      std::string              lhs;
      std::vector<std::string> rhs;
      double                   probability;
    };

    std::vector<Line> lines;
    std::string start;
    bool synthetic = false;
    std::string text;
    std::size_t number = 0;
    while (std::getline(is, text)) {
      ++ number;
      const auto where = "line " + std::to_string(number) + ": ";
      if (text.empty() || text.starts_with('#'))
        continue;
      if (text.starts_with("%start")) {
        std::istringstream fields(text.substr(6));
        std::string flag;
        fields >> start >> flag;
        synthetic = (flag == "synthetic");
        continue;
      }
      const auto tab = text.find('\t');
      if (tab == std::string::npos)
        throw Error(ErrorCode::MalformedGrammar, where + "missing tab before probability");
      std::istringstream fields(text.substr(0, tab));
      Line line;
      std::string arrow;
      fields >> line.lhs >> arrow;
      if (arrow != "→" && arrow != "->")
        throw Error(ErrorCode::MalformedGrammar, where + "expected '→' after the left-hand side");
      for (std::string symbol; fields >> symbol;)
        line.rhs.push_back(symbol);
      if (line.rhs.empty() || line.rhs.size() > 2)
        throw Error(ErrorCode::MalformedGrammar, where + "right-hand side must have one or two symbols");
      try {
        std::size_t used = 0;
        line.probability = std::stod(text.substr(tab + 1), &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedGrammar, where + "bad probability");
      }
      lines.push_back(std::move(line));
    }
    if (start.empty())
      throw Error(ErrorCode::MalformedGrammar, "missing %start header");

    Pcfg grammar;
    // exterior symbols first in sorted order, then interior; rhs symbols
    // that never occur as a lhs are terminals
    std::map<std::string, Symbol> nonterminals;
    for (const auto& line : lines)
      nonterminals.emplace(line.lhs, Symbol::parse(line.lhs));
    nonterminals.emplace(start, Symbol::parse(start));
    for (const auto& [name, symbol] : nonterminals)
      if (! symbol.interior())
        grammar.intern_symbol(symbol);
    for (const auto& [name, symbol] : nonterminals)
      if (symbol.interior())
        grammar.intern_symbol(symbol);

    for (const auto& line : lines) {
      Rule rule;
      rule.lhs = *grammar.find_symbol(line.lhs);
      rule.arity = static_cast<std::uint8_t>(line.rhs.size());
      for (std::size_t i = 0; i != line.rhs.size(); ++ i) {
        if (nonterminals.count(line.rhs[i]))
          rule.rhs[i] = {false, *grammar.find_symbol(line.rhs[i])};
        else
          rule.rhs[i] = {true, grammar.intern_terminal(line.rhs[i])};
      }
      rule.probability = line.probability;
      grammar.add_rule(rule);
    }
    grammar.set_start(*grammar.find_symbol(start), synthetic);
    grammar.finalize();
    return grammar;
  }
}

#endif
