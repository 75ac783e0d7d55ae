// -*- mode: c++ -*-

#ifndef DOP_CHART_HPP
#define DOP_CHART_HPP

// Inside/outside chart over a binary/lexical PCFG, constituent posteriors,
// max-product derivation and derivation sampling.
//
// Reduced-grammar derivation probabilities (products of 1/a_j terms)
// underflow doubles on real treebanks, so every chart cell keeps its
// mantissas next to one shared power-of-two exponent.

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <dop/error.hpp>
#include <dop/grammar.hpp>
#include <dop/posterior.hpp>
#include <dop/tree.hpp>

namespace dop
{
  namespace detail
  {
    inline constexpr int empty_exponent = INT_MIN;

    // triangular cell numbering, grouped by span length
    inline std::size_t cell_count(std::size_t n) { return n * (n + 1) / 2; }

    inline std::size_t cell_index(std::size_t n, std::size_t s, std::size_t t)
    {
      const std::size_t length = t - s + 1;
      // cells of length < L: sum_{l < L} (n - l + 1)
      const std::size_t before = (length - 1) * n - (length - 1) * (length - 2) / 2;
      return before + (s - 1);
    }
  }

  // Chart values for one sentence: value(s,t,X) = mantissa * 2^exponent(s,t).
  class ScaledTable
  {
  public:
    ScaledTable() = default;

    ScaledTable(std::size_t length, std::size_t symbols)
      : length_(length), symbols_(symbols),
        mantissa_(detail::cell_count(length) * symbols, 0.0),
        exponent_(detail::cell_count(length), detail::empty_exponent),
        active_(detail::cell_count(length)) {}

    std::size_t length() const { return length_; }
    std::size_t symbol_count() const { return symbols_; }

    std::size_t cell(std::size_t s, std::size_t t) const { return detail::cell_index(length_, s, t); }

    double mantissa(std::size_t cell, SymbolId symbol) const { return mantissa_[cell * symbols_ + symbol]; }
    int exponent(std::size_t cell) const { return exponent_[cell]; }
    bool empty(std::size_t cell) const { return exponent_[cell] == detail::empty_exponent; }
    const std::vector<SymbolId>& active(std::size_t cell) const { return active_[cell]; }

    double value(std::size_t s, std::size_t t, SymbolId symbol) const
    {
      const std::size_t c = cell(s, t);
      if (empty(c))
        return 0.0;
      return std::ldexp(mantissa(c, symbol), exponent_[c]);
    }

    // natural log of value(); -inf for zero entries
    double log_value(std::size_t s, std::size_t t, SymbolId symbol) const
    {
      const std::size_t c = cell(s, t);
      const double m = empty(c) ? 0.0 : mantissa(c, symbol);
      if (m == 0.0)
        return -std::numeric_limits<double>::infinity();
      return std::log(m) + exponent_[c] * std::log(2.0);
    }

    // accumulation interface used while filling a cell
    void open(std::size_t cell, int exponent) { exponent_[cell] = exponent; }

    void add(std::size_t cell, SymbolId symbol, double value)
    {
      if (value == 0.0)
        return;
      double& slot = mantissa_[cell * symbols_ + symbol];
      if (slot == 0.0)
        active_[cell].push_back(symbol);
      slot += value;
    }

    // rescales so the largest mantissa lies in [0.5, 1)
    void close(std::size_t cell)
    {
      auto& active = active_[cell];
      double largest = 0.0;
      for (SymbolId symbol : active)
        largest = std::max(largest, mantissa_[cell * symbols_ + symbol]);
      if (largest == 0.0) {
        active.clear();
        exponent_[cell] = detail::empty_exponent;
        return;
      }
      int shift = 0;
      std::frexp(largest, &shift);
      for (SymbolId symbol : active)
        mantissa_[cell * symbols_ + symbol] = std::ldexp(mantissa_[cell * symbols_ + symbol], -shift);
      exponent_[cell] += shift;
      std::sort(active.begin(), active.end());
    }

  private:
    std::size_t                        length_  = 0;
    std::size_t                        symbols_ = 0;
    std::vector<double>                mantissa_;
    std::vector<int>                   exponent_;
    std::vector<std::vector<SymbolId>> active_;
  };

  using Sentence = std::vector<std::string>;

  namespace detail
  {
    inline std::vector<std::optional<TerminalId>> lookup_words(const Pcfg& grammar, const Sentence& sentence)
    {
      std::vector<std::optional<TerminalId>> words;
      words.reserve(sentence.size());
      for (const auto& word : sentence)
        words.push_back(grammar.find_terminal(word));
      return words;
    }

    inline int add_exponents(int x, int y)
    {
      if (x == empty_exponent || y == empty_exponent)
        return empty_exponent;
      return x + y;
    }
  }

  // e(s,t,X) = P(X =>* w_s ... w_t)
  class InsideTable
  {
  public:
    const Pcfg& grammar() const { return *grammar_; }
    const std::vector<std::optional<TerminalId>>& words() const { return words_; }
    std::size_t length() const { return table_.length(); }
    const ScaledTable& table() const { return table_; }

    double value(std::size_t s, std::size_t t, SymbolId symbol) const { return table_.value(s, t, symbol); }
    double log_value(std::size_t s, std::size_t t, SymbolId symbol) const { return table_.log_value(s, t, symbol); }

    // e(1,n,start)
    double total() const { return length() ? value(1, length(), grammar_->start()) : 0.0; }
    double log_total() const
    {
      return length() ? log_value(1, length(), grammar_->start()) : -std::numeric_limits<double>::infinity();
    }
    bool parsable() const { return length() && table_.mantissa(table_.cell(1, length()), grammar_->start()) > 0.0; }

  private:
    friend InsideTable inside(const Pcfg&, const Sentence&);

    const Pcfg*                            grammar_ = nullptr;
    std::vector<std::optional<TerminalId>> words_;
    ScaledTable                            table_;
  };

  inline InsideTable inside(const Pcfg& grammar, const Sentence& sentence)
  {
    InsideTable out;
    out.grammar_ = &grammar;
    out.words_ = detail::lookup_words(grammar, sentence);
    const std::size_t n = sentence.size();
    out.table_ = ScaledTable(n, grammar.symbols().size());
    auto& table = out.table_;
    const auto& words = out.words_;

    for (std::size_t s = 1; s <= n; ++ s) {
      const std::size_t c = table.cell(s, s);
      table.open(c, 0);
      if (words[s - 1])
        for (const auto& entry : grammar.lexical(*words[s - 1]))
          table.add(c, entry.lhs, entry.probability);
      table.close(c);
    }

    for (std::size_t length = 2; length <= n; ++ length)
      for (std::size_t s = 1; s + length - 1 <= n; ++ s) {
        const std::size_t t = s + length - 1;
        const std::size_t c = table.cell(s, t);

        // every batch is a product of at most two child cells; open the
        // cell at the largest batch exponent so all scale factors are <= 1
        int top = detail::empty_exponent;
        auto consider = [&](int exponent) { top = std::max(top, exponent); };
        if (length == 2 && words[s - 1] && words[t - 1])
          consider(0);
        for (std::size_t r = s; r < t; ++ r) {
          const std::size_t left = table.cell(s, r);
          const std::size_t right = table.cell(r + 1, t);
          consider(detail::add_exponents(table.exponent(left), table.exponent(right)));
          if (r == s && words[s - 1])
            consider(table.exponent(right));
          if (r == t - 1 && words[t - 1])
            consider(table.exponent(left));
        }
        if (top == detail::empty_exponent)
          continue;
        table.open(c, top);

        if (length == 2 && words[s - 1] && words[t - 1]) {
          const double scale = std::ldexp(1.0, -top);
          for (const auto& entry : grammar.double_terminal(*words[s - 1]))
            if (entry.right == *words[t - 1])
              table.add(c, entry.lhs, entry.probability * scale);
        }

        for (std::size_t r = s; r < t; ++ r) {
          const std::size_t left = table.cell(s, r);
          const std::size_t right = table.cell(r + 1, t);

          const int both = detail::add_exponents(table.exponent(left), table.exponent(right));
          if (both != detail::empty_exponent) {
            const double scale = std::ldexp(1.0, both - top);
            for (SymbolId y : table.active(left)) {
              const double ey = table.mantissa(left, y) * scale;
              for (const auto& entry : grammar.binary_by_left(y)) {
                const double ez = table.mantissa(right, entry.other);
                if (ez != 0.0)
                  table.add(c, entry.lhs, entry.probability * ey * ez);
              }
            }
          }

          if (r == s && words[s - 1] && ! table.empty(right)) {
            const double scale = std::ldexp(1.0, table.exponent(right) - top);
            for (const auto& entry : grammar.left_terminal(*words[s - 1])) {
              const double ez = table.mantissa(right, entry.other);
              if (ez != 0.0)
                table.add(c, entry.lhs, entry.probability * ez * scale);
            }
          }

          if (r == t - 1 && words[t - 1] && ! table.empty(left)) {
            const double scale = std::ldexp(1.0, table.exponent(left) - top);
            for (const auto& entry : grammar.right_terminal(*words[t - 1])) {
              const double ey = table.mantissa(left, entry.other);
              if (ey != 0.0)
                table.add(c, entry.lhs, entry.probability * ey * scale);
            }
          }
        }
        table.close(c);
      }

    // synthetic start over the whole sentence
    if (n && grammar.synthetic_start()) {
      const std::size_t c = table.cell(1, n);
      if (! table.empty(c)) {
        double sum = 0.0;
        for (const auto& entry : grammar.start_rules())
          sum += entry.probability * table.mantissa(c, entry.other);
        table.add(c, grammar.start(), sum);
        table.close(c);
      }
    }
    return out;
  }

  // f(s,t,X) = P(S =>* w_1 ... w_{s-1} X w_{t+1} ... w_n); only filled
  // where e(s,t,X) > 0, which is everywhere the posterior can be non-zero
  class OutsideTable
  {
  public:
    std::size_t length() const { return table_.length(); }
    const ScaledTable& table() const { return table_; }
    double value(std::size_t s, std::size_t t, SymbolId symbol) const { return table_.value(s, t, symbol); }

  private:
    friend OutsideTable outside(const Pcfg&, const Sentence&, const InsideTable&);

    ScaledTable table_;
  };

  inline OutsideTable outside(const Pcfg& grammar, const Sentence& sentence, const InsideTable& e)
  {
    OutsideTable out;
    const std::size_t n = sentence.size();
    out.table_ = ScaledTable(n, grammar.symbols().size());
    auto& f = out.table_;
    const auto& in = e.table();
    const auto& words = e.words();
    if (! e.parsable())
      return out;

    {
      const std::size_t root = f.cell(1, n);
      f.open(root, 0);
      f.add(root, grammar.start(), 1.0);
      if (grammar.synthetic_start())
        for (const auto& entry : grammar.start_rules())
          if (in.mantissa(root, entry.other) != 0.0)
            f.add(root, entry.other, entry.probability);
      f.close(root);
    }

    std::vector<int> as_left(n + 2), as_right(n + 2);
    for (std::size_t length = n - 1; length >= 1; -- length) {
      for (std::size_t s = 1; s + length - 1 <= n; ++ s) {
        const std::size_t t = s + length - 1;
        const std::size_t c = f.cell(s, t);
        if (in.empty(c))
          continue;

        // exponent of each (parent, sibling) pair this cell pulls from
        int top = detail::empty_exponent;
        for (std::size_t u = t + 1; u <= n; ++ u) {
          as_left[u] = detail::add_exponents(f.exponent(f.cell(s, u)), in.exponent(in.cell(t + 1, u)));
          top = std::max(top, as_left[u]);
        }
        for (std::size_t u = 1; u < s; ++ u) {
          as_right[u] = detail::add_exponents(f.exponent(f.cell(u, t)), in.exponent(in.cell(u, s - 1)));
          top = std::max(top, as_right[u]);
        }
        const int next_exponent = t < n ? f.exponent(f.cell(s, t + 1)) : detail::empty_exponent;
        const int prev_exponent = s > 1 ? f.exponent(f.cell(s - 1, t)) : detail::empty_exponent;
        if (t < n && words[t])
          top = std::max(top, next_exponent);
        if (s > 1 && words[s - 2])
          top = std::max(top, prev_exponent);
        if (top == detail::empty_exponent)
          continue;
        f.open(c, top);

        for (SymbolId y : in.active(c)) {
          double sum = 0.0;

          // y as left child of X -> y Z over (s,u)
          for (const auto& entry : grammar.binary_by_left(y))
            for (std::size_t u = t + 1; u <= n; ++ u) {
              if (as_left[u] == detail::empty_exponent)
                continue;
              const double fx = f.mantissa(f.cell(s, u), entry.lhs);
              if (fx == 0.0)
                continue;
              const double ez = in.mantissa(in.cell(t + 1, u), entry.other);
              if (ez != 0.0)
                sum += entry.probability * fx * ez * std::ldexp(1.0, as_left[u] - top);
            }

          // y as right child of X -> Z y over (u,t)
          for (const auto& entry : grammar.binary_by_right(y))
            for (std::size_t u = 1; u < s; ++ u) {
              if (as_right[u] == detail::empty_exponent)
                continue;
              const double fx = f.mantissa(f.cell(u, t), entry.lhs);
              if (fx == 0.0)
                continue;
              const double ez = in.mantissa(in.cell(u, s - 1), entry.other);
              if (ez != 0.0)
                sum += entry.probability * fx * ez * std::ldexp(1.0, as_right[u] - top);
            }

          // X -> y w_{t+1} over (s,t+1)
          if (t < n && words[t] && next_exponent != detail::empty_exponent) {
            const std::size_t parent = f.cell(s, t + 1);
            for (const auto& entry : grammar.right_terminal(*words[t]))
              if (entry.other == y)
                sum += entry.probability * f.mantissa(parent, entry.lhs) * std::ldexp(1.0, next_exponent - top);
          }

          // X -> w_{s-1} y over (s-1,t)
          if (s > 1 && words[s - 2] && prev_exponent != detail::empty_exponent) {
            const std::size_t parent = f.cell(s - 1, t);
            for (const auto& entry : grammar.left_terminal(*words[s - 2]))
              if (entry.other == y)
                sum += entry.probability * f.mantissa(parent, entry.lhs) * std::ldexp(1.0, prev_exponent - top);
          }

          f.add(c, y, sum);
        }
        f.close(c);
      }
      if (length == 1)
        break;
    }
    return out;
  }

  namespace detail
  {
    // f * e / e(1,n,start) in the scaled representation
    inline double posterior(const InsideTable& e, const OutsideTable& f, std::size_t s, std::size_t t, SymbolId x)
    {
      const auto& in = e.table();
      const auto& out = f.table();
      const std::size_t c = in.cell(s, t);
      if (in.empty(c) || out.empty(c))
        return 0.0;
      const std::size_t root = in.cell(1, e.length());
      const SymbolId start = e.grammar().start();
      const double m = out.mantissa(c, x) * in.mantissa(c, x) / in.mantissa(root, start);
      return std::ldexp(m, out.exponent(c) + in.exponent(c) - in.exponent(root));
    }
  }

  // g(s,t,X) for one symbol (exterior or interior)
  inline double symbol_posterior(const InsideTable& e, const OutsideTable& f, std::size_t s, std::size_t t, SymbolId x)
  {
    if (! e.parsable())
      throw Error(ErrorCode::NoParse, "sentence has zero inside probability");
    return detail::posterior(e, f, s, t, x);
  }

  // Aggregates interior variants into their exterior label:
  // g(s,t,L) + sum_k g(s,t,L_k). The synthetic start symbol is left out.
  inline PosteriorTable<double> posteriors(const InsideTable& e, const OutsideTable& f)
  {
    if (! e.parsable())
      throw Error(ErrorCode::NoParse, "sentence has zero inside probability");
    const Pcfg& grammar = e.grammar();
    std::vector<std::string> labels;
    for (SymbolId id = 0; id != grammar.symbols().size(); ++ id)
      if (! (grammar.synthetic_start() && id == grammar.start()))
        labels.push_back(grammar.symbols()[id].base);
    PosteriorTable<double> table(e.length(), labels);

    std::vector<std::optional<std::size_t>> column(grammar.symbols().size());
    for (SymbolId id = 0; id != grammar.symbols().size(); ++ id)
      if (! (grammar.synthetic_start() && id == grammar.start()))
        column[id] = table.label_index(grammar.symbols()[id].base);

    const std::size_t n = e.length();
    for (std::size_t s = 1; s <= n; ++ s)
      for (std::size_t t = s; t <= n; ++ t) {
        const std::size_t c = e.table().cell(s, t);
        for (SymbolId x : e.table().active(c))
          if (column[x])
            table.at(s, t, *column[x]) += detail::posterior(e, f, s, t, x);
      }
    return table;
  }

  inline PosteriorTable<double> posteriors(const Pcfg& grammar, const Sentence& sentence)
  {
    const auto e = inside(grammar, sentence);
    const auto f = outside(grammar, sentence, e);
    return posteriors(e, f);
  }

  struct ViterbiResult
  {
    Tree   tree;             // labels are symbol names; interior symbols keep their @k
    double probability = 0;  // may underflow to 0 for long sentences; see log_probability
    double log_probability = -std::numeric_limits<double>::infinity();
  };

  // Max-product CKY. Ties prefer the lower rule index, then the smaller split.
  // The synthetic start node, if any, is not part of the returned tree.
  inline ViterbiResult viterbi_derivation(const Pcfg& grammar, const Sentence& sentence)
  {
    const std::size_t n = sentence.size();
    if (n == 0)
      throw Error(ErrorCode::NoParse, "empty sentence");
    const auto words = detail::lookup_words(grammar, sentence);
    const std::size_t symbols = grammar.symbols().size();
    constexpr double none = -std::numeric_limits<double>::infinity();
    constexpr std::uint32_t no_rule = std::numeric_limits<std::uint32_t>::max();

    struct Back
    {
      std::uint32_t rule  = no_rule;
      std::uint32_t split = 0;
    };

    std::vector<double> best(detail::cell_count(n) * symbols, none);
    std::vector<Back> back(best.size());
    std::vector<std::vector<SymbolId>> active(detail::cell_count(n));
    auto slot = [&](std::size_t s, std::size_t t, SymbolId x) { return detail::cell_index(n, s, t) * symbols + x; };

    // log sums of equal products can differ in the last bits depending on
    // the bracketing, so scores this close count as tied
    auto offer = [&](std::size_t s, std::size_t t, SymbolId x, double score, std::size_t rule, std::size_t split) {
      const std::size_t i = slot(s, t, x);
      Back& b = back[i];
      const double slack = best[i] == none ? 0.0 : 1e-12 * std::max(1.0, std::abs(best[i]));
      const bool tied = best[i] != none && std::abs(score - best[i]) <= slack;
      if ((! tied && score > best[i]) || (tied && (rule < b.rule || (rule == b.rule && split < b.split)))) {
        if (best[i] == none)
          active[detail::cell_index(n, s, t)].push_back(x);
        best[i] = score;
        b = {static_cast<std::uint32_t>(rule), static_cast<std::uint32_t>(split)};
      }
    };

    for (std::size_t s = 1; s <= n; ++ s)
      if (words[s - 1])
        for (const auto& entry : grammar.lexical(*words[s - 1]))
          offer(s, s, entry.lhs, std::log(entry.probability), entry.rule, s);

    for (std::size_t length = 2; length <= n; ++ length)
      for (std::size_t s = 1; s + length - 1 <= n; ++ s) {
        const std::size_t t = s + length - 1;
        if (length == 2 && words[s - 1] && words[t - 1])
          for (const auto& entry : grammar.double_terminal(*words[s - 1]))
            if (entry.right == *words[t - 1])
              offer(s, t, entry.lhs, std::log(entry.probability), entry.rule, s);
        for (std::size_t r = s; r < t; ++ r) {
          for (SymbolId y : active[detail::cell_index(n, s, r)]) {
            const double ly = best[slot(s, r, y)];
            for (const auto& entry : grammar.binary_by_left(y)) {
              const double lz = best[slot(r + 1, t, entry.other)];
              if (lz != none)
                offer(s, t, entry.lhs, std::log(entry.probability) + ly + lz, entry.rule, r);
            }
          }
          if (r == s && words[s - 1])
            for (const auto& entry : grammar.left_terminal(*words[s - 1])) {
              const double lz = best[slot(s + 1, t, entry.other)];
              if (lz != none)
                offer(s, t, entry.lhs, std::log(entry.probability) + lz, entry.rule, r);
            }
          if (r == t - 1 && words[t - 1])
            for (const auto& entry : grammar.right_terminal(*words[t - 1])) {
              const double ly = best[slot(s, t - 1, entry.other)];
              if (ly != none)
                offer(s, t, entry.lhs, std::log(entry.probability) + ly, entry.rule, r);
            }
        }
      }

    SymbolId root = grammar.start();
    double score = best[slot(1, n, root)];
    if (grammar.synthetic_start()) {
      score = none;
      std::size_t chosen_rule = no_rule;
      for (const auto& entry : grammar.start_rules()) {
        const double candidate = best[slot(1, n, entry.other)];
        if (candidate == none)
          continue;
        const double total = std::log(entry.probability) + candidate;
        if (total > score || (total == score && entry.rule < chosen_rule)) {
          score = total;
          root = entry.other;
          chosen_rule = entry.rule;
        }
      }
    }
    if (score == none)
      throw Error(ErrorCode::NoParse, "no derivation of the sentence");

    auto build = [&](auto& self, std::size_t s, std::size_t t, SymbolId x) -> Tree {
      const Back& b = back[slot(s, t, x)];
      const Rule& rule = grammar.rules()[b.rule];
      Tree node = Tree::node(grammar.symbols()[x].name(), {});
      if (rule.arity == 1) {
        node.children.push_back(Tree::leaf(sentence[s - 1]));
        return node;
      }
      const std::size_t r = b.split;
      const auto& [left, right] = rule.rhs;
      node.children.push_back(left.terminal ? Tree::leaf(sentence[s - 1]) : self(self, s, r, left.id));
      node.children.push_back(right.terminal ? Tree::leaf(sentence[t - 1]) : self(self, r + 1, t, right.id));
      return node;
    };

    ViterbiResult result;
    result.tree = build(build, 1, n, root);
    result.log_probability = score;
    result.probability = std::exp(score);
    return result;
  }

  // 64-bit Mersenne twister with a fixed double conversion, so samples are
  // reproducible across standard libraries
  class SampleRng
  {
  public:
    explicit SampleRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 engine_;
  };

  namespace detail
  {
    struct Option
    {
      std::size_t rule;
      std::size_t split;
      int         exponent;
      double      mantissa;
    };

    inline std::size_t draw(std::vector<Option>& options, SampleRng& rng)
    {
      int top = empty_exponent;
      for (const auto& option : options)
        top = std::max(top, option.exponent);
      double total = 0.0;
      for (auto& option : options) {
        option.mantissa = std::ldexp(option.mantissa, option.exponent - top);
        total += option.mantissa;
      }
      double point = rng.uniform() * total;
      for (std::size_t i = 0; i != options.size(); ++ i) {
        if (point < options[i].mantissa)
          return i;
        point -= options[i].mantissa;
      }
      // rounding at the top end
      for (std::size_t i = options.size(); i-- > 0;)
        if (options[i].mantissa > 0.0)
          return i;
      return 0;
    }
  }

  // Draws complete derivations top-down from P(derivation | sentence) and
  // returns their trees with interior symbols erased.
  inline std::vector<Tree> sample_derivations(const Pcfg& grammar, const Sentence& sentence, const InsideTable& e,
                                              std::size_t count, std::uint64_t seed)
  {
    if (! e.parsable())
      throw Error(ErrorCode::NoParse, "sentence has zero inside probability");
    const auto& in = e.table();
    const auto& words = e.words();
    const std::size_t n = sentence.size();
    SampleRng rng(seed);
    std::vector<detail::Option> options;

    auto expand = [&](auto& self, std::size_t s, std::size_t t, SymbolId x) -> Tree {
      options.clear();
      for (std::size_t index : grammar.rules_for(x)) {
        const Rule& rule = grammar.rules()[index];
        if (rule.arity == 1) {
          if (rule.rhs[0].terminal && s == t && words[s - 1] == rule.rhs[0].id)
            options.push_back({index, s, 0, rule.probability});
          continue;
        }
        const auto& [left, right] = rule.rhs;
        if (left.terminal && right.terminal) {
          if (t == s + 1 && words[s - 1] == left.id && words[t - 1] == right.id)
            options.push_back({index, s, 0, rule.probability});
        } else if (left.terminal) {
          if (t == s || words[s - 1] != left.id)
            continue;
          const std::size_t c = in.cell(s + 1, t);
          if (in.mantissa(c, right.id) != 0.0)
            options.push_back({index, s, in.exponent(c), rule.probability * in.mantissa(c, right.id)});
        } else if (right.terminal) {
          if (t == s || words[t - 1] != right.id)
            continue;
          const std::size_t c = in.cell(s, t - 1);
          if (in.mantissa(c, left.id) != 0.0)
            options.push_back({index, t - 1, in.exponent(c), rule.probability * in.mantissa(c, left.id)});
        } else {
          for (std::size_t r = s; r < t; ++ r) {
            const std::size_t lc = in.cell(s, r);
            const std::size_t rc = in.cell(r + 1, t);
            const double m = in.mantissa(lc, left.id) * in.mantissa(rc, right.id);
            if (m != 0.0)
              options.push_back({index, r, in.exponent(lc) + in.exponent(rc), rule.probability * m});
          }
        }
      }
      const auto chosen = options[detail::draw(options, rng)];
      const Rule& rule = grammar.rules()[chosen.rule];
      Tree node = Tree::node(grammar.symbols()[x].base, {});
      if (rule.arity == 1) {
        node.children.push_back(Tree::leaf(sentence[s - 1]));
        return node;
      }
      const std::size_t r = chosen.split;
      const auto [left, right] = rule.rhs;
      node.children.push_back(left.terminal ? Tree::leaf(sentence[s - 1]) : self(self, s, r, left.id));
      node.children.push_back(right.terminal ? Tree::leaf(sentence[t - 1]) : self(self, r + 1, t, right.id));
      return node;
    };

    std::vector<Tree> samples;
    samples.reserve(count);
    const std::size_t root = in.cell(1, n);
    for (std::size_t i = 0; i != count; ++ i) {
      SymbolId x = grammar.start();
      if (grammar.synthetic_start()) {
        options.clear();
        for (const auto& entry : grammar.start_rules())
          if (in.mantissa(root, entry.other) != 0.0)
            options.push_back({entry.rule, 0, 0, entry.probability * in.mantissa(root, entry.other)});
        x = grammar.rules()[options[detail::draw(options, rng)].rule].rhs[0].id;
      }
      samples.push_back(expand(expand, 1, n, x));
    }
    return samples;
  }

  // most frequent tree; ties go to the lexicographically smallest written form
  inline Tree monte_carlo_parse(const std::vector<Tree>& samples)
  {
    if (samples.empty())
      throw Error(ErrorCode::NoParse, "no samples");
    std::map<std::string, std::size_t> counts;
    for (const auto& tree : samples)
      ++ counts[write_penn(tree)];
    auto best = counts.begin();
    for (auto iter = counts.begin(); iter != counts.end(); ++ iter)
      if (iter->second > best->second)
        best = iter;
    return read_tree(best->first, {.allow_reserved = true});
  }
}

#endif
