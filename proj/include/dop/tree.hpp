// -*- mode: c++ -*-

#ifndef DOP_TREE_HPP
#define DOP_TREE_HPP

// labeled n-ary trees and the Penn bracketed reader/writer

#include <cctype>
#include <cstddef>
#include <istream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <dop/error.hpp>

namespace dop
{
  // A node is either
  //  - an internal nonterminal (children non-empty),
  //  - a terminal leaf (terminal == true), or
  //  - a substitution site: a childless nonterminal, legal only inside
  //    elementary trees.
  struct Tree
  {
    std::string       label;
    std::vector<Tree> children;
    bool              terminal = false;

    static Tree leaf(std::string symbol) { return Tree{std::move(symbol), {}, true}; }
    static Tree site(std::string symbol) { return Tree{std::move(symbol), {}, false}; }
    static Tree node(std::string label, std::vector<Tree> children)
    {
      return Tree{std::move(label), std::move(children), false};
    }

    bool is_terminal() const { return terminal; }
    bool is_site() const { return ! terminal && children.empty(); }
    bool is_internal() const { return ! children.empty(); }
    bool is_preterminal() const { return children.size() == 1 && children.front().terminal; }

    friend bool operator==(const Tree&, const Tree&) = default;
  };

  // 1-based inclusive terminal span of a constituent
  struct Span
  {
    std::size_t begin = 0;
    std::size_t end   = 0;
    std::string label;

    std::size_t length() const { return end - begin + 1; }

    friend bool operator==(const Span&, const Span&) = default;
  };

  struct ReadOptions
  {
    // binarized and parser-produced trees carry '*' symbols; treebank input must not
    bool allow_reserved = false;
  };

  namespace detail
  {
    inline bool is_reserved_label(std::string_view label)
    {
      return label.find('*') != std::string_view::npos || label.find('@') != std::string_view::npos;
    }

    class PennLexer
    {
    public:
      explicit PennLexer(std::string_view text) : text_(text) {}

      enum class Kind { Open, Close, Symbol, End };

      struct Token
      {
        Kind             kind;
        std::string_view symbol;
        std::size_t      position;
      };

      Token peek()
      {
        if (! peeked_) {
          token_  = scan();
          peeked_ = true;
        }
        return token_;
      }

      Token next()
      {
        Token token = peek();
        peeked_ = false;
        return token;
      }

    private:
      Token scan()
      {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
          ++ pos_;
        if (pos_ == text_.size())
          return {Kind::End, {}, pos_};
        const std::size_t start = pos_;
        if (text_[pos_] == '(') {
          ++ pos_;
          return {Kind::Open, {}, start};
        }
        if (text_[pos_] == ')') {
          ++ pos_;
          return {Kind::Close, {}, start};
        }
        while (pos_ < text_.size()) {
          const char c = text_[pos_];
          if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c)))
            break;
          ++ pos_;
        }
        return {Kind::Symbol, text_.substr(start, pos_ - start), start};
      }

      std::string_view text_;
      std::size_t      pos_    = 0;
      bool             peeked_ = false;
      Token            token_{Kind::End, {}, 0};
    };

    inline std::string describe_position(std::string_view text, std::size_t position)
    {
      std::size_t line = 1;
      std::size_t column = 1;
      for (std::size_t i = 0; i < position && i < text.size(); ++ i) {
        if (text[i] == '\n') {
          ++ line;
          column = 1;
        } else
          ++ column;
      }
      return "offset " + std::to_string(position) + " (line " + std::to_string(line) + ", column "
             + std::to_string(column) + ")";
    }

    inline Tree read_bracketed(PennLexer& lexer, std::string_view text, const ReadOptions& options, bool top)
    {
      const auto open = lexer.next();  // consumes '('

      std::string label;
      if (lexer.peek().kind == PennLexer::Kind::Symbol)
        label = std::string(lexer.next().symbol);

      std::vector<Tree> children;
      for (;;) {
        const auto token = lexer.peek();
        if (token.kind == PennLexer::Kind::End)
          throw Error(ErrorCode::UnbalancedParens,
                      "missing ')' for '(' at " + describe_position(text, open.position));
        if (token.kind == PennLexer::Kind::Close) {
          lexer.next();
          break;
        }
        if (token.kind == PennLexer::Kind::Open)
          children.push_back(read_bracketed(lexer, text, options, false));
        else
          children.push_back(Tree::leaf(std::string(lexer.next().symbol)));
      }

      if (children.empty())
        throw Error(ErrorCode::EmptyNode, "node without children at " + describe_position(text, open.position));

      if (label.empty()) {
        // Penn wraps each sentence in an unlabeled bracket: "( (S ...) )"
        if (top && children.size() == 1 && children.front().is_internal())
          return std::move(children.front());
        throw Error(ErrorCode::EmptyNode, "unlabeled node at " + describe_position(text, open.position));
      }
      if (! options.allow_reserved && is_reserved_label(label))
        throw Error(ErrorCode::ReservedLabel,
                    "label '" + label + "' uses a reserved character at " + describe_position(text, open.position));

      return Tree::node(std::move(label), std::move(children));
    }

    inline void write_penn(const Tree& tree, std::string& out)
    {
      if (! tree.is_internal()) {
        out += tree.label;
        return;
      }
      out += '(';
      out += tree.label;
      for (const auto& child : tree.children) {
        out += ' ';
        write_penn(child, out);
      }
      out += ')';
    }
  }

  inline std::vector<Tree> read_penn(std::string_view text, const ReadOptions& options = {})
  {
    detail::PennLexer lexer(text);
    std::vector<Tree> trees;
    for (;;) {
      const auto token = lexer.peek();
      if (token.kind == detail::PennLexer::Kind::End)
        break;
      if (token.kind != detail::PennLexer::Kind::Open)
        throw Error(ErrorCode::UnbalancedParens,
                    "unexpected token outside brackets at " + detail::describe_position(text, token.position));
      trees.push_back(detail::read_bracketed(lexer, text, options, true));
    }
    return trees;
  }

  inline std::vector<Tree> read_penn(std::istream& is, const ReadOptions& options = {})
  {
    const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    return read_penn(std::string_view(text), options);
  }

  inline Tree read_tree(std::string_view text, const ReadOptions& options = {})
  {
    auto trees = read_penn(text, options);
    if (trees.size() != 1)
      throw Error(ErrorCode::UnbalancedParens, "expected exactly one tree, found " + std::to_string(trees.size()));
    return std::move(trees.front());
  }

  inline std::string write_penn(const Tree& tree)
  {
    std::string out;
    detail::write_penn(tree, out);
    return out;
  }

  inline std::ostream& operator<<(std::ostream& os, const Tree& tree) { return os << write_penn(tree); }

  namespace detail
  {
    inline void collect_yield(const Tree& tree, std::vector<std::string>& out)
    {
      if (! tree.is_internal()) {
        out.push_back(tree.label);
        return;
      }
      for (const auto& child : tree.children)
        collect_yield(child, out);
    }

    inline std::size_t collect_spans(const Tree& tree, std::size_t begin, std::vector<Span>& out)
    {
      if (! tree.is_internal())
        return 1;
      const std::size_t slot = out.size();
      out.push_back({begin, begin, tree.label});
      std::size_t width = 0;
      for (const auto& child : tree.children)
        width += collect_spans(child, begin + width, out);
      out[slot].end = begin + width - 1;
      return width;
    }
  }

  // leaves left to right; substitution sites count as leaves
  inline std::vector<std::string> yield_of(const Tree& tree)
  {
    std::vector<std::string> out;
    detail::collect_yield(tree, out);
    return out;
  }

  // every internal node's span, preorder
  inline std::vector<Span> constituent_spans(const Tree& tree)
  {
    std::vector<Span> out;
    detail::collect_spans(tree, 1, out);
    return out;
  }

  inline std::size_t count_internal_nodes(const Tree& tree)
  {
    if (! tree.is_internal())
      return 0;
    std::size_t count = 1;
    for (const auto& child : tree.children)
      count += count_internal_nodes(child);
    return count;
  }

  // Raw Penn corpora carry words beneath POS tags; the parser works on POS
  // strings, so each preterminal below the root becomes a terminal leaf.
  inline Tree words_to_pos(const Tree& tree)
  {
    Tree out = Tree::node(tree.label, {});
    out.children.reserve(tree.children.size());
    for (const auto& child : tree.children) {
      if (child.is_preterminal())
        out.children.push_back(Tree::leaf(child.label));
      else if (child.is_internal())
        out.children.push_back(words_to_pos(child));
      else
        out.children.push_back(child);
    }
    return out;
  }
}

#endif
