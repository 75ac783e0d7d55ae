// -*- mode: c++ -*-

#ifndef DOP_TRANSFORM_HPP
#define DOP_TRANSFORM_HPP

// treebank cleaning and n-ary <-> binary conversion

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <dop/error.hpp>
#include <dop/tree.hpp>

namespace dop
{
  enum class BinarizationScheme { Correct, Continued, Simple };

  inline std::string_view to_string(BinarizationScheme scheme)
  {
    switch (scheme) {
    case BinarizationScheme::Correct:   return "correct";
    case BinarizationScheme::Continued: return "continued";
    case BinarizationScheme::Simple:    return "simple";
    }
    return "correct";
  }

  inline BinarizationScheme parse_scheme(std::string_view name)
  {
    if (name == "correct")   return BinarizationScheme::Correct;
    if (name == "continued") return BinarizationScheme::Continued;
    if (name == "simple")    return BinarizationScheme::Simple;
    throw Error(ErrorCode::Usage, "unknown binarization scheme '" + std::string(name) + "'");
  }

  inline const std::set<std::string>& default_empty_markers()
  {
    static const std::set<std::string> markers{"-NONE-"};
    return markers;
  }

  // Removes every subtree whose yield consists only of empty elements. A node
  // counts as empty when it is an empty-marker terminal or carries an
  // empty-marker label (raw Penn puts traces under a -NONE- preterminal).
  inline std::optional<Tree> strip_epsilon(const Tree& tree,
                                           const std::set<std::string>& markers = default_empty_markers())
  {
    if (markers.count(tree.label))
      return std::nullopt;
    if (! tree.is_internal())
      return tree;

    Tree out = Tree::node(tree.label, {});
    for (const auto& child : tree.children)
      if (auto kept = strip_epsilon(child, markers))
        out.children.push_back(std::move(*kept));
    if (out.children.empty())
      return std::nullopt;
    return out;
  }

  // X over a single nonterminal Y is replaced by Y; preterminals survive.
  inline Tree collapse_unary(const Tree& tree)
  {
    if (! tree.is_internal())
      return tree;
    Tree out = Tree::node(tree.label, {});
    out.children.reserve(tree.children.size());
    for (const auto& child : tree.children)
      out.children.push_back(collapse_unary(child));
    while (out.children.size() == 1 && out.children.front().is_internal()) {
      Tree child = std::move(out.children.front());
      out = std::move(child);
    }
    return out;
  }

  namespace detail
  {
    inline constexpr std::string_view correct_prefix   = "*_";
    inline constexpr std::string_view continued_suffix = "_*";

    inline bool is_correct_symbol(std::string_view label) { return label.starts_with(correct_prefix); }
    inline bool is_continued_symbol(std::string_view label) { return label.size() > 2 && label.ends_with(continued_suffix); }

    inline std::string introduced_label(const std::string& parent, const std::vector<Tree>& children,
                                        std::size_t first, BinarizationScheme scheme)
    {
      switch (scheme) {
      case BinarizationScheme::Correct: {
        std::string label(correct_prefix);
        for (std::size_t i = first; i < children.size(); ++ i)
          label += children[i].label;
        return label;
      }
      case BinarizationScheme::Continued:
        return parent + std::string(continued_suffix);
      case BinarizationScheme::Simple:
        return parent;
      }
      return parent;
    }

    template <typename Predicate>
    Tree splice(const Tree& tree, Predicate introduced)
    {
      if (! tree.is_internal())
        return tree;
      Tree out = Tree::node(tree.label, {});
      for (const auto& child : tree.children) {
        Tree restored = splice(child, introduced);
        if (restored.is_internal() && introduced(restored.label))
          std::move(restored.children.begin(), restored.children.end(), std::back_inserter(out.children));
        else
          out.children.push_back(std::move(restored));
      }
      return out;
    }
  }

  // Right-branching cascade: (A c1 c2 ... ck) -> (A c1 (N c2 (N c3 ... ck))).
  // Unary nonterminal chains are left alone (callers collapse them first
  // unless they opt out).
  inline Tree binarize(const Tree& tree, BinarizationScheme scheme)
  {
    if (! tree.is_internal())
      return tree;

    std::vector<Tree> children;
    children.reserve(tree.children.size());
    for (const auto& child : tree.children)
      children.push_back(binarize(child, scheme));

    if (children.size() <= 2)
      return Tree::node(tree.label, std::move(children));

    // labels first, they read the children that get moved below
    const std::size_t k = children.size();
    std::vector<std::string> labels(k);
    for (std::size_t i = 1; i + 1 < k; ++ i)
      labels[i] = detail::introduced_label(tree.label, children, i, scheme);

    Tree spine = Tree::node(std::move(labels[k - 2]), {std::move(children[k - 2]), std::move(children[k - 1])});
    for (std::size_t i = k - 2; i-- > 1;)
      spine = Tree::node(std::move(labels[i]), {std::move(children[i]), std::move(spine)});
    return Tree::node(tree.label, {std::move(children[0]), std::move(spine)});
  }

  inline Tree debinarize(const Tree& tree, BinarizationScheme scheme)
  {
    switch (scheme) {
    case BinarizationScheme::Correct:
      return detail::splice(tree, [](std::string_view label) { return detail::is_correct_symbol(label); });
    case BinarizationScheme::Continued:
      return detail::splice(tree, [](std::string_view label) { return detail::is_continued_symbol(label); });
    case BinarizationScheme::Simple:
      break;
    }
    throw Error(ErrorCode::IrreversibleScheme, "the simple scheme reuses original labels and cannot be inverted");
  }

  // splices out symbols introduced by either reversible scheme
  inline Tree strip_introduced(const Tree& tree)
  {
    return detail::splice(tree, [](std::string_view label) {
      return detail::is_correct_symbol(label) || detail::is_continued_symbol(label);
    });
  }

  inline bool is_binary_form(const Tree& tree)
  {
    if (! tree.is_internal())
      return true;
    if (tree.children.size() == 1)
      return tree.children.front().is_terminal();
    if (tree.children.size() != 2)
      return false;
    return is_binary_form(tree.children[0]) && is_binary_form(tree.children[1]);
  }

  struct PreprocessOptions
  {
    BinarizationScheme    scheme       = BinarizationScheme::Correct;
    bool                  retain_unary = false;
    bool                  words_to_pos = false;
    std::set<std::string> empty_markers = default_empty_markers();
  };

  // full ingestion pipeline; trees that vanish entirely are dropped
  inline std::vector<Tree> preprocess(const std::vector<Tree>& corpus, const PreprocessOptions& options)
  {
    std::vector<Tree> out;
    out.reserve(corpus.size());
    for (const auto& raw : corpus) {
      auto stripped = strip_epsilon(raw, options.empty_markers);
      if (! stripped)
        continue;
      Tree tree = options.words_to_pos ? words_to_pos(*stripped) : std::move(*stripped);
      if (! options.retain_unary)
        tree = collapse_unary(tree);
      out.push_back(binarize(tree, options.scheme));
    }
    return out;
  }
}

#endif
