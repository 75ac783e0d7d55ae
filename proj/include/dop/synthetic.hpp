// -*- mode: c++ -*-

#ifndef DOP_SYNTHETIC_HPP
#define DOP_SYNTHETIC_HPP

// A small seeded generator of English-like POS treebanks. Trees come out
// the way raw treebank trees do: n-ary, with empty -NONE- subjects, unary
// SBAR and ADVP nodes, and sentence-final periods.

#include <cstdint>
#include <string>
#include <vector>

#include <dop/eval.hpp>
#include <dop/tree.hpp>

namespace dop
{
  struct SyntheticOptions
  {
    std::size_t min_length = 2;   // terminals, empty elements excluded
    std::size_t max_length = 40;
    std::size_t max_depth  = 6;
  };

  class SyntheticTreebank
  {
  public:
    explicit SyntheticTreebank(std::uint64_t seed, SyntheticOptions options = {})
      : rng_(seed, 0x5eed), options_(options) {}

    std::vector<Tree> generate(std::size_t count)
    {
      std::vector<Tree> out;
      while (out.size() != count) {
        Tree tree = sentence();
        const std::size_t n = words(tree);
        if (n >= options_.min_length && n <= options_.max_length)
          out.push_back(std::move(tree));
      }
      return out;
    }

    Tree sentence()
    {
      Tree s = clause(0);
      if (chance(85))
        s.children.push_back(Tree::leaf("."));
      return s;
    }

  private:
    bool chance(unsigned percent) { return rng_.below(100) < percent; }

    static Tree pos(const char* tag) { return Tree::leaf(tag); }

    static std::size_t words(const Tree& tree)
    {
      std::size_t n = 0;
      for (const auto& word : yield_of(tree))
        n += word != "-NONE-";
      return n;
    }

    Tree clause(std::size_t depth)
    {
      Tree s = Tree::node("S", {});
      if (chance(8))
        s.children.push_back(Tree::node("NP", {pos("-NONE-")}));
      else if (chance(10))
        s.children.push_back(Tree::node("ADVP", {pos("ADV")}));
      if (s.children.empty() || s.children.back().label == "ADVP")
        s.children.push_back(noun_phrase(depth + 1));
      s.children.push_back(verb_phrase(depth + 1));
      if (depth < 2 && chance(7)) {
        s.children.push_back(pos("CC"));
        s.children.push_back(clause(depth + 1));
      }
      return s;
    }

    Tree noun_phrase(std::size_t depth)
    {
      const unsigned roll = static_cast<unsigned>(rng_.below(100));
      Tree np = Tree::node("NP", {});
      if (roll < 15)
        np.children = {pos("PRP")};
      else if (roll < 30) {
        np.children = {pos("PN")};
        if (chance(40))
          np.children.push_back(pos("PN"));
      } else {
        np.children = {pos("DET")};
        if (chance(35))
          np.children.push_back(chance(25) ? Tree::node("ADJP", {pos("ADV"), pos("ADJ")}) : pos("ADJ"));
        if (chance(20))
          np.children.push_back(pos("N"));
        np.children.push_back(pos("N"));
      }
      if (depth < options_.max_depth && chance(depth < 3 ? 30 : 10))
        return Tree::node("NP", {std::move(np), prepositional_phrase(depth + 1)});
      return np;
    }

    Tree prepositional_phrase(std::size_t depth)
    {
      return Tree::node("PP", {pos("P"), noun_phrase(depth + 1)});
    }

    Tree verb_phrase(std::size_t depth)
    {
      Tree vp = Tree::node("VP", {});
      if (depth < options_.max_depth && chance(12)) {
        vp.children = {pos("MD"), verb_phrase(depth + 1)};
        return vp;
      }
      vp.children.push_back(pos("V"));
      const unsigned roll = static_cast<unsigned>(rng_.below(100));
      // roll < 15: intransitive
      if (roll >= 15 && (roll < 60 || depth >= options_.max_depth))
        vp.children.push_back(noun_phrase(depth + 1));
      else if (roll < 75) {
        vp.children.push_back(noun_phrase(depth + 1));
        vp.children.push_back(prepositional_phrase(depth + 1));
      } else if (roll < 85)
        vp.children.push_back(prepositional_phrase(depth + 1));
      else
        vp.children.push_back(Tree::node("SBAR", {clause(depth + 1)}));
      if (chance(10))
        vp.children.push_back(Tree::node("ADVP", {pos("ADV")}));
      return vp;
    }

    SplitRng         rng_;
    SyntheticOptions options_;
  };

  inline std::vector<Tree> synthetic_treebank(std::size_t count, std::uint64_t seed, SyntheticOptions options = {})
  {
    return SyntheticTreebank(seed, options).generate(count);
  }
}

#endif
