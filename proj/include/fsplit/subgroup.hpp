#pragma once

// Stallings automata for finitely generated subgroups of a free group.
// States carry a partial deterministic transition per signed letter, with
// built-in inverse consistency; the graph is kept folded and core.

#include <optional>
#include <string>
#include <vector>

#include "fsplit/word.hpp"

namespace fsplit {

class SubgroupAutomaton {
 public:
  explicit SubgroupAutomaton(int rank = 2);  // trivial subgroup

  static SubgroupAutomaton from_generators(int rank, const std::vector<Word>& gens);

  int rank_of_ambient() const { return rank_; }
  int num_states() const { return static_cast<int>(next_.size()); }
  int basepoint() const { return base_; }
  bool trivial() const;
  int rank() const;  // edges - states + 1 on the core

  // partial transition; -1 when absent
  int step(int state, int letter) const;

  bool member(const Word& w) const;
  bool equals(const SubgroupAutomaton& o) const;  // same subgroup of F

  // shortlex-minimal representative of the left coset g*H
  Word coset_rep(const Word& g) const;

  // free basis of the subgroup (non-tree edges of a spanning tree)
  std::vector<Word> free_basis() const;

  // expression of u (a member) as a product of the generators this automaton
  // was folded from; empty optional when u is not a member.
  std::optional<std::vector<std::pair<int, int>>> express(const Word& u) const;
  // pairs (generator index, +1/-1)

  SubgroupAutomaton conjugated(const Word& c) const;  // c H c^-1
  static SubgroupAutomaton intersection(const SubgroupAutomaton& a, const SubgroupAutomaton& b);

  // c with  a == c * b * c^-1  (as subgroups), if any
  static std::optional<Word> conjugator(const SubgroupAutomaton& a, const SubgroupAutomaton& b);

  // some element of c0*A  intersect  d0*B, if any
  static std::optional<Word> coset_intersection(const Word& c0, const SubgroupAutomaton& A,
                                                const Word& d0, const SubgroupAutomaton& B);

  // y in A * g * B ?
  static bool double_coset_member(const SubgroupAutomaton& A, const Word& g,
                                  const SubgroupAutomaton& B, const Word& y);

  // all subgroup elements of reduced length <= len (includes the identity)
  std::vector<Word> elements_up_to(int len) const;

  std::string canonical_string() const;
  const std::vector<Word>& generators() const { return gens_; }

 private:
  int rank_;
  int base_ = 0;
  std::vector<std::vector<int>> next_;  // [state][letter index 0..2r-1]
  std::vector<Word> gens_;

  int letter_index(int letter) const;
  int add_state();
  void set_edge(int s, int letter, int t);
  void trim_core();
};

// w with images[i] = w * x_i * w^-1 for every basis generator, if any.
std::optional<Word> inner_witness(int rank, const std::vector<Word>& images);

// w with targets[i] = w * sources[i] * w^-1 for all i, if any.
std::optional<Word> common_conjugator(const std::vector<Word>& sources,
                                      const std::vector<Word>& targets);

// Expression of u in terms of arbitrary generating words (u must lie in the
// subgroup they generate); returns the sequence of (index, sign).
std::optional<std::vector<std::pair<int, int>>> express_in(int rank, const std::vector<Word>& gens,
                                                           const Word& u);

// Reusable expression machine (folding with history performed once).
class GenExpresser {
 public:
  GenExpresser() = default;
  GenExpresser(int rank, std::vector<Word> gens);
  std::optional<std::vector<std::pair<int, int>>> express(const Word& u) const;

 private:
  std::vector<Word> gens_;
  int base_ = 0;
  // (state, letter) -> (state, formal word)
  std::vector<std::vector<std::pair<int, std::vector<std::pair<int, int>>>>> trans_;
  std::vector<std::vector<int>> keys_;  // letters per state, aligned with trans_
};

}  // namespace fsplit
