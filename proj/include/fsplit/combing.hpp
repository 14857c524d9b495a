#pragma once

// Foldable sequences and combing rectangles: commutative ladders of foldable
// rows joined by columnwise collapses with the preimage compatibility
// condition sigma_{i-1} = f_i^{-1}(sigma_i).

#include "fsplit/fold.hpp"

namespace fsplit {

struct FoldableSequence {
  std::vector<Sp> splittings;  // S_0 .. S_K
  std::vector<EqMap> maps;     // f_1 .. f_K
  int length() const { return static_cast<int>(maps.size()); }
  EqMap composite(int i, int j) const;
  FoldableSequence sub(int i, int j) const;  // columns i..j
};

FoldableSequence as_foldable(const FoldSequence& seq);
std::vector<std::string> validate_foldable_sequence(const FoldableSequence& seq);

struct CombingRectangle {
  FoldableSequence upper, lower;         // equal length
  std::vector<EqMap> collapses;          // upper_i -> lower_i
  std::vector<InvariantSubgraph> sigma;  // collapsed graphs
  int length() const { return upper.length(); }
  CombingRectangle sub(int i, int j) const;
};

std::vector<std::string> validate_rectangle(const CombingRectangle& R);

// pull a collapse of the last column back along the sequence; throws
// std::invalid_argument("PROPERNESS") when sigmaK is everything
CombingRectangle comb_by_collapse(const FoldableSequence& seq, const InvariantSubgraph& sigmaK);

// stack two rectangles sharing a row; throws std::invalid_argument("ROW-MISMATCH")
CombingRectangle compose_rectangles(const CombingRectangle& upper, const CombingRectangle& lower);

// split a rectangle along an invariant subfamily sigma'_i of its collapsed
// graphs; throws std::invalid_argument("INVARIANCE") when the preimage
// condition fails
std::pair<CombingRectangle, CombingRectangle> decompose_rectangle(
    const CombingRectangle& R, const std::vector<InvariantSubgraph>& sigmaPrime);

// the induced map on collapse targets: g with g . piDom = piCod . f
EqMap induced_on_collapse(const EqMap& piDom, const EqMap& f, const EqMap& piCod);

// trivial rectangle over a sequence (identity collapses)
CombingRectangle improper_rectangle(const FoldableSequence& seq);

}  // namespace fsplit
