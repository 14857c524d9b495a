#pragma once

// Combing by expansion: the minimal subtree of the fiber product of a
// foldable map f: S_i -> S_K with a collapse T' -> S_K, computed on quotient
// graphs via double-coset enumeration; bad-vertex analysis and the multifold
// repair assemble the combed row.

#include "fsplit/combing.hpp"

namespace fsplit {

struct PushoutColumn {
  Sp U;             // minimal fiber-product splitting
  EqMap toS;        // collapse U -> S_i
  EqMap toT;        // projection U -> T' (the h-map)
  std::vector<int> badVertices;   // U quotient vertices with 2 gates, valence >= 3
  std::vector<int> badChainOf;    // per bad vertex: oriented chain z_u -> u
  std::vector<int> externalValence;  // per bad vertex
  InvariantSubgraph Z;            // union of bad natural edges
};

PushoutColumn pushout(const EqMap& f, const EqMap& piPrime);

struct ExpansionResult {
  CombingRectangle rect;  // upper = T-row with collapses T_i -> S_i; lower = S-row
  std::vector<PushoutColumn> columns;
  std::vector<EqMap> multifolds;  // mu_i : T_i -> U_i
  EqMap lastConj;                 // conjugacy natural_form(T_K) -> natural_form(T')
};

ExpansionResult comb_by_expansion(const FoldableSequence& seq, const EqMap& piPrime);

// multifold sanity: injective over good natural edges, star preimages over
// bad edges with the recorded external valences, derivative surjectivity
std::vector<std::string> check_multifold(const PushoutColumn& col, const EqMap& mu);

}  // namespace fsplit
