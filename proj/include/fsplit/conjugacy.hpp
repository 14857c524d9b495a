#pragma once

// Conjugacy of free splittings (equivariant homeomorphism), decided on the
// marked quotient graphs.  A positive answer comes with a witness: a
// simplicial conjugacy between the natural forms, i.e. an EqMap that is a
// bijection on cells.  Self-conjugacies of a splitting fix every natural
// cell, so the witness between two given splittings is unique when it exists.

#include <optional>

#include "fsplit/treemap.hpp"

namespace fsplit {

// witness h: natural_form(S) -> natural_form(T); presence decides conjugacy
std::optional<EqMap> are_conjugate(Sp S, Sp T);
bool conjugate(Sp S, Sp T);

// checks that h is a simplicial conjugacy (valid, locally injective,
// bijective on cells)
bool is_conjugacy(const EqMap& h);

// F_0: one collapse per natural edge orbit (collapse of its complement)
std::vector<CollapseResult> one_edge_collapses(Sp S);

}  // namespace fsplit
