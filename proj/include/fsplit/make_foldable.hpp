#pragma once

// Construction of foldable maps: given splittings S, T, produce S', S'' with
// S expanding to S' collapsing to S'' and a foldable map S'' -> T, by local
// optimization over equivariant maps (collapse constant natural edges,
// minimize total image length, then maximize the sum of squared lengths;
// a two-gate outcome at a single natural vertex orbit is repaired by moving
// the vertex image to the nearest branch point of the ray-image subtree).

#include "fsplit/treemap.hpp"

namespace fsplit {

struct FoldableHull {
  Sp expansion;       // S'
  EqMap expandToS;    // collapse S' -> S  (witness for  S expands to S')
  Sp middle;          // S'' (domain of the foldable map)
  EqMap collapseWit;  // collapse (subdivided natural form of S') -> S''
  EqMap map;          // foldable S'' -> T
};

// throws std::runtime_error("ITERATION-LIMIT") when the move budget is hit
FoldableHull make_foldable(Sp S, Sp T, int moveBudget = 10000);

}  // namespace fsplit
