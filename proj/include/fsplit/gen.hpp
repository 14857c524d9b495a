#pragma once

// Seeded generators of random splittings, foldable maps and fold sequences
// for property runs and the acceptance suite.

#include <random>

#include "fsplit/fold.hpp"
#include "fsplit/make_foldable.hpp"

namespace fsplit {

using Rng = std::mt19937_64;

Word random_word(Rng& rng, int rank, int len);

// random positive automorphism images via Nielsen moves (length-capped)
std::vector<Word> random_automorphism(Rng& rng, int rank, int moves);

// rose marked by the given words (must form a basis for validity)
Sp marked_rose(int rank, const std::vector<Word>& twists);

// a random valid splitting built from a rose by random expansions,
// subdivisions, folds and collapses
Sp random_splitting(Rng& rng, int rank, int ops = 3);

// a random foldable map between random splittings (via make_foldable)
EqMap random_foldable_map(Rng& rng, int rank);

// a random fold sequence: factorization of a foldable map from a rose to a
// rose marked by a random automorphism
FoldSequence random_fold_sequence(Rng& rng, int rank, int autoMoves = 4);

}  // namespace fsplit
