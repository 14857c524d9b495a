#pragma once

// Folds between free splittings: identification of equal-length initial
// segments of two natural edges sharing an initial vertex, plus the
// factorization of foldable maps into maximal folds.

#include "fsplit/conjugacy.hpp"
#include "fsplit/treemap.hpp"

namespace fsplit {

struct FoldSpec {
  int vertex = -1;  // dom quotient vertex (natural)
  int e1 = -1;      // first edgelet of the first folded chain
  int e2 = -1;      // first edgelet of the second folded chain
  Word w;           // direction pair ((e1,1),(e2,w)), w in the vertex group
  int len = 1;      // identified edgelet count along each segment
};

struct FoldResult {
  Sp to;
  EqMap map;
  FoldSpec spec;
};

// throws std::invalid_argument("SAME-ORBIT") when the directions lie in one
// orbit (e1 and e2 in the same edgelet pair)
FoldResult fold(Sp S, const FoldSpec& spec);

enum class FoldExtent { Partial, ProperFull, ImproperFull };
enum class FoldKind { IA, IIIA };
struct FoldClass {
  FoldExtent extent;
  FoldKind kind;
};
// classification of a performed fold; throws std::invalid_argument("NOT-A-FOLD")
FoldClass classify_fold(Sp S, const FoldSpec& spec);

// maximal fold factor of f at an illegal turn; throws
// std::invalid_argument("LEGAL-TURN") when the derivative images differ
struct FoldFactor {
  FoldResult fold;  // k : S -> U
  EqMap rest;       // g : U -> T, foldable
};
FoldFactor maximal_fold_factor(const EqMap& f, const Turn& turn);

struct FoldSequence {
  std::vector<Sp> splittings;   // S_0 .. S_K
  std::vector<EqMap> folds;     // f_1 .. f_K
  std::vector<FoldSpec> specs;  // spec of each fold
  int length() const { return static_cast<int>(folds.size()); }
  // composite f_i+1 ... f_j : S_i -> S_j (identity when i == j)
  EqMap composite(int i, int j) const;
};

// factor a foldable map into maximal folds (deterministic turn selection);
// the terminal simplicial conjugacy is absorbed into the last fold, or
// returned separately for length-0 factorizations
struct FoldFactorization {
  FoldSequence seq;
  std::optional<EqMap> terminalConjugacy;  // set only when seq.length() == 0
};
FoldFactorization fold_factorize(const EqMap& f);

std::vector<std::string> validate_fold_sequence(const FoldSequence& seq);

// length <= 2 interpolation of a fold into collapse relations:
//   S expands to U collapses to T, with conjugacy detection for length <= 1
struct FoldInterpolation {
  int length = 2;             // 0, 1 or 2
  Sp mid;                     // U (when length >= 1)
  std::optional<EqMap> up;    // collapse U -> S-subdivided
  std::optional<EqMap> down;  // collapse U -> T-subdivided
};
FoldInterpolation interpolate_fold(Sp S, const FoldSpec& spec);

bool fold_sequences_equivalent(const FoldSequence& a, const FoldSequence& b);

}  // namespace fsplit
