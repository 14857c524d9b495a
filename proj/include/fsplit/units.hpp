#pragma once

// Progress units along fold sequences: blue-red decompositions and their
// complexity, almost invariant edges, unit certificates (the two-rectangle
// diagrams witnessing "< 1 unit"), greedy unit counts, and the explicit
// bounded-length paths they produce.

#include <map>

#include "fsplit/pushout.hpp"

namespace fsplit {

// ---- blue-red decompositions ----
struct BlueRed {
  std::vector<InvariantSubgraph> blue;  // per column; red = complement
};

// throws std::invalid_argument("NOT-A-DECOMPOSITION") when blueK is empty or
// full (both colors must be nonempty)
BlueRed pullback_decomposition(const FoldableSequence& seq, const InvariantSubgraph& blueK);
bool decomposition_natural(const FoldableSequence& seq, const BlueRed& br);

struct ComplexityReport {
  int c1 = 0, c2 = 0, c = 0;
};
// throws std::invalid_argument("IMPROPER")
ComplexityReport complexity(const FreeSplitting& S, const InvariantSubgraph& beta);

struct ComplexityRun {
  std::vector<ComplexityReport> perColumn;
  bool nonincreasing = false;
  int constancyIntervals = 0;
};
// throws std::invalid_argument("NOT-NATURAL")
ComplexityRun complexity_along(const FoldableSequence& seq, const BlueRed& br);

// ---- zig-zag paths in the splitting complex ----
struct FsEdge {
  EqMap wit;       // a collapse map
  bool domIsLeft;  // wit.dom represents the left endpoint (left collapses right)
};
struct FsPath {
  std::vector<Sp> vertices;
  std::vector<FsEdge> edges;
  int length() const { return static_cast<int>(edges.size()); }
};
std::vector<std::string> validate_fspath(const FsPath& p);

// length <= 4 path across a constant-complexity stretch of a foldable
// sequence with a natural invariant decomposition;
// throws std::invalid_argument("NOT-CONSTANT")
FsPath constant_complexity_path(const FoldableSequence& seq, const BlueRed& br, int a, int b);

// ---- almost invariant edges ----
struct AlmostInvariantEdgeCert {
  std::vector<int> chains;        // per column: oriented natural chain id
  Sp R;                           // one-edge splitting
  std::vector<EqMap> witnesses;   // collapse T_k -> R_k
  std::vector<EqMap> conjugates;  // conjugacy natural_form(R_k) -> natural_form(R)
};
std::optional<AlmostInvariantEdgeCert> almost_invariant_edge(const FoldableSequence& seq);

// ---- unit certificates ----
struct UnitCertificate {
  int i = 0, j = 0;
  CombingRectangle lower;  // S-row (columns i..j) collapsing onto the S'-row
  CombingRectangle upper;  // T-row collapsing onto the S'-row
  std::optional<BlueRed> br;  // constant-complexity natural decomposition (top row)
  std::optional<AlmostInvariantEdgeCert> aie;
};
std::vector<std::string> validate_unit_certificate(const FoldSequence& seq,
                                                   const UnitCertificate& cert);

// bounded canonical search; absence is treated as ">= 1 unit"
std::optional<UnitCertificate> units_lt_one(const FoldSequence& seq, int i, int j);

struct UnitCount {
  int upsilon = 0;
  std::vector<int> frontGreedy, backGreedy;
};

class UnitOracle {
 public:
  explicit UnitOracle(const FoldSequence& seq) : seq_(seq) {}
  bool lt_one(int i, int j);                       // with stability closure
  UnitCertificate certificate(int i, int j);       // for lt_one pairs
  UnitCount count(int I, int J);
  const FoldSequence& seq() const { return seq_; }

 private:
  const FoldSequence& seq_;
  std::map<std::pair<int, int>, bool> memo_;
  std::map<std::pair<int, int>, UnitCertificate> certs_;
};

// length <= 8 path across a certified < 1 unit stretch
FsPath lt1_path(const FoldSequence& seq, const UnitCertificate& cert);

// length <= 10*units + 8 path from S_I to S_J
FsPath lipschitz_path(UnitOracle& oracle, int I, int J);

}  // namespace fsplit
