#pragma once

// Free splittings of a free group F: minimal simplicial F-trees with trivial
// edge stabilizers, represented by their finite quotient graphs of groups.
//
// Conventions for the Bass-Serre tree behind a quotient graph:
//   * oriented edgelets come in reversal pairs e <-> e^1;
//   * the canonical lift of edgelet e starts at the canonical lift
//     (src(e), 1*A_src) and ends at (dst(e), twist(e)*A_dst);
//   * tree edgelets in the orbit of e are (e, g) = g * canonical lift;
//     rev(e, g) = (e^1, g*twist(e));
//   * tree vertices are (v, g*A_v), canonicalized by the shortlex-minimal
//     left-coset representative.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fsplit/subgroup.hpp"
#include "fsplit/word.hpp"

namespace fsplit {

class FreeSplitting;
using Sp = std::shared_ptr<const FreeSplitting>;

struct TreeVertex {
  int v = -1;
  Word loc;  // canonical coset representative of loc * A_v
  bool operator==(const TreeVertex& o) const { return v == o.v && loc == o.loc; }
  bool operator!=(const TreeVertex& o) const { return !(*this == o); }
};

struct TreeStep {
  int e = -1;
  Word g;  // the tree edgelet (e, g)
  bool operator==(const TreeStep& o) const { return e == o.e && g == o.g; }
};

struct TreePath {
  TreeVertex start;
  std::vector<TreeStep> steps;
};

// F-invariant subgraph, as a set of unoriented edgelet orbits (pair ids).
struct InvariantSubgraph {
  std::vector<char> pairs;  // indexed by pair id = e/2
  bool empty() const;
  bool full() const;  // all orbits
  int count() const;
  bool has(int orientedEdgelet) const { return pairs[static_cast<size_t>(orientedEdgelet / 2)]; }
  static InvariantSubgraph none(int npairs);
  static InvariantSubgraph all(int npairs);
  InvariantSubgraph united(const InvariantSubgraph& o) const;
  InvariantSubgraph intersect(const InvariantSubgraph& o) const;
  InvariantSubgraph minus(const InvariantSubgraph& o) const;
  bool operator==(const InvariantSubgraph& o) const { return pairs == o.pairs; }
};

class FreeSplitting {
 public:
  struct Edgelet {
    int src, dst;
    Word twist;
  };

  int rank() const { return rank_; }
  int nv() const { return static_cast<int>(grp_.size()); }
  int ne2() const { return static_cast<int>(ed_.size()); }  // oriented count
  int npairs() const { return ne2() / 2; }
  static int rev(int e) { return e ^ 1; }
  int src(int e) const { return ed_[static_cast<size_t>(e)].src; }
  int dst(int e) const { return ed_[static_cast<size_t>(e)].dst; }
  const Word& twist(int e) const { return ed_[static_cast<size_t>(e)].twist; }
  const SubgroupAutomaton& group(int v) const { return grp_[static_cast<size_t>(v)]; }
  const std::vector<int>& halfedges(int v) const { return out_[static_cast<size_t>(v)]; }

  static Sp make(int rank, std::vector<SubgroupAutomaton> groups, std::vector<Edgelet> pairs);
  static Sp rose(int rank);

  // --- validation ---
  std::vector<std::string> validate() const;
  bool valid() const { return validate().empty(); }

  // --- natural structure ---
  std::optional<int> tree_valence(int v) const;  // nullopt = infinite
  bool natural(int v) const { return natVertex_[static_cast<size_t>(v)]; }
  // oriented natural-edge chains; chain i reversed is chain natRev_[i]
  const std::vector<std::vector<int>>& natural_chains() const { return natChains_; }
  int natural_rev(int chain) const { return natRev_[static_cast<size_t>(chain)]; }
  int chain_of(int e) const { return chainOf_[static_cast<size_t>(e)]; }
  int natural_orbit_count() const;  // unoriented natural edges
  // unoriented natural edge index (orbit) of an oriented chain
  int natural_orbit(int chain) const { return std::min(chain, natural_rev(chain)); }
  InvariantSubgraph chain_support(int chain) const;

  // --- coset helpers ---
  Word coset(int v, const Word& g) const { return grp_[static_cast<size_t>(v)].coset_rep(g); }
  TreeVertex tv(int v, const Word& g) const { return TreeVertex{v, coset(v, g)}; }
  TreeVertex base_vertex() const { return tv(0, Word{}); }
  TreeVertex step_end(const TreeStep& s) const { return tv(dst(s.e), s.g * twist(s.e)); }
  TreeVertex step_start(const TreeStep& s) const { return tv(src(s.e), s.g); }
  TreeStep step_rev(const TreeStep& s) const { return TreeStep{rev(s.e), s.g * twist(s.e)}; }

  // --- marking ---
  int betti() const;
  const std::vector<Word>& marking_generators() const { return markGens_; }
  // structure of each marking generator: (0, vertex) or (1, oriented edgelet)
  const std::vector<std::pair<int, int>>& marking_kinds() const { return markKinds_; }
  const GenExpresser& expresser() const { return expr_; }
  const std::vector<int>& spanning_parent() const { return parentEdge_; }
  const Word& mu(int v) const { return mu_[static_cast<size_t>(v)]; }  // tree path twists

  // --- tree paths (see treepath.cpp) ---
  // reduced path between explicit tree vertices
  TreePath tree_path(const TreeVertex& from, const TreeVertex& to) const;
  // reduced path from the base vertex to g * base
  TreePath path_base_to(const Word& g) const;

  // --- global invariants ---
  std::string canonical_string() const;
  size_t content_hash() const;

  // natural form: one edgelet per natural edge (conjugacy-safe desubdivision)
  Sp natural_form() const;
  // subdivide each edgelet orbit p into counts[p] >= 1 edgelets
  Sp subdivided(const std::vector<int>& counts) const;

  std::string dot() const;

 private:
  int rank_ = 2;
  std::vector<Edgelet> ed_;
  std::vector<SubgroupAutomaton> grp_;
  std::vector<std::vector<int>> out_;  // halfedges by src
  std::vector<char> natVertex_;
  std::vector<std::vector<int>> natChains_;
  std::vector<int> natRev_, chainOf_;
  std::vector<int> parentEdge_;
  std::vector<Word> mu_;
  std::vector<Word> markGens_;
  std::vector<std::pair<int, int>> markKinds_;
  GenExpresser expr_;

  void finalize();
  friend struct SplittingBuilder;
};

// path utilities
TreePath tighten(const FreeSplitting& S, TreePath p);
TreePath translate(const FreeSplitting& S, const Word& g, const TreePath& p);
TreePath concat(const FreeSplitting& S, const TreePath& a, const TreePath& b);
bool path_ok(const FreeSplitting& S, const TreePath& p);

}  // namespace fsplit
