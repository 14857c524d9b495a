#pragma once

// Equivariant simplicial maps between free splittings, stored on quotient
// orbit representatives and extended by the action:
//   f(v, g*A_v)   = (v', g*vwit[v]*A'_{v'})
//   f(e, g)       = (e', g*u_e)            when eimg[e] = (e', u_e)
//   f(e, g)       = image of either endpoint     when eimg[e] is collapsed

#include <optional>
#include <string>
#include <vector>

#include "fsplit/splitting.hpp"

namespace fsplit {

struct EqMap {
  Sp dom, cod;
  std::vector<int> vbase;                    // per dom vertex: codomain vertex
  std::vector<Word> vwit;                    // per dom vertex: locator witness
  std::vector<std::optional<TreeStep>> eimg;  // per oriented dom edgelet

  TreeVertex vertex_image(int v) const { return cod->tv(vbase[static_cast<size_t>(v)], vwit[static_cast<size_t>(v)]); }
};

EqMap identity_map(Sp S);
std::vector<std::string> validate_map(const EqMap& f);

TreeVertex map_vertex(const EqMap& f, const TreeVertex& x);
// nullopt when the edgelet is collapsed
std::optional<TreeStep> map_step(const EqMap& f, const TreeStep& s);
TreePath map_path(const EqMap& f, const TreePath& p);

EqMap compose(const EqMap& f, const EqMap& g);  // g after f

// collapsed subgraph when f is injective over codomain edgelet interiors
std::optional<InvariantSubgraph> is_collapse(const EqMap& f);
bool locally_injective(const EqMap& f);

// ---- directions and gates ----
struct GatePartition {
  bool infinite = false;                      // nontrivial vertex stabilizer
  std::vector<std::vector<int>> blocks;       // halfedge ids, trivial case only
  int max_gate_size = 0;                      // valid in both cases
  int gate_count_or_minus1 = -1;              // -1 when infinite
};

// gates of f at the canonical lift of dom vertex v; throws std::runtime_error
// with "UNDEFINED-DERIVATIVE" if an incident edgelet is collapsed
GatePartition gates_at(const EqMap& f, int v);

// directions at the canonical lift of v sharing the gate of (e0, a0)
std::vector<TreeStep> gate_members(const EqMap& f, int v, const TreeStep& d);

struct FoldabilityReport {
  bool ok = false;
  std::string witness;  // offending vertex / natural edge when not foldable
};
FoldabilityReport is_foldable(const EqMap& f);

// an illegal turn: two directions at a common vertex with equal derivative
struct Turn {
  int v = -1;       // dom quotient vertex
  TreeStep d1, d2;  // tree edgelets with initial vertex (v, 1*A_v)
};
std::optional<Turn> find_illegal_turn(const EqMap& f);

// ---- collapses and expansions ----
struct CollapseResult {
  Sp to;
  EqMap map;  // collapse map dom -> to
};

// collapse each component of sigma; throws std::invalid_argument("PROPERNESS")
// when sigma is everything
CollapseResult collapse(Sp S, const InvariantSubgraph& sigma);

InvariantSubgraph natural_core(const FreeSplitting& S, const InvariantSubgraph& sigma);

// properly discontinuous expansion: blow each vertex group into a wedge of
// marked loops; returns R with the collapse map R -> S
CollapseResult pd_expansion(Sp S);

// vertex group system: one automaton per orbit of nontrivial-group vertices
std::vector<SubgroupAutomaton> vertex_group_system(const FreeSplitting& S);

// pull an invariant subgraph back through a map (ignoring collapsed edgelets)
InvariantSubgraph preimage(const EqMap& f, const InvariantSubgraph& sigma);
// push forward: orbits of images of edgelets in sigma
InvariantSubgraph image_subgraph(const EqMap& f, const InvariantSubgraph& sigma);

// maps agree on all orbit representatives
bool maps_equal(const EqMap& f, const EqMap& g);

// derive missing vertex images from edge images (terminal vertices of
// non-collapsed edgelets); leaves existing entries untouched
void complete_vertex_images(EqMap& f);

// subdivision transport: given T' = T.subdivided(counts), rewrite f: S->T as
// a map S' -> T' where S' subdivides S accordingly; returns (S', map)
struct SubdividedMap {
  Sp domSub;
  EqMap map;
  std::vector<int> domCounts;
};
SubdividedMap pull_subdivision(const EqMap& f, Sp codSub, const std::vector<int>& codCounts);

// canonical simplicial conjugacy natural_form(S).subdivided(chain counts) -> S
struct NfExpansion {
  Sp nf;
  std::vector<int> counts;
  EqMap iso;
};
NfExpansion nf_expand_iso(Sp S);

// rewrite a collapse c: X -> Y as a collapse X* -> newCod where newCod is
// conjugate to Y and X* is conjugate to X (presentations rebuilt canonically)
EqMap transport_collapse(const EqMap& c, Sp newCod);

}  // namespace fsplit
