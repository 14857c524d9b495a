#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsplit/treemap.hpp"

using namespace fsplit;

namespace {

// one-edge splitting <a> * <b> of F_2 (segment with cyclic vertex groups)
Sp edge_splitting_ab() {
  std::vector<SubgroupAutomaton> groups{
      SubgroupAutomaton::from_generators(2, {Word::parse("a")}),
      SubgroupAutomaton::from_generators(2, {Word::parse("b")})};
  return FreeSplitting::make(2, groups, {{0, 1, Word{}}});
}

// HNN splitting: loop at a vertex with group <a>, stable letter b
Sp hnn_splitting_a() {
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton::from_generators(2, {Word::parse("a")})};
  return FreeSplitting::make(2, groups, {{0, 0, Word::parse("b")}});
}

}  // namespace

TEST_CASE("rose is valid") {
  auto S = FreeSplitting::rose(2);
  CHECK(S->validate().empty());
  CHECK(S->betti() == 2);
  CHECK(S->natural_orbit_count() == 2);
  CHECK(S->tree_valence(0) == 4);
}

TEST_CASE("minimality failure detected") {
  // trivial-group valence-1 vertex hanging off a rose
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2), SubgroupAutomaton(2)};
  auto S = FreeSplitting::make(
      2, groups, {{0, 0, Word::parse("a")}, {0, 0, Word::parse("b")}, {0, 1, Word{}}});
  auto bad = S->validate();
  bool found = false;
  for (auto& b : bad) found = found || b.find("MINIMALITY") != std::string::npos;
  CHECK(found);
}

TEST_CASE("marking failure detected") {
  // rank-2 claim but ranks sum to 3
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton::from_generators(2, {Word::parse("a")})};
  auto S = FreeSplitting::make(2, groups,
                               {{0, 0, Word::parse("a")}, {0, 0, Word::parse("b")}});
  auto bad = S->validate();
  bool found = false;
  for (auto& b : bad) found = found || b.find("MARKING") != std::string::npos;
  CHECK(found);
}

TEST_CASE("edge and hnn splittings valid") {
  CHECK(edge_splitting_ab()->validate().empty());
  CHECK(hnn_splitting_a()->validate().empty());
  CHECK(!edge_splitting_ab()->tree_valence(0).has_value());  // infinite
  CHECK(vertex_group_system(*edge_splitting_ab()).size() == 2);
  CHECK(vertex_group_system(*hnn_splitting_a()).size() == 1);
  CHECK(vertex_group_system(*FreeSplitting::rose(2)).empty());
}

TEST_CASE("subdivision invariance of natural structure") {
  auto S = FreeSplitting::rose(2);
  auto T = S->subdivided({2, 2});
  CHECK(T->validate().empty());
  CHECK(T->natural_orbit_count() == 2);
  CHECK(T->npairs() == 4);
  auto N = T->natural_form();
  CHECK(N->canonical_string() == S->canonical_string());
}

TEST_CASE("maximal rank-2 splitting has 3 natural edge orbits") {
  // theta-ish graph: two vertices, three edges; marking a, b on two of them
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2), SubgroupAutomaton(2)};
  auto S = FreeSplitting::make(
      2, groups, {{0, 1, Word{}}, {0, 1, Word::parse("a")}, {0, 1, Word::parse("b")}});
  CHECK(S->validate().empty());
  CHECK(S->natural_orbit_count() == 3);
  CHECK(3 == 3 * S->rank() - 3);
}

TEST_CASE("tree paths in the rose") {
  auto S = FreeSplitting::rose(2);
  // path from base to ab*base has 2 steps
  auto p = S->path_base_to(Word::parse("ab"));
  CHECK(path_ok(*S, p));
  CHECK(p.steps.size() == 2);
  CHECK(S->tv(0, Word::parse("ab")) == S->step_end(p.steps.back()));
  // path between translates
  auto q = S->tree_path(S->tv(0, Word::parse("a")), S->tv(0, Word::parse("b")));
  CHECK(path_ok(*S, q));
  CHECK(q.steps.size() == 2);
}

TEST_CASE("tree paths with vertex groups") {
  auto S = edge_splitting_ab();
  // (v0, A) and (v0, b*A): path crosses the edge orbit; reduced length 2
  auto p = S->tree_path(S->tv(0, Word{}), S->tv(0, Word::parse("b")));
  CHECK(path_ok(*S, p));
  CHECK(p.steps.size() == 2);
  // stabilized vertex: trivial path
  auto q = S->tree_path(S->tv(0, Word{}), S->tv(0, Word::parse("aaa")));
  CHECK(q.steps.empty());
  auto H = hnn_splitting_a();
  auto r = H->tree_path(H->tv(0, Word{}), H->tv(0, Word::parse("bab")));
  CHECK(path_ok(*H, r));
  CHECK(!r.steps.empty());
}

TEST_CASE("collapse of rose loop gives hnn splitting") {
  auto S = FreeSplitting::rose(2);
  auto sigma = InvariantSubgraph::none(2);
  sigma.pairs[0] = 1;  // collapse the a-loop
  auto res = collapse(S, sigma);
  CHECK(res.to->validate().empty());
  CHECK(res.to->npairs() == 1);
  CHECK(res.to->group(0).rank() == 1);
  CHECK(validate_map(res.map).empty());
  auto back = is_collapse(res.map);
  REQUIRE(back.has_value());
  CHECK(*back == sigma);
}

TEST_CASE("collapse with empty subgraph is the identity shape") {
  auto S = FreeSplitting::rose(2);
  auto res = collapse(S, InvariantSubgraph::none(2));
  CHECK(res.to->canonical_string() == S->canonical_string());
  CHECK(validate_map(res.map).empty());
}

TEST_CASE("collapse of everything rejected") {
  auto S = FreeSplitting::rose(2);
  CHECK_THROWS_AS(collapse(S, InvariantSubgraph::all(2)), std::invalid_argument);
}

TEST_CASE("properly discontinuous expansion") {
  auto E = edge_splitting_ab();
  auto res = pd_expansion(E);
  CHECK(res.to->validate().empty());
  for (int v = 0; v < res.to->nv(); ++v) CHECK(res.to->group(v).trivial());
  CHECK(validate_map(res.map).empty());
  CHECK(is_collapse(res.map).has_value());
  // barbell: two vertices, connector + two loops
  CHECK(res.to->nv() == 2);
  CHECK(res.to->npairs() == 3);

  auto H = hnn_splitting_a();
  auto res2 = pd_expansion(H);
  CHECK(res2.to->validate().empty());
  CHECK(res2.to->nv() == 1);
  CHECK(res2.to->npairs() == 2);  // theta/handle shape

  auto R = FreeSplitting::rose(2);
  auto res3 = pd_expansion(R);
  CHECK(res3.to.get() == R.get());  // already discontinuous
}

TEST_CASE("natural core") {
  auto S = FreeSplitting::rose(2)->subdivided({2, 1});
  // half of the subdivided a-edge: empty core
  auto half = InvariantSubgraph::none(S->npairs());
  half.pairs[0] = 1;
  CHECK(natural_core(*S, half).empty());
  // the full a-chain: its own core
  auto full = InvariantSubgraph::none(S->npairs());
  full.pairs[0] = full.pairs[1] = 1;
  CHECK(natural_core(*S, full) == full);
}

TEST_CASE("identity map validates and is a trivial collapse") {
  auto S = FreeSplitting::rose(2);
  auto f = identity_map(S);
  CHECK(validate_map(f).empty());
  auto c = is_collapse(f);
  REQUIRE(c.has_value());
  CHECK(c->empty());
  CHECK(locally_injective(f));
  auto rep = is_foldable(f);
  CHECK(rep.ok);
}

#include "fsplit/conjugacy.hpp"

TEST_CASE("conjugacy: reflexive with identity-shaped witness") {
  auto S = FreeSplitting::rose(2);
  auto w = are_conjugate(S, S);
  REQUIRE(w.has_value());
  CHECK(is_conjugacy(*w));
}

TEST_CASE("conjugacy: rose vs inner-twisted rose") {
  auto S = FreeSplitting::rose(2);
  Word g = Word::parse("ab");
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2)};
  auto T = FreeSplitting::make(
      2, groups, {{0, 0, Word::parse("a").conjugate(g)}, {0, 0, Word::parse("b").conjugate(g)}});
  REQUIRE(T->validate().empty());
  auto w = are_conjugate(S, T);
  REQUIRE(w.has_value());
  CHECK(is_conjugacy(*w));
}

TEST_CASE("conjugacy: swap marking is still conjugate (graph symmetry)") {
  // rose marked (b, a): symmetric under the loop swap
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2)};
  auto T = FreeSplitting::make(2, groups, {{0, 0, Word::parse("b")}, {0, 0, Word::parse("a")}});
  CHECK(are_conjugate(FreeSplitting::rose(2), T).has_value());
}

TEST_CASE("conjugacy: rose(ab, b) vs rose(a, b)") {
  // markings differing by a genuine automorphism: not conjugate
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2)};
  auto T = FreeSplitting::make(2, groups, {{0, 0, Word::parse("ab")}, {0, 0, Word::parse("b")}});
  REQUIRE(T->validate().empty());
  CHECK(!are_conjugate(FreeSplitting::rose(2), T).has_value());
}

TEST_CASE("conjugacy: edge vs hnn splitting differ") {
  std::vector<SubgroupAutomaton> g1{SubgroupAutomaton::from_generators(2, {Word::parse("a")}),
                                    SubgroupAutomaton::from_generators(2, {Word::parse("b")})};
  auto E = FreeSplitting::make(2, g1, {{0, 1, Word{}}});
  std::vector<SubgroupAutomaton> g2{SubgroupAutomaton::from_generators(2, {Word::parse("a")})};
  auto H = FreeSplitting::make(2, g2, {{0, 0, Word::parse("b")}});
  CHECK(!are_conjugate(E, H).has_value());
}

TEST_CASE("conjugacy: one-edge splittings with conjugated groups") {
  std::vector<SubgroupAutomaton> g1{SubgroupAutomaton::from_generators(2, {Word::parse("a")}),
                                    SubgroupAutomaton::from_generators(2, {Word::parse("b")})};
  auto E1 = FreeSplitting::make(2, g1, {{0, 1, Word{}}});
  // <bab^-1> * <b> with a twist: conjugate copy of E1
  std::vector<SubgroupAutomaton> g2{
      SubgroupAutomaton::from_generators(2, {Word::parse("a").conjugate(Word::parse("b"))}),
      SubgroupAutomaton::from_generators(2, {Word::parse("b")})};
  auto E2 = FreeSplitting::make(2, g2, {{0, 1, Word::parse("b")}});
  REQUIRE(E2->validate().empty());
  auto w = are_conjugate(E1, E2);
  REQUIRE(w.has_value());
  CHECK(is_conjugacy(*w));
  // and transitivity through composition
  auto w2 = are_conjugate(E2, E1);
  REQUIRE(w2.has_value());
  auto comp = compose(*w, *w2);
  CHECK(is_conjugacy(comp));
}

TEST_CASE("one edge collapses of the rose") {
  auto S = FreeSplitting::rose(2);
  auto F0 = one_edge_collapses(S);
  CHECK(F0.size() == 2);
  for (auto& c : F0) {
    CHECK(c.to->validate().empty());
    CHECK(c.to->natural_orbit_count() == 1);
  }
  // distinct natural subgraphs give nonconjugate collapses
  CHECK(!are_conjugate(F0[0].to, F0[1].to).has_value());
}

TEST_CASE("one edge collapses identify conjugate splittings") {
  // a 3-edge maximal splitting vs itself
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2), SubgroupAutomaton(2)};
  auto S = FreeSplitting::make(
      2, groups, {{0, 1, Word{}}, {0, 1, Word::parse("a")}, {0, 1, Word::parse("b")}});
  auto F0 = one_edge_collapses(S);
  CHECK(F0.size() == 3);
  for (size_t i = 0; i < F0.size(); ++i)
    for (size_t j = i + 1; j < F0.size(); ++j)
      CHECK(!are_conjugate(F0[i].to, F0[j].to).has_value());
}
