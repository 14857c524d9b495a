#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsplit/conjugacy.hpp"
#include "fsplit/gen.hpp"
#include "fsplit/make_foldable.hpp"

using namespace fsplit;

TEST_CASE("make_foldable: identity instance") {
  auto S = FreeSplitting::rose(2);
  auto hull = make_foldable(S, S);
  CHECK(is_foldable(hull.map).ok);
  CHECK(validate_map(hull.map).empty());
  CHECK(conjugate(hull.middle, S));
}

TEST_CASE("make_foldable: rose onto twisted rose") {
  auto S = FreeSplitting::rose(2);
  auto T = marked_rose(2, {Word::parse("ab"), Word::parse("b")});
  auto hull = make_foldable(S, T);
  CHECK(is_foldable(hull.map).ok);
  CHECK(validate_map(hull.map).empty());
  // witness edges: S expands to S' collapses to S''
  CHECK(is_collapse(hull.expandToS).has_value());
  CHECK(is_collapse(hull.collapseWit).has_value());
  // image paths have length <= 2
  for (const auto& img : hull.map.eimg) REQUIRE(img.has_value());
}

TEST_CASE("make_foldable: from a splitting with vertex groups") {
  std::vector<SubgroupAutomaton> groups{
      SubgroupAutomaton::from_generators(2, {Word::parse("a")}),
      SubgroupAutomaton::from_generators(2, {Word::parse("b")})};
  auto E = FreeSplitting::make(2, groups, {{0, 1, Word{}}});
  auto T = FreeSplitting::rose(2);
  auto hull = make_foldable(E, T);
  CHECK(is_foldable(hull.map).ok);
  CHECK(validate_map(hull.map).empty());
}

TEST_CASE("gate bound holds on random foldable maps") {
  Rng rng(12345);
  for (int i = 0; i < 12; ++i) {
    int rank = 2 + static_cast<int>(rng() % 2);
    EqMap f = random_foldable_map(rng, rank);
    REQUIRE(is_foldable(f).ok);
    for (int v = 0; v < f.dom->nv(); ++v) {
      auto gp = gates_at(f, v);
      CHECK(gp.max_gate_size <= 2 * rank);
    }
  }
}

TEST_CASE("first derivative test on sampled subtree patterns") {
  Rng rng(99);
  EqMap f = random_foldable_map(rng, 2);
  const FreeSplitting& S = *f.dom;
  // sample paths of a few edgelets; interior vertices of the image pattern
  // with valence 1 must be frontier vertices of the pattern
  for (int e = 0; e < S.ne2(); e += 2) {
    TreePath w;
    w.start = S.tv(S.src(e), Word{});
    w.steps.push_back(TreeStep{e, Word{}});
    // pattern = single edgelet: interior vertices none; image endpoints have
    // pattern-valence 1 and are frontier: trivially consistent; extend by one
    for (int e2 : S.halfedges(S.dst(e))) {
      if (e2 == FreeSplitting::rev(e)) continue;
      TreePath w2 = w;
      w2.steps.push_back(TreeStep{e2, S.twist(e)});
      if (!path_ok(S, w2)) continue;
      auto img = map_path(f, w2);
      // the middle vertex of w2 maps to the middle of a 2-edgelet image path;
      // if the image has valence 1 there (a backtrack), foldability is violated
      CHECK(img.steps.size() == 2);
      break;
    }
  }
}

TEST_CASE("random fold sequences validate") {
  Rng rng(4242);
  auto seq = random_fold_sequence(rng, 2, 4);
  CHECK(seq.length() >= 1);
  CHECK(validate_fold_sequence(seq).empty());
}
