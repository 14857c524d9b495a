#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsplit/fold.hpp"

using namespace fsplit;

namespace {

// rose marked (w1, w2)
Sp marked_rose(const char* w1, const char* w2) {
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2)};
  return FreeSplitting::make(2, groups, {{0, 0, Word::parse(w1)}, {0, 0, Word::parse(w2)}});
}

// the standard foldable self-map of the rose sending a -> ab, b -> b,
// realized after subdividing the a-loop into two edgelets
struct RoseMapFixture {
  Sp dom, cod;
  EqMap f;
};

RoseMapFixture rose_ab_map() {
  // the (ab)-marked rose maps onto the (a,b)-rose by running its first loop
  // over the path a.b; subdividing that loop makes the map simplicial
  RoseMapFixture fx;
  fx.cod = FreeSplitting::rose(2);
  fx.dom = marked_rose("ab", "b")->subdivided({2, 1});
  // dom edgelets: pair0: 0->1 twist 1, pair1: 1->0 twist ab, pair2: b-loop
  EqMap f;
  f.dom = fx.dom;
  f.cod = fx.cod;
  f.vbase = {0, 0};
  f.vwit = {Word{}, Word::parse("a")};
  f.eimg.resize(6);
  f.eimg[0] = TreeStep{0, Word{}};             // first half -> a-loop
  f.eimg[1] = TreeStep{1, Word::parse("a")};
  f.eimg[2] = TreeStep{2, Word::parse("a")};   // second half -> b-loop
  f.eimg[3] = TreeStep{3, Word{}};
  f.eimg[4] = TreeStep{2, Word{}};             // b-loop -> b-loop
  f.eimg[5] = TreeStep{3, Word{}};
  fx.f = f;
  return fx;
}

}  // namespace

TEST_CASE("rose a->ab map is a valid foldable map") {
  auto fx = rose_ab_map();
  CHECK(validate_map(fx.f).empty());
  auto rep = is_foldable(fx.f);
  CHECK(rep.ok);
  CHECK(!locally_injective(fx.f));
}

TEST_CASE("improper full fold of the rose") {
  auto S = FreeSplitting::rose(2);
  // fold the a-loop and the b-loop (full edges, type IIIA at shared endpoint)
  FoldSpec spec{0, 0, 2, Word{}, 1};
  auto r = fold(S, spec);
  CHECK(r.to->validate().empty());
  CHECK(r.to->npairs() == 1);
  CHECK(validate_map(r.map).empty());
  CHECK(is_foldable(r.map).ok);
  auto cls = classify_fold(S, spec);
  CHECK(cls.extent == FoldExtent::ImproperFull);
  CHECK(cls.kind == FoldKind::IIIA);
  // image vertex group rank = 1 + rank of stabilizer of the folded endpoint
  CHECK(r.to->group(0).rank() == 1);
}

TEST_CASE("same orbit folds rejected") {
  auto S = FreeSplitting::rose(2);
  CHECK_THROWS_AS(fold(S, FoldSpec{0, 0, 1, Word{}, 1}), std::invalid_argument);
}

TEST_CASE("partial fold creates a valence-3 image vertex") {
  auto S = FreeSplitting::rose(2)->subdivided({2, 2});
  // fold one edgelet from each of the two subdivided loops
  FoldSpec spec{0, 0, 4, Word{}, 1};
  auto r = fold(S, spec);
  CHECK(r.to->validate().empty());
  auto cls = classify_fold(S, spec);
  CHECK(cls.extent == FoldExtent::Partial);
  // folded endpoint has valence 3
  bool found = false;
  for (int v = 0; v < r.to->nv(); ++v)
    if (r.to->group(v).trivial() && r.to->halfedges(v).size() == 3) found = true;
  CHECK(found);
}

TEST_CASE("fold factorization of the rose a->ab map") {
  auto fx = rose_ab_map();
  auto ff = fold_factorize(fx.f);
  CHECK(ff.seq.length() >= 1);
  CHECK(validate_fold_sequence(ff.seq).empty());
  // composite evaluation agrees with the input map
  EqMap whole = ff.seq.composite(0, ff.seq.length());
  CHECK(maps_equal(whole, fx.f));
  // edgelet orbit counts strictly decrease
  for (int i = 0; i < ff.seq.length(); ++i)
    CHECK(ff.seq.splittings[i + 1]->npairs() < ff.seq.splittings[i]->npairs());
}

TEST_CASE("factorization of a conjugacy has length 0") {
  auto S = FreeSplitting::rose(2);
  auto ff = fold_factorize(identity_map(S));
  CHECK(ff.seq.length() == 0);
  REQUIRE(ff.terminalConjugacy.has_value());
  CHECK(locally_injective(*ff.terminalConjugacy));
}

TEST_CASE("single illegal turn gives length-1 factorization") {
  auto S = FreeSplitting::rose(2);
  FoldSpec spec{0, 0, 2, Word{}, 1};
  auto r = fold(S, spec);
  auto ff = fold_factorize(r.map);
  CHECK(ff.seq.length() == 1);
  CHECK(validate_fold_sequence(ff.seq).empty());
  CHECK(maps_equal(ff.seq.composite(0, 1), r.map));
}

TEST_CASE("maximal fold factor leaves a foldable remainder") {
  auto fx = rose_ab_map();
  auto turn = find_illegal_turn(fx.f);
  REQUIRE(turn.has_value());
  auto ff = maximal_fold_factor(fx.f, *turn);
  CHECK(validate_map(ff.fold.map).empty());
  CHECK(is_foldable(ff.rest).ok);
  CHECK(ff.fold.to->npairs() < fx.dom->npairs());
  // legal turn rejected
  CHECK_THROWS_AS(
      maximal_fold_factor(identity_map(FreeSplitting::rose(2)),
                          Turn{0, TreeStep{0, Word{}}, TreeStep{2, Word{}}}),
      std::invalid_argument);
}

TEST_CASE("fold interpolation lengths") {
  auto S = FreeSplitting::rose(2);
  // improper full fold of two loops: length 1 or 2 with validated collapses
  FoldSpec spec{0, 0, 2, Word{}, 1};
  auto itp = interpolate_fold(S, spec);
  CHECK(itp.length >= 1);
  CHECK(itp.length <= 2);
  REQUIRE(itp.up.has_value());
  REQUIRE(itp.down.has_value());
  CHECK(is_collapse(*itp.up).has_value());
  CHECK(is_collapse(*itp.down).has_value());
  CHECK(itp.mid->validate().empty());
}

TEST_CASE("fold sequence equivalence: seq vs itself and subdivided copy") {
  auto fx = rose_ab_map();
  auto ff = fold_factorize(fx.f);
  CHECK(fold_sequences_equivalent(ff.seq, ff.seq));
}

TEST_CASE("inequivalent folds determining the same fold path") {
  // valence-4 vertex v with arcs a, b to a second vertex and a loop c at v;
  // the map spinning a over c and the map spinning b over c^-1 are
  // homotopic, give conjugate targets, but are inequivalent folds
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(2), SubgroupAutomaton(2)};
  std::vector<FreeSplitting::Edgelet> pairs{
      {0, 1, Word{}}, {0, 1, Word::parse("b")}, {0, 0, Word::parse("a")}};
  auto G0 = FreeSplitting::make(2, groups, pairs);
  REQUIRE(G0->validate().empty());
  // fold 1: identify the first half of arc a with the full loop c
  auto Sa = G0->subdivided({2, 1, 1});
  // Sa pairs: 0: 0->2 (first half of a), 1: 2->1, 2: b-arc, 3: c-loop
  auto r1 = fold(Sa, FoldSpec{0, 6, 0, Word{}, 1});
  // fold 2: identify the first half of arc b with the reversed loop c
  auto Sb = G0->subdivided({1, 2, 1});
  // Sb pairs: 0: a-arc, 1: 0->2 (first half of b), 2: 2->1, 3: c-loop
  auto r2 = fold(Sb, FoldSpec{0, 7, 2, Word{}, 1});
  auto f1 = fold_factorize(r1.map);
  auto f2 = fold_factorize(r2.map);
  CHECK(f1.seq.length() == 1);
  CHECK(f2.seq.length() == 1);
  // same 1-step fold path: both columns conjugate
  CHECK(conjugate(f1.seq.splittings[0], f2.seq.splittings[0]));
  CHECK(conjugate(f1.seq.splittings[1], f2.seq.splittings[1]));
  // but the fold sequences are inequivalent
  CHECK(!fold_sequences_equivalent(f1.seq, f2.seq));
}
