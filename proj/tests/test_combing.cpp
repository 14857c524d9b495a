#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsplit/gen.hpp"
#include "fsplit/pushout.hpp"

using namespace fsplit;

namespace {

FoldableSequence demo_sequence(Rng& rng, int rank = 2, int moves = 4) {
  return as_foldable(random_fold_sequence(rng, rank, moves));
}

}  // namespace

TEST_CASE("comb by collapse on a fold sequence") {
  Rng rng(7);
  auto seq = demo_sequence(rng);
  const auto& SK = seq.splittings.back();
  // collapse the complement of the first natural edge orbit
  int chain = 0;
  auto sigma = InvariantSubgraph::all(SK->npairs()).minus(SK->chain_support(chain));
  if (sigma.full()) sigma = InvariantSubgraph::none(SK->npairs());
  auto R = comb_by_collapse(seq, sigma);
  CHECK(validate_rectangle(R).empty());
  // bottom row of one-edge splittings when sigma is a natural complement
  if (!sigma.empty())
    CHECK(R.lower.splittings.back()->natural_orbit_count() == 1);
}

TEST_CASE("trivial rectangle validates") {
  Rng rng(8);
  auto seq = demo_sequence(rng);
  auto R = improper_rectangle(seq);
  CHECK(validate_rectangle(R).empty());
  auto R2 = comb_by_collapse(seq, InvariantSubgraph::none(seq.splittings.back()->npairs()));
  CHECK(validate_rectangle(R2).empty());
}

TEST_CASE("rectangle with broken preimage condition fails") {
  Rng rng(9);
  auto seq = demo_sequence(rng);
  auto sigma = InvariantSubgraph::none(seq.splittings.back()->npairs());
  sigma.pairs[0] = 1;
  auto R = comb_by_collapse(seq, sigma);
  REQUIRE(validate_rectangle(R).empty());
  // damage sigma_0
  if (!R.sigma[0].empty()) {
    R.sigma[0] = InvariantSubgraph::none(R.upper.splittings[0]->npairs());
    CHECK(!validate_rectangle(R).empty());
  }
}

TEST_CASE("compose and decompose rectangles") {
  Rng rng(10);
  auto seq = demo_sequence(rng);
  const auto& SK = seq.splittings.back();
  // a two-orbit collapse decomposed along a one-orbit subfamily
  auto sigma = InvariantSubgraph::none(SK->npairs());
  sigma.pairs[0] = 1;
  if (SK->npairs() >= 2) sigma.pairs[1] = 1;
  if (sigma.full()) sigma.pairs[static_cast<size_t>(SK->npairs() - 1)] = 0;
  auto R = comb_by_collapse(seq, sigma);
  REQUIRE(validate_rectangle(R).empty());
  std::vector<InvariantSubgraph> sub;
  for (int i = 0; i <= R.length(); ++i) {
    auto s = InvariantSubgraph::none(R.upper.splittings[static_cast<size_t>(i)]->npairs());
    sub.push_back(s);
  }
  // sigma' = full preimage family of pair 0 of the last column
  sub.back().pairs[0] = sigma.pairs[0];
  for (int i = R.length(); i-- > 0;)
    sub[static_cast<size_t>(i)] = preimage(R.upper.maps[static_cast<size_t>(i)],
                                           sub[static_cast<size_t>(i + 1)]);
  auto [top, bot] = decompose_rectangle(R, sub);
  CHECK(validate_rectangle(top).empty());
  CHECK(validate_rectangle(bot).empty());
  auto C = compose_rectangles(top, bot);
  CHECK(validate_rectangle(C).empty());
  // round trip: composed collapse graphs match the original
  for (int i = 0; i <= R.length(); ++i) CHECK(C.sigma[static_cast<size_t>(i)] == R.sigma[static_cast<size_t>(i)]);
  for (int i = 0; i <= R.length(); ++i)
    CHECK(conjugate(C.lower.splittings[static_cast<size_t>(i)],
                    R.lower.splittings[static_cast<size_t>(i)]));
}

TEST_CASE("pushout with identity legs") {
  auto S = FreeSplitting::rose(2);
  auto col = pushout(identity_map(S), identity_map(S));
  CHECK(col.U->validate().empty());
  CHECK(conjugate(col.U, S));
  CHECK(col.badVertices.empty());
}

TEST_CASE("pushout against a vertex-group blowup") {
  // S_K = hnn splitting over <a>; T' = its discontinuous expansion
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton::from_generators(2, {Word::parse("a")})};
  auto H = FreeSplitting::make(2, groups, {{0, 0, Word::parse("b")}});
  auto exp = pd_expansion(H);
  auto col = pushout(identity_map(H), exp.map);
  CHECK(col.U->validate().empty());
  CHECK(conjugate(col.U, exp.to));
  CHECK(validate_map(col.toS).empty());
  CHECK(validate_map(col.toT).empty());
}

TEST_CASE("comb by expansion along a one-edge blowup") {
  Rng rng(11);
  // fold sequence ending at a splitting with a nontrivial vertex group
  auto S = FreeSplitting::rose(2);
  auto r = fold(S, FoldSpec{0, 0, 2, Word{}, 1});  // improper full fold
  auto ff = fold_factorize(r.map);
  REQUIRE(ff.seq.length() >= 1);
  auto seq = as_foldable(ff.seq);
  const auto& SK = seq.splittings.back();
  auto exp = pd_expansion(SK);
  auto res = comb_by_expansion(seq, exp.map);
  CHECK(validate_rectangle(res.rect).empty());
  CHECK(is_conjugacy(res.lastConj));
  for (size_t i = 0; i < res.columns.size(); ++i) {
    auto rep = check_multifold(res.columns[i], res.multifolds[i]);
    CHECK(rep.empty());
  }
}

TEST_CASE("comb by expansion with an improper expansion is trivial") {
  Rng rng(12);
  auto seq = demo_sequence(rng);
  auto res = comb_by_expansion(seq, identity_map(seq.splittings.back()));
  CHECK(validate_rectangle(res.rect).empty());
  for (int i = 0; i <= seq.length(); ++i)
    CHECK(conjugate(res.rect.upper.splittings[static_cast<size_t>(i)],
                    seq.splittings[static_cast<size_t>(i)]));
}

TEST_CASE("comb by expansion over a longer random sequence") {
  Rng rng(13);
  auto seq = demo_sequence(rng, 2, 5);
  const auto& SK = seq.splittings.back();
  Sp Tp;
  EqMap piP;
  if (!vertex_group_system(*SK).empty()) {
    auto exp = pd_expansion(SK);
    Tp = exp.to;
    piP = exp.map;
  } else {
    // expand by un-collapsing: subdivide a loop then collapse is improper;
    // use a fold-based expansion: collapse one natural edge of a finer model
    auto sub = SK->subdivided(std::vector<int>(static_cast<size_t>(SK->npairs()), 2));
    // collapse every second edgelet: gives back SK; the expansion witness is
    // the collapse map sub -> SK-like
    std::vector<int> counts;
    auto sigma = InvariantSubgraph::none(sub->npairs());
    for (int p = 0; p < sub->npairs(); p += 2) sigma.pairs[static_cast<size_t>(p)] = 1;
    auto c = collapse(sub, sigma);
    if (conjugate(c.to, SK)) {
      // align presentations: only proceed when identical
    }
    Tp = sub;
    // build collapse sub -> SK directly when the presentations agree
    piP = c.map;
    if (c.to->canonical_string() != SK->canonical_string()) {
      // fall back: improper
      Tp = SK;
      piP = identity_map(SK);
    } else {
      piP.cod = SK;
    }
  }
  auto res = comb_by_expansion(seq, piP);
  CHECK(validate_rectangle(res.rect).empty());
  CHECK(is_conjugacy(res.lastConj));
}
