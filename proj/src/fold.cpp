#include "fsplit/fold.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace fsplit {

namespace {

// single-edgelet fold of directions (e1, 1) and (e2, w) at their common
// initial vertex
FoldResult fold_one(Sp S, int e1, int e2, const Word& w) {
  if (e1 / 2 == e2 / 2) throw std::invalid_argument("SAME-ORBIT");
  int v = S->src(e1);
  if (S->src(e2) != v || !S->group(v).member(w))
    throw std::invalid_argument("fold: directions not at a common vertex");
  int x = S->dst(e1), y = S->dst(e2);
  const Word t1 = S->twist(e1), t2 = S->twist(e2);

  int V = S->nv();
  std::vector<Word> adj(static_cast<size_t>(V));
  std::vector<int> nb(static_cast<size_t>(V));
  std::vector<SubgroupAutomaton> groups;
  if (x != y) {
    // type IA vertex merge: z replaces x and y
    std::vector<Word> gens;
    for (const Word& b : S->group(x).free_basis()) gens.push_back(b.conjugate(t1));
    Word u = w * t2;
    for (const Word& b : S->group(y).free_basis()) gens.push_back(b.conjugate(u));
    SubgroupAutomaton B = SubgroupAutomaton::from_generators(S->rank(), gens);
    int id = 0;
    for (int q = 0; q < V; ++q) {
      if (q == y) continue;
      nb[static_cast<size_t>(q)] = id++;
    }
    nb[static_cast<size_t>(y)] = nb[static_cast<size_t>(x)];
    for (int q = 0; q < V; ++q) {
      if (q == y) continue;
      if (q == x)
        groups.push_back(B);
      else
        groups.push_back(S->group(q));
      adj[static_cast<size_t>(q)] = q == x ? t1.inverse() : Word{};
    }
    adj[static_cast<size_t>(y)] = (w * t2).inverse();
  } else {
    // type IIIA-style merge at a single vertex orbit
    Word gamma = w * t2 * t1.inverse();
    std::vector<Word> gens;
    for (const Word& b : S->group(x).free_basis()) gens.push_back(b.conjugate(t1));
    gens.push_back(gamma);
    SubgroupAutomaton B = SubgroupAutomaton::from_generators(S->rank(), gens);
    for (int q = 0; q < V; ++q) {
      nb[static_cast<size_t>(q)] = q;
      if (q == x)
        groups.push_back(B);
      else
        groups.push_back(S->group(q));
      adj[static_cast<size_t>(q)] = q == x ? t1.inverse() : Word{};
    }
  }
  // surviving edgelet pairs: drop the pair of e2
  std::vector<FreeSplitting::Edgelet> pairs;
  std::vector<int> pairOf(static_cast<size_t>(S->npairs()), -1);
  for (int e = 0; e < S->ne2(); e += 2) {
    if (e / 2 == e2 / 2) continue;
    pairOf[static_cast<size_t>(e / 2)] = static_cast<int>(pairs.size());
    pairs.push_back({nb[static_cast<size_t>(S->src(e))], nb[static_cast<size_t>(S->dst(e))],
                     adj[static_cast<size_t>(S->src(e))].inverse() * S->twist(e) *
                         adj[static_cast<size_t>(S->dst(e))]});
  }
  Sp T = FreeSplitting::make(S->rank(), std::move(groups), std::move(pairs));
  EqMap f;
  f.dom = S;
  f.cod = T;
  for (int q = 0; q < V; ++q) {
    f.vbase.push_back(nb[static_cast<size_t>(q)]);
    f.vwit.push_back(adj[static_cast<size_t>(q)]);
  }
  f.eimg.assign(static_cast<size_t>(S->ne2()), std::nullopt);
  for (int e = 0; e < S->ne2(); ++e) {
    if (e / 2 == e2 / 2) continue;
    int p = pairOf[static_cast<size_t>(e / 2)];
    f.eimg[static_cast<size_t>(e)] =
        TreeStep{2 * p + (e % 2), adj[static_cast<size_t>(S->src(e))]};
  }
  // the folded pair: (e2, g) maps where (e1, g * w^-1) maps
  {
    auto base = *f.eimg[static_cast<size_t>(e1)];
    f.eimg[static_cast<size_t>(e2)] = TreeStep{base.e, w.inverse() * base.g};
    // reversal consistency
    f.eimg[static_cast<size_t>(FreeSplitting::rev(e2))] =
        TreeStep{FreeSplitting::rev(base.e),
                 t2.inverse() * w.inverse() * base.g * T->twist(base.e)};
  }
  FoldResult r;
  r.to = T;
  r.map = std::move(f);
  r.spec = FoldSpec{v, e1, e2, w, 1};
  return r;
}

}  // namespace

FoldResult fold(Sp S, const FoldSpec& spec) {
  if (spec.e1 / 2 == spec.e2 / 2) throw std::invalid_argument("SAME-ORBIT");
  int c1 = S->chain_of(spec.e1), c2 = S->chain_of(spec.e2);
  const auto &ch1 = S->natural_chains()[static_cast<size_t>(c1)],
             &ch2 = S->natural_chains()[static_cast<size_t>(c2)];
  if (ch1.front() != spec.e1 || ch2.front() != spec.e2)
    throw std::invalid_argument("fold: directions must start natural edges");
  if (spec.len > static_cast<int>(std::min(ch1.size(), ch2.size())))
    throw std::invalid_argument("fold: segment longer than a natural edge");
  // iterate single-edgelet folds along the two chains
  EqMap acc;  // S -> current
  Sp cur = S;
  FoldSpec realized = spec;
  Word pre1, pre2;
  for (int j = 0; j < spec.len; ++j) {
    TreeStep d1{ch1[static_cast<size_t>(j)], pre1};
    TreeStep d2{ch2[static_cast<size_t>(j)], spec.w * pre2};
    pre1 = pre1 * S->twist(ch1[static_cast<size_t>(j)]);
    pre2 = pre2 * S->twist(ch2[static_cast<size_t>(j)]);
    TreeStep D1 = d1, D2 = d2;
    if (j > 0) {
      D1 = *map_step(acc, d1);
      D2 = *map_step(acc, d2);
    }
    // normalize to directions (E1, 1), (E2, alpha^-1 beta) at the canonical lift
    Word alpha = D1.g, beta = D2.g;
    FoldResult step = fold_one(cur, D1.e, D2.e, alpha.inverse() * beta);
    // conjugate-normalize: fold_one identified (E1,g)~(E2, g a^-1 b); our
    // directions are alpha-translates, which the equivariant quotient absorbs
    acc = (j == 0) ? step.map : compose(acc, step.map);
    cur = step.to;
  }
  FoldResult r;
  r.to = cur;
  r.map = std::move(acc);
  r.spec = realized;
  if (!is_foldable(r.map).ok)
    throw std::invalid_argument("fold: spec does not define a fold (result not foldable)");
  return r;
}

FoldClass classify_fold(Sp S, const FoldSpec& spec) {
  if (spec.e1 < 0 || spec.e2 < 0 || spec.e1 / 2 == spec.e2 / 2 || spec.len < 1)
    throw std::invalid_argument("NOT-A-FOLD");
  int c1 = S->chain_of(spec.e1), c2 = S->chain_of(spec.e2);
  const auto &ch1 = S->natural_chains()[static_cast<size_t>(c1)],
             &ch2 = S->natural_chains()[static_cast<size_t>(c2)];
  int l1 = static_cast<int>(ch1.size()), l2 = static_cast<int>(ch2.size());
  if (spec.len > std::min(l1, l2)) throw std::invalid_argument("NOT-A-FOLD");
  FoldClass fc{};
  bool full1 = spec.len == l1, full2 = spec.len == l2;
  fc.extent = (!full1 && !full2) ? FoldExtent::Partial
                                 : ((full1 && full2) ? FoldExtent::ImproperFull
                                                     : FoldExtent::ProperFull);
  // terminal vertices of the folded segments
  int w1 = S->dst(ch1[static_cast<size_t>(spec.len - 1)]);
  int w2 = S->dst(ch2[static_cast<size_t>(spec.len - 1)]);
  fc.kind = (w1 == w2) ? FoldKind::IIIA : FoldKind::IA;
  if (fc.kind == FoldKind::IIIA && fc.extent == FoldExtent::ProperFull)
    throw std::logic_error("classify_fold: IIIA proper-full is impossible");
  return fc;
}

FoldFactor maximal_fold_factor(const EqMap& f, const Turn& turn) {
  const FreeSplitting& S = *f.dom;
  auto i1 = map_step(f, turn.d1), i2 = map_step(f, turn.d2);
  if (!i1 || !i2 || !(*i1 == *i2)) throw std::invalid_argument("LEGAL-TURN");
  int c1 = S.chain_of(turn.d1.e), c2 = S.chain_of(turn.d2.e);
  const auto &ch1 = S.natural_chains()[static_cast<size_t>(c1)],
             &ch2 = S.natural_chains()[static_cast<size_t>(c2)];
  // lockstep walk for the maximal identified initial segments
  int m = 0;
  Word pre1, pre2 = turn.d2.g;
  while (m < static_cast<int>(std::min(ch1.size(), ch2.size()))) {
    TreeStep s1{ch1[static_cast<size_t>(m)], pre1};
    TreeStep s2{ch2[static_cast<size_t>(m)], pre2};
    auto a = map_step(f, s1), b = map_step(f, s2);
    if (!a || !b || !(*a == *b)) break;
    pre1 = pre1 * S.twist(ch1[static_cast<size_t>(m)]);
    pre2 = pre2 * S.twist(ch2[static_cast<size_t>(m)]);
    ++m;
  }
  if (m == 0) throw std::invalid_argument("LEGAL-TURN");
  FoldSpec spec{turn.v, turn.d1.e, turn.d2.e, turn.d2.g, m};
  FoldResult k = fold(f.dom, spec);
  // induced map g: U -> T with g(k(x)) = f(x)
  const FreeSplitting& U = *k.to;
  EqMap g;
  g.dom = k.to;
  g.cod = f.cod;
  g.vbase.assign(static_cast<size_t>(U.nv()), -1);
  g.vwit.assign(static_cast<size_t>(U.nv()), Word{});
  g.eimg.assign(static_cast<size_t>(U.ne2()), std::nullopt);
  for (int v = 0; v < S.nv(); ++v) {
    int z = k.map.vbase[static_cast<size_t>(v)];
    if (g.vbase[static_cast<size_t>(z)] != -1) continue;
    g.vbase[static_cast<size_t>(z)] = f.vbase[static_cast<size_t>(v)];
    g.vwit[static_cast<size_t>(z)] =
        k.map.vwit[static_cast<size_t>(v)].inverse() * f.vwit[static_cast<size_t>(v)];
  }
  for (int e = 0; e < S.ne2(); ++e) {
    const auto& ke = k.map.eimg[static_cast<size_t>(e)];
    const auto& fe = f.eimg[static_cast<size_t>(e)];
    if (!ke) throw std::logic_error("fold map collapsed an edgelet");
    if (g.eimg[static_cast<size_t>(ke->e)]) continue;
    if (!fe) throw std::logic_error("maximal_fold_factor: foldable map collapsed an edgelet");
    g.eimg[static_cast<size_t>(ke->e)] = TreeStep{fe->e, ke->g.inverse() * fe->g};
  }
  if (!validate_map(g).empty()) throw std::logic_error("maximal_fold_factor: induced map invalid");
  if (!maps_equal(compose(k.map, g), f))
    throw std::logic_error("maximal_fold_factor: factorization mismatch");
  if (!is_foldable(g).ok) throw std::logic_error("maximal_fold_factor: rest not foldable");
  return FoldFactor{std::move(k), std::move(g)};
}

EqMap FoldSequence::composite(int i, int j) const {
  EqMap f = identity_map(splittings[static_cast<size_t>(i)]);
  for (int k = i; k < j; ++k) f = compose(f, folds[static_cast<size_t>(k)]);
  return f;
}

FoldFactorization fold_factorize(const EqMap& f0) {
  if (!is_foldable(f0).ok) throw std::invalid_argument("fold_factorize: map not foldable");
  FoldFactorization out;
  out.seq.splittings.push_back(f0.dom);
  EqMap cur = f0;
  while (true) {
    auto turn = find_illegal_turn(cur);
    if (!turn) break;
    FoldFactor ff = maximal_fold_factor(cur, *turn);
    out.seq.splittings.push_back(ff.fold.to);
    out.seq.folds.push_back(ff.fold.map);
    out.seq.specs.push_back(ff.fold.spec);
    cur = ff.rest;
  }
  // cur is locally injective, hence a simplicial conjugacy onto the codomain
  if (!locally_injective(cur)) throw std::logic_error("fold_factorize: terminal not injective");
  if (out.seq.length() == 0) {
    out.terminalConjugacy = cur;
    return out;
  }
  // absorb the terminal conjugacy into the last fold
  out.seq.folds.back() = compose(out.seq.folds.back(), cur);
  out.seq.splittings.back() = f0.cod;
  return out;
}

std::vector<std::string> validate_fold_sequence(const FoldSequence& seq) {
  std::vector<std::string> bad;
  int K = seq.length();
  for (int i = 0; i <= K; ++i)
    if (!seq.splittings[static_cast<size_t>(i)]->validate().empty())
      bad.push_back("SPLITTING: index " + std::to_string(i));
  for (int i = 0; i < K; ++i) {
    if (!validate_map(seq.folds[static_cast<size_t>(i)]).empty())
      bad.push_back("MAP: fold " + std::to_string(i + 1));
    if (seq.splittings[static_cast<size_t>(i + 1)]->npairs() >=
        seq.splittings[static_cast<size_t>(i)]->npairs())
      bad.push_back("ORBITS: no strict decrease at fold " + std::to_string(i + 1));
  }
  for (int i = 0; i < K && bad.empty(); ++i)
    for (int j = i + 1; j <= K; ++j)
      if (!is_foldable(seq.composite(i, j)).ok)
        bad.push_back("FOLDABLE: composite " + std::to_string(i) + ".." + std::to_string(j));
  // maximality of each fold within the composite to the end
  for (int i = 1; i <= K && bad.empty(); ++i) {
    const FoldSpec& sp = seq.specs[static_cast<size_t>(i - 1)];
    const auto& S = seq.splittings[static_cast<size_t>(i - 1)];
    EqMap toEnd = seq.composite(i - 1, K);
    Turn t{sp.vertex, TreeStep{sp.e1, Word{}}, TreeStep{sp.e2, sp.w}};
    auto a = map_step(toEnd, t.d1), b = map_step(toEnd, t.d2);
    if (!a || !b || !(*a == *b)) {
      bad.push_back("MAXIMAL: fold " + std::to_string(i) + " does not fold a turn of the composite");
      continue;
    }
    const auto& ch1 = S->natural_chains()[static_cast<size_t>(S->chain_of(sp.e1))];
    const auto& ch2 = S->natural_chains()[static_cast<size_t>(S->chain_of(sp.e2))];
    Word pre1, pre2 = sp.w;
    int m = 0;
    while (m < static_cast<int>(std::min(ch1.size(), ch2.size()))) {
      auto ia = map_step(toEnd, TreeStep{ch1[static_cast<size_t>(m)], pre1});
      auto ib = map_step(toEnd, TreeStep{ch2[static_cast<size_t>(m)], pre2});
      if (!ia || !ib || !(*ia == *ib)) break;
      pre1 = pre1 * S->twist(ch1[static_cast<size_t>(m)]);
      pre2 = pre2 * S->twist(ch2[static_cast<size_t>(m)]);
      ++m;
    }
    if (m != sp.len)
      bad.push_back("MAXIMAL: fold " + std::to_string(i) + " identifies " +
                    std::to_string(sp.len) + " edgelets, maximal is " + std::to_string(m));
  }
  return bad;
}

FoldInterpolation interpolate_fold(Sp S, const FoldSpec& spec0) {
  FoldSpec spec = spec0;
  Sp base = S;
  if (spec.len == 0) return FoldInterpolation{0, S, std::nullopt, std::nullopt};
  if (spec.len == 1) {
    // subdivide so each folded segment has >= 2 edgelets
    std::vector<int> counts(static_cast<size_t>(S->npairs()), 1);
    counts[static_cast<size_t>(spec.e1 / 2)] = 2;
    counts[static_cast<size_t>(spec.e2 / 2)] = 2;
    base = S->subdivided(counts);
    // folded directions in the subdivided graph
    std::vector<int> off(static_cast<size_t>(S->npairs()) + 1, 0);
    for (int p = 0; p < S->npairs(); ++p)
      off[static_cast<size_t>(p) + 1] = off[static_cast<size_t>(p)] + counts[static_cast<size_t>(p)];
    auto subFirst = [&](int e) {
      int p = e / 2, k = counts[static_cast<size_t>(p)];
      return (e % 2 == 0) ? 2 * off[static_cast<size_t>(p)]
                          : 2 * (off[static_cast<size_t>(p)] + k - 1) + 1;
    };
    spec = FoldSpec{spec.vertex, subFirst(spec.e1), subFirst(spec.e2), spec.w, 2};
  }
  // fold only the initial edgelets -> U
  FoldSpec initial = spec;
  initial.len = 1;
  FoldResult g = fold(base, initial);
  // sigma0: orbit of the folded image edgelet; collapsing it recovers S
  auto img1 = *g.map.eimg[static_cast<size_t>(spec.e1)];
  auto sigma0 = InvariantSubgraph::none(g.to->npairs());
  sigma0.pairs[static_cast<size_t>(img1.e / 2)] = 1;
  auto back = collapse(g.to, sigma0);
  if (!conjugate(back.to, base))
    throw std::logic_error("interpolate_fold: initial collapse does not recover the source");
  // sigma1: orbits of the residual identified segments
  auto sigma1 = InvariantSubgraph::none(g.to->npairs());
  {
    const auto& ch1 = base->natural_chains()[static_cast<size_t>(base->chain_of(spec.e1))];
    const auto& ch2 = base->natural_chains()[static_cast<size_t>(base->chain_of(spec.e2))];
    for (int j = 1; j < spec.len; ++j) {
      sigma1.pairs[static_cast<size_t>(
          g.map.eimg[static_cast<size_t>(ch1[static_cast<size_t>(j)])]->e / 2)] = 1;
      sigma1.pairs[static_cast<size_t>(
          g.map.eimg[static_cast<size_t>(ch2[static_cast<size_t>(j)])]->e / 2)] = 1;
    }
  }
  auto down = collapse(g.to, sigma1);
  FoldResult whole = fold(base, spec);
  if (!conjugate(down.to, whole.to))
    throw std::logic_error("interpolate_fold: residual collapse does not recover the target");
  FoldInterpolation out;
  out.mid = g.to;
  out.up = back.map;
  out.down = down.map;
  // length 1 when U is already conjugate to T (no natural residual segment)
  out.length = conjugate(g.to, whole.to) ? 1 : 2;
  return out;
}

// ---------- equivalence of fold sequences ----------

namespace {

// natural-form vertex index of an original vertex
int nf_vertex(const FreeSplitting& S, int v) {
  int id = 0;
  for (int u = 0; u < S.nv(); ++u) {
    if (u == v) return S.natural(u) ? id : -1;
    if (S.natural(u)) ++id;
  }
  return -1;
}

// natural-form step of the first edgelet of a path leaving a natural vertex
TreeStep nf_first_step(const FreeSplitting& S, const TreeStep& s) {
  int chain = S.chain_of(s.e);
  const auto& ch = S.natural_chains()[static_cast<size_t>(chain)];
  if (ch.front() != s.e) throw std::logic_error("nf_first_step: not a chain head");
  // natural-form pair ids follow the orbit enumeration order
  int id = 0;
  for (size_t c = 0; c < S.natural_chains().size(); ++c) {
    if (static_cast<int>(c) > S.natural_rev(static_cast<int>(c))) continue;
    if (static_cast<int>(c) == chain) return TreeStep{2 * id, s.g};
    if (S.natural_rev(static_cast<int>(c)) == chain) return TreeStep{2 * id + 1, s.g};
    ++id;
  }
  throw std::logic_error("nf_first_step: chain not found");
}

}  // namespace

bool fold_sequences_equivalent(const FoldSequence& a, const FoldSequence& b) {
  if (a.length() != b.length()) return false;
  int K = a.length();
  std::vector<EqMap> h;  // natural-form conjugacies per column
  for (int i = 0; i <= K; ++i) {
    auto w = are_conjugate(a.splittings[static_cast<size_t>(i)], b.splittings[static_cast<size_t>(i)]);
    if (!w) return false;
    h.push_back(std::move(*w));
  }
  // ladder commutativity on natural cells: for each column i and each
  // oriented natural chain of a.S_{i-1}, compare the natural-form images of
  // the chain's initial direction under (h_i after f_i) and (g_i after h_{i-1})
  for (int i = 1; i <= K; ++i) {
    const FreeSplitting& SA = *a.splittings[static_cast<size_t>(i - 1)];
    const FreeSplitting& SB = *b.splittings[static_cast<size_t>(i - 1)];
    const EqMap& fa = a.folds[static_cast<size_t>(i - 1)];
    const EqMap& fb = b.folds[static_cast<size_t>(i - 1)];
    for (size_t c = 0; c < SA.natural_chains().size(); ++c) {
      const auto& ch = SA.natural_chains()[c];
      TreeStep dir{ch.front(), Word{}};
      // route 1: fold in a, then conjugate
      auto img1 = map_step(fa, dir);
      if (!img1) return false;
      // push to the chain head in a.S_i: the image starts at a natural vertex
      TreeStep nf1 = nf_first_step(*fa.cod, *img1);
      TreeStep r1 = *map_step(h[static_cast<size_t>(i)], nf1);
      // route 2: conjugate, then fold in b
      TreeStep nf0 = nf_first_step(SA, dir);
      TreeStep moved = *map_step(h[static_cast<size_t>(i - 1)], nf0);
      // moved is a natural-form step of b.S_{i-1}; translate back to the full
      // graph of b.S_{i-1}: the natural-form edgelet corresponds to a chain
      int nfPair = moved.e / 2, idx = 0, chainB = -1;
      for (size_t cb = 0; cb < SB.natural_chains().size(); ++cb) {
        if (static_cast<int>(cb) > SB.natural_rev(static_cast<int>(cb))) continue;
        if (idx == nfPair) {
          chainB = moved.e % 2 == 0 ? static_cast<int>(cb) : SB.natural_rev(static_cast<int>(cb));
          break;
        }
        ++idx;
      }
      if (chainB < 0) return false;
      TreeStep dirB{SB.natural_chains()[static_cast<size_t>(chainB)].front(), moved.g};
      auto img2 = map_step(fb, dirB);
      if (!img2) return false;
      TreeStep r2 = nf_first_step(*fb.cod, *img2);
      if (!(r1 == r2)) return false;
    }
  }
  return true;
}

}  // namespace fsplit
