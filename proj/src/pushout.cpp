#include "fsplit/pushout.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace fsplit {

namespace {

// cells of the pushout carry explicit pair coordinates
struct PVert {
  int xv;  // S_i vertex (the X part is (xv, xloc * A))
  Word xloc;
  int yv;  // T' vertex
  Word yloc;
};

struct PEdge {
  bool collapsed;  // X part degenerate
  int xe = -1;     // uncollapsed: S_i edgelet of the canonical lift
  Word xg;
  int xv = -1;  // collapsed: S_i vertex
  Word xloc;
  int ye = -1;  // T' edgelet
  Word yg;
};

struct Builder {
  const FreeSplitting* S;
  const FreeSplitting* Tp;
  std::vector<PVert> verts;
  std::vector<SubgroupAutomaton> vgroups;
  std::map<std::string, SubgroupAutomaton> conjCache;

  const SubgroupAutomaton& conj_group(const FreeSplitting& X, int v, const Word& c) {
    std::string key = (&X == S ? "S" : "T") + std::to_string(v) + ":" + c.str();
    auto it = conjCache.find(key);
    if (it != conjCache.end()) return it->second;
    return conjCache.emplace(key, X.group(v).conjugated(c)).first->second;
  }

  // locate the vertex orbit of a raw pair; returns (index, locator k) with
  // raw = k * canonical
  std::pair<int, Word> find_vertex(const PVert& raw) {
    for (size_t i = 0; i < verts.size(); ++i) {
      const PVert& c = verts[i];
      if (c.xv != raw.xv || c.yv != raw.yv) continue;
      auto k = SubgroupAutomaton::coset_intersection(
          raw.xloc * c.xloc.inverse(), conj_group(*S, c.xv, c.xloc),
          raw.yloc * c.yloc.inverse(), conj_group(*Tp, c.yv, c.yloc));
      if (k) return {static_cast<int>(i), *k};
    }
    return {-1, Word{}};
  }

  int add_vertex(const PVert& raw) {
    auto [i, k] = find_vertex(raw);
    if (i >= 0) return i;
    verts.push_back(raw);
    auto stab = SubgroupAutomaton::intersection(conj_group(*S, raw.xv, raw.xloc),
                                                conj_group(*Tp, raw.yv, raw.yloc));
    vgroups.push_back(stab);
    return static_cast<int>(verts.size()) - 1;
  }
};

// wait-free key for dedup of hull cells
std::string step_key(const TreeStep& s) { return std::to_string(s.e) + ":" + s.g.str(); }

}  // namespace

PushoutColumn pushout(const EqMap& f, const EqMap& piPrime) {
  const FreeSplitting& S = *f.dom;    // S_i
  const FreeSplitting& SK = *f.cod;   // S_K
  const FreeSplitting& Tp = *piPrime.dom;  // T'
  if (piPrime.cod->ne2() != SK.ne2())
    throw std::invalid_argument("pushout: maps do not share a codomain");

  // T'-side lift of each S_K oriented edgelet
  std::vector<int> liftE(static_cast<size_t>(SK.ne2()), -1);
  std::vector<Word> liftG(static_cast<size_t>(SK.ne2()));
  for (int a = 0; a < Tp.ne2(); ++a) {
    const auto& img = piPrime.eimg[static_cast<size_t>(a)];
    if (!img) continue;
    liftE[static_cast<size_t>(img->e)] = a;
    liftG[static_cast<size_t>(img->e)] = img->g;
  }
  // Y part of the uncollapsed edgelet over each S_i oriented edgelet
  std::vector<int> yE(static_cast<size_t>(S.ne2()), -1);
  std::vector<Word> yG(static_cast<size_t>(S.ne2()));
  for (int e = 0; e < S.ne2(); ++e) {
    const auto& fe = f.eimg[static_cast<size_t>(e)];
    if (!fe) throw std::invalid_argument("pushout: foldable side collapses an edgelet");
    int a = liftE[static_cast<size_t>(fe->e)];
    if (a < 0) throw std::logic_error("pushout: missing T' lift of an S_K edgelet");
    yE[static_cast<size_t>(e)] = a;
    yG[static_cast<size_t>(e)] = fe->g * liftG[static_cast<size_t>(fe->e)].inverse();
  }

  Builder B{&S, &Tp, {}, {}, {}};
  // hull cells per S_i vertex
  struct HullEdge {
    int v;
    TreeStep step;  // T' edgelet, even orientation
  };
  std::vector<HullEdge> hullEdges;
  std::vector<std::pair<int, int>> edgeEndV;  // filled later
  for (int v = 0; v < S.nv(); ++v) {
    std::vector<TreeVertex> pts;
    for (int e : S.halfedges(v))
      pts.push_back(Tp.tv(Tp.src(yE[static_cast<size_t>(e)]), yG[static_cast<size_t>(e)]));
    std::vector<Word> trans{Word{}};
    if (!S.group(v).trivial())
      for (const Word& b : S.group(v).free_basis()) {
        trans.push_back(b);
        trans.push_back(b.inverse());
      }
    std::vector<TreeVertex> all;
    for (const Word& t : trans)
      for (const TreeVertex& p : pts) all.push_back(Tp.tv(p.v, t * p.loc));
    // hull = union of pairwise paths
    std::set<std::string> seenEdge;
    std::vector<TreeStep> steps;
    for (size_t i = 0; i < all.size(); ++i)
      for (size_t j = i + 1; j < all.size(); ++j) {
        TreePath p = Tp.tree_path(all[i], all[j]);
        for (const TreeStep& s : p.steps) {
          TreeStep even = (s.e % 2 == 0) ? s : Tp.step_rev(s);
          if (seenEdge.insert(step_key(even)).second) steps.push_back(even);
        }
      }
    // reduce modulo A_v
    std::vector<TreeStep> reps;
    for (const TreeStep& s : steps) {
      bool dup = false;
      for (const TreeStep& r : reps)
        if (r.e == s.e && S.group(v).member(s.g * r.g.inverse())) dup = true;
      if (!dup) reps.push_back(s);
    }
    for (const TreeStep& r : reps) hullEdges.push_back({v, r});
    // ensure each frontier point exists as a vertex cell even when the hull
    // has no edges (degenerate fiber)
    for (const TreeVertex& p : pts) B.add_vertex(PVert{v, Word{}, p.v, p.loc});
  }
  // vertex cells from hull edge endpoints
  for (const HullEdge& h : hullEdges) {
    TreeVertex a = Tp.step_start(h.step), b = Tp.step_end(h.step);
    B.add_vertex(PVert{h.v, Word{}, a.v, a.loc});
    B.add_vertex(PVert{h.v, Word{}, b.v, b.loc});
  }

  // assemble edgelet pairs: hull (collapsed) + uncollapsed
  std::vector<FreeSplitting::Edgelet> pairs;
  struct EdgeMeta {
    bool collapsed;
    int v = -1;        // hull: S_i vertex
    TreeStep ystep;    // normalized Y part of the canonical lift
    int xe = -1;       // uncollapsed: S_i edgelet (even)
    Word xg;           // normalized X locator
  };
  std::vector<EdgeMeta> meta;
  for (const HullEdge& h : hullEdges) {
    TreeVertex a = Tp.step_start(h.step), b = Tp.step_end(h.step);
    auto [ia, ka] = B.find_vertex(PVert{h.v, Word{}, a.v, a.loc});
    auto [ib, kb] = B.find_vertex(PVert{h.v, Word{}, b.v, b.loc});
    if (ia < 0 || ib < 0) throw std::logic_error("pushout: hull endpoint not found");
    // normalize so the initial vertex is the canonical pair of cell ia
    TreeStep norm{h.step.e, ka.inverse() * h.step.g};
    Word tw = ka.inverse() * kb;
    pairs.push_back({ia, ib, tw});
    meta.push_back({true, h.v, norm, -1, Word{}});
  }
  for (int p = 0; p < S.npairs(); ++p) {
    int e = 2 * p;
    TreeVertex iy = Tp.tv(Tp.src(yE[static_cast<size_t>(e)]), yG[static_cast<size_t>(e)]);
    TreeVertex ty = Tp.step_end(TreeStep{yE[static_cast<size_t>(e)], yG[static_cast<size_t>(e)]});
    auto [ia, ka] = B.find_vertex(PVert{S.src(e), Word{}, iy.v, iy.loc});
    auto [ib, kb] = B.find_vertex(PVert{S.dst(e), S.twist(e), ty.v, ty.loc});
    if (ia < 0 || ib < 0) throw std::logic_error("pushout: uncollapsed endpoint not found");
    TreeStep normY{yE[static_cast<size_t>(e)], ka.inverse() * yG[static_cast<size_t>(e)]};
    pairs.push_back({ia, ib, ka.inverse() * kb});
    meta.push_back({false, -1, normY, e, ka.inverse()});
  }
  Sp U = FreeSplitting::make(S.rank(), B.vgroups, pairs);
  {
    auto bad = U->validate();
    if (!bad.empty()) throw std::logic_error("pushout: invalid fiber product: " + bad.front());
  }

  // the two projections
  EqMap toS;
  toS.dom = U;
  toS.cod = f.dom;
  EqMap toT;
  toT.dom = U;
  toT.cod = piPrime.dom;
  for (size_t i = 0; i < B.verts.size(); ++i) {
    toS.vbase.push_back(B.verts[i].xv);
    toS.vwit.push_back(B.verts[i].xloc);
    toT.vbase.push_back(B.verts[i].yv);
    toT.vwit.push_back(B.verts[i].yloc);
  }
  for (size_t m = 0; m < meta.size(); ++m) {
    const EdgeMeta& em = meta[m];
    int e = static_cast<int>(2 * m);
    if (em.collapsed) {
      toS.eimg.push_back(std::nullopt);
      toS.eimg.push_back(std::nullopt);
    } else {
      toS.eimg.push_back(TreeStep{em.xe, em.xg});
      toS.eimg.push_back(TreeStep{FreeSplitting::rev(em.xe),
                                  U->twist(e).inverse() * em.xg * S.twist(em.xe)});
    }
    toT.eimg.push_back(em.ystep);
    toT.eimg.push_back(TreeStep{FreeSplitting::rev(em.ystep.e),
                                U->twist(e).inverse() * em.ystep.g * Tp.twist(em.ystep.e)});
  }
  if (!validate_map(toS).empty()) throw std::logic_error("pushout: S projection invalid");
  if (!validate_map(toT).empty()) throw std::logic_error("pushout: T' projection invalid");
  if (!is_collapse(toS)) throw std::logic_error("pushout: S projection not a collapse");

  // bad vertex analysis with respect to the T' projection
  PushoutColumn col;
  col.U = U;
  col.toS = toS;
  col.toT = toT;
  col.Z = InvariantSubgraph::none(U->npairs());
  for (int u = 0; u < U->nv(); ++u) {
    if (!U->group(u).trivial()) continue;
    if (U->halfedges(u).size() < 3) continue;
    auto gp = gates_at(toT, u);
    if (gp.gate_count_or_minus1 != 2) continue;
    // one gate must be a singleton in the hull direction
    int singleton = -1;
    for (auto& b : gp.blocks)
      if (b.size() == 1) singleton = b.front();
    if (singleton < 0) throw std::logic_error("pushout: bad vertex without singleton gate");
    col.badVertices.push_back(u);
    col.badChainOf.push_back(U->natural_rev(U->chain_of(singleton)));  // oriented z_u -> u
    col.externalValence.push_back(static_cast<int>(U->halfedges(u).size()) - 1);
    for (int e : U->natural_chains()[static_cast<size_t>(U->chain_of(singleton))])
      col.Z.pairs[static_cast<size_t>(e / 2)] = 1;
  }
  return col;
}

namespace {

// oriented chain lift: canonical tree path along a chain
TreePath chain_lift(const FreeSplitting& X, const std::vector<int>& chain) {
  TreePath p;
  p.start = X.tv(X.src(chain.front()), Word{});
  Word pre;
  for (int e : chain) {
    p.steps.push_back(TreeStep{e, pre});
    pre = pre * X.twist(e);
  }
  return p;
}

}  // namespace

std::vector<std::string> check_multifold(const PushoutColumn& col, const EqMap& mu) {
  std::vector<std::string> bad;
  const FreeSplitting& U = *col.U;
  // preimage orbit counts per U pair
  std::vector<int> hits(static_cast<size_t>(U.npairs()), 0);
  for (int p = 0; p < mu.dom->npairs(); ++p) {
    const auto& img = mu.eimg[static_cast<size_t>(2 * p)];
    if (!img)
      bad.push_back("COLLAPSED: multifold collapses pair " + std::to_string(p));
    else
      hits[static_cast<size_t>(img->e / 2)]++;
  }
  for (int q = 0; q < U.npairs(); ++q) {
    if (!col.Z.pairs[static_cast<size_t>(q)]) {
      if (hits[static_cast<size_t>(q)] != 1)
        bad.push_back("GOOD: pair " + std::to_string(q) + " covered " +
                      std::to_string(hits[static_cast<size_t>(q)]) + " times");
    }
  }
  // bad edges: chi_u segments
  for (size_t b = 0; b < col.badVertices.size(); ++b) {
    const auto& chain = U.natural_chains()[static_cast<size_t>(col.badChainOf[b])];
    for (int e : chain)
      if (hits[static_cast<size_t>(e / 2)] != col.externalValence[b])
        bad.push_back("BAD: edge of bad vertex " + std::to_string(col.badVertices[b]) +
                      " covered " + std::to_string(hits[static_cast<size_t>(e / 2)]) +
                      " times, external valence " + std::to_string(col.externalValence[b]));
  }
  // derivative surjectivity at natural vertices of the domain
  for (int v = 0; v < mu.dom->nv(); ++v) {
    if (!mu.dom->natural(v) || !mu.dom->group(v).trivial()) continue;
    int z = mu.vbase[static_cast<size_t>(v)];
    if (!U.group(z).trivial()) continue;
    std::set<std::string> want, got;
    for (int e : U.halfedges(z)) want.insert(step_key(TreeStep{e, mu.vwit[static_cast<size_t>(v)]}));
    for (int e : mu.dom->halfedges(v)) {
      auto s = map_step(mu, TreeStep{e, Word{}});
      if (s) got.insert(step_key(*s));
    }
    for (auto& w : want)
      if (!got.count(w))
        bad.push_back("SURJECTIVE: direction missing at domain vertex " + std::to_string(v));
  }
  return bad;
}

ExpansionResult comb_by_expansion(const FoldableSequence& seq, const EqMap& piPrime) {
  int K = seq.length();
  ExpansionResult out;
  std::vector<PushoutColumn> cols;
  for (int i = 0; i <= K; ++i) {
    EqMap f = seq.composite(i, K);
    cols.push_back(pushout(f, piPrime));
  }
  // h maps between consecutive pushouts
  std::vector<EqMap> hmaps;
  for (int i = 1; i <= K; ++i) {
    const PushoutColumn &A = cols[static_cast<size_t>(i - 1)], &Bc = cols[static_cast<size_t>(i)];
    const EqMap& fi = seq.maps[static_cast<size_t>(i - 1)];
    const FreeSplitting &UA = *A.U, &UB = *Bc.U;
    EqMap h;
    h.dom = A.U;
    h.cod = Bc.U;
    h.vbase.assign(static_cast<size_t>(UA.nv()), -1);
    h.vwit.assign(static_cast<size_t>(UA.nv()), Word{});
    h.eimg.assign(static_cast<size_t>(UA.ne2()), std::nullopt);
    // vertices: map the pair coordinates through f_i and locate in UB
    for (int u = 0; u < UA.nv(); ++u) {
      // X part of the canonical lift of u in UA
      int xv = A.toS.vbase[static_cast<size_t>(u)];
      Word xloc = A.toS.vwit[static_cast<size_t>(u)];
      int yv = A.toT.vbase[static_cast<size_t>(u)];
      Word yloc = A.toT.vwit[static_cast<size_t>(u)];
      int xv2 = fi.vbase[static_cast<size_t>(xv)];
      Word xloc2 = xloc * fi.vwit[static_cast<size_t>(xv)];
      // find the UB vertex with this pair
      int found = -1;
      Word k;
      for (int z = 0; z < UB.nv(); ++z) {
        if (Bc.toS.vbase[static_cast<size_t>(z)] != xv2) continue;
        if (Bc.toT.vbase[static_cast<size_t>(z)] != yv) continue;
        auto ki = SubgroupAutomaton::coset_intersection(
            xloc2 * Bc.toS.vwit[static_cast<size_t>(z)].inverse(),
            seq.splittings[static_cast<size_t>(i)]->group(xv2).conjugated(
                Bc.toS.vwit[static_cast<size_t>(z)]),
            yloc * Bc.toT.vwit[static_cast<size_t>(z)].inverse(),
            piPrime.dom->group(yv).conjugated(Bc.toT.vwit[static_cast<size_t>(z)]));
        if (ki) {
          found = z;
          k = *ki;
          break;
        }
      }
      if (found < 0) throw std::logic_error("comb_by_expansion: h-image vertex not in U");
      h.vbase[static_cast<size_t>(u)] = found;
      h.vwit[static_cast<size_t>(u)] = k;
    }
    // edgelets
    for (int e = 0; e < UA.ne2(); ++e) {
      const auto& xs = A.toS.eimg[static_cast<size_t>(e)];
      const auto& ys = A.toT.eimg[static_cast<size_t>(e)];
      if (xs) {
        // uncollapsed: X part maps through f_i, stays uncollapsed
        auto x2 = map_step(fi, *xs);
        // locate the UB edgelet with X part x2: UB uncollapsed cells are free
        // on their X coordinate
        for (int e2 = 0; e2 < UB.ne2(); ++e2) {
          const auto& xs2 = Bc.toS.eimg[static_cast<size_t>(e2)];
          if (!xs2 || xs2->e != x2->e) continue;
          Word k = x2->g * xs2->g.inverse();
          // verify the Y parts agree under k
          const auto& ys2 = Bc.toT.eimg[static_cast<size_t>(e2)];
          if (ys2->e != ys->e || !(k * ys2->g == ys->g)) continue;
          h.eimg[static_cast<size_t>(e)] = TreeStep{e2, k};
          break;
        }
      } else {
        // collapsed: free on the Y coordinate
        for (int e2 = 0; e2 < UB.ne2(); ++e2) {
          const auto& xs2 = Bc.toS.eimg[static_cast<size_t>(e2)];
          const auto& ys2 = Bc.toT.eimg[static_cast<size_t>(e2)];
          if (xs2 || ys2->e != ys->e) continue;
          Word k = ys->g * ys2->g.inverse();
          // X parts: k * (collapsed cell vertex of e2) must equal the image
          int zv = UB.src(e2);
          int xv2 = Bc.toS.vbase[static_cast<size_t>(zv)];
          int xv1 = A.toS.vbase[static_cast<size_t>(UA.src(e))];
          if (fi.vbase[static_cast<size_t>(xv1)] != xv2) continue;
          Word want = A.toS.vwit[static_cast<size_t>(UA.src(e))] *
                      fi.vwit[static_cast<size_t>(xv1)];
          Word have = k * Bc.toS.vwit[static_cast<size_t>(zv)];
          if (!(seq.splittings[static_cast<size_t>(i)]->coset(xv2, want) ==
                seq.splittings[static_cast<size_t>(i)]->coset(xv2, have)))
            continue;
          h.eimg[static_cast<size_t>(e)] = TreeStep{e2, k};
          break;
        }
      }
      if (!h.eimg[static_cast<size_t>(e)])
        throw std::logic_error("comb_by_expansion: h-image edgelet not in U");
    }
    if (!validate_map(h).empty()) throw std::logic_error("comb_by_expansion: h map invalid");
    hmaps.push_back(std::move(h));
  }

  // per-column: collapse the bad subgraph, subdivide, build the multifold
  std::vector<Sp> Trow(static_cast<size_t>(K) + 1);
  std::vector<EqMap> mus(static_cast<size_t>(K) + 1);
  std::vector<EqMap> rhos(static_cast<size_t>(K) + 1);
  for (int i = 0; i <= K; ++i) {
    const PushoutColumn& col = cols[static_cast<size_t>(i)];
    const FreeSplitting& U = *col.U;
    CollapseResult rc = col.Z.empty()
                            ? CollapseResult{col.U, identity_map(col.U)}
                            : collapse(col.U, col.Z);
    const EqMap& rho = rc.map;
    Sp Ti = rc.to;
    // subdivision counts per T_i pair: first/last edgelets of good natural
    // edges absorb the incident bad stars
    std::vector<int> counts(static_cast<size_t>(Ti->npairs()), 1);
    std::map<int, int> badAt;  // U bad vertex -> index in col.badVertices
    for (size_t b = 0; b < col.badVertices.size(); ++b)
      badAt[col.badVertices[b]] = static_cast<int>(b);
    // good natural edges of U = chains disjoint from Z
    struct GoodEdge {
      std::vector<int> chain;  // U edgelets
      int u1, u2;              // endpoints in U
    };
    std::vector<GoodEdge> goods;
    for (size_t c = 0; c < U.natural_chains().size(); ++c) {
      if (static_cast<int>(c) > U.natural_rev(static_cast<int>(c))) continue;
      const auto& ch = U.natural_chains()[c];
      if (col.Z.has(ch.front())) continue;
      goods.push_back({ch, U.src(ch.front()), U.dst(ch.back())});
    }
    for (const GoodEdge& g : goods) {
      if (badAt.count(g.u1)) {
        int b = badAt[g.u1];
        int m1 = static_cast<int>(
            U.natural_chains()[static_cast<size_t>(col.badChainOf[static_cast<size_t>(b)])].size());
        int tp = rho.eimg[static_cast<size_t>(g.chain.front())]->e / 2;
        counts[static_cast<size_t>(tp)] += m1;
      }
      if (badAt.count(g.u2)) {
        int b = badAt[g.u2];
        int m2 = static_cast<int>(
            U.natural_chains()[static_cast<size_t>(col.badChainOf[static_cast<size_t>(b)])].size());
        int tp = rho.eimg[static_cast<size_t>(g.chain.back())]->e / 2;
        counts[static_cast<size_t>(tp)] += m2;
      }
    }
    Sp TiSub = Ti->subdivided(counts);
    // multifold mu: TiSub -> U
    EqMap mu;
    mu.dom = TiSub;
    mu.cod = col.U;
    mu.vbase.assign(static_cast<size_t>(TiSub->nv()), -1);
    mu.vwit.assign(static_cast<size_t>(TiSub->nv()), Word{});
    mu.eimg.assign(static_cast<size_t>(TiSub->ne2()), std::nullopt);
    // natural vertices of Ti (all original Ti vertices) map to good vertices
    std::vector<int> goodPre(static_cast<size_t>(Ti->nv()), -1);
    for (int z = 0; z < U.nv(); ++z) {
      bool isBad = badAt.count(z) > 0;
      if (isBad) continue;
      int w = rho.vbase[static_cast<size_t>(z)];
      if (goodPre[static_cast<size_t>(w)] != -1 && goodPre[static_cast<size_t>(w)] != z)
        throw std::logic_error("comb_by_expansion: two good vertices in one Z component");
      goodPre[static_cast<size_t>(w)] = z;
    }
    for (int w = 0; w < Ti->nv(); ++w) {
      int z = goodPre[static_cast<size_t>(w)];
      if (z < 0) throw std::logic_error("comb_by_expansion: Z component without good vertex");
      mu.vbase[static_cast<size_t>(w)] = z;
      mu.vwit[static_cast<size_t>(w)] = rho.vwit[static_cast<size_t>(z)].inverse();
    }
    // pair offsets in TiSub
    std::vector<int> off(static_cast<size_t>(Ti->npairs()) + 1, 0);
    for (int p = 0; p < Ti->npairs(); ++p)
      off[static_cast<size_t>(p) + 1] = off[static_cast<size_t>(p)] + counts[static_cast<size_t>(p)];
    // fill mu along each good natural edge's arc
    for (const GoodEdge& g : goods) {
      // arc in U: [zeta1 z1->u1] + chain + [reverse zeta2 u2->z2]
      TreePath arc;
      TreePath mid = chain_lift(U, g.chain);
      std::vector<TreeStep> steps;
      Word preShift;
      if (badAt.count(g.u1)) {
        const auto& zchain =
            U.natural_chains()[static_cast<size_t>(col.badChainOf[static_cast<size_t>(badAt[g.u1])])];
        TreePath zl = chain_lift(U, zchain);
        // translate so the zeta lift ends at the start of mid
        TreeVertex zEnd = U.step_end(zl.steps.back());
        // zl ends at (u1, m); mid starts at (u1, 1); bad vertices are
        // trivial-group so the connector is exact
        Word m = zl.steps.back().g * U.twist(zl.steps.back().e);
        TreePath moved = translate(U, m.inverse(), zl);
        for (auto& s : moved.steps) steps.push_back(s);
        (void)zEnd;
      }
      for (auto& s : mid.steps) steps.push_back(s);
      if (badAt.count(g.u2)) {
        const auto& zchain =
            U.natural_chains()[static_cast<size_t>(col.badChainOf[static_cast<size_t>(badAt[g.u2])])];
        TreePath zl = chain_lift(U, zchain);
        // reversed zeta: from u2 to z2; mid ends at (u2, M)
        Word M;
        for (int e : g.chain) M = M * U.twist(e);
        // reverse of zl: starts at end of zl = (u2, m2)
        Word m2 = zl.steps.back().g * U.twist(zl.steps.back().e);
        TreePath rev;
        rev.start = U.step_end(zl.steps.back());
        for (size_t s = zl.steps.size(); s-- > 0;) rev.steps.push_back(U.step_rev(zl.steps[s]));
        TreePath moved = translate(U, M * m2.inverse(), rev);
        for (auto& s : moved.steps) steps.push_back(s);
      }
      arc.start = steps.empty() ? mid.start : U.step_start(steps.front());
      arc.steps = steps;
      // align the arc with the mu-image of the TiSub natural edge lift:
      // the TiSub chain starts at the canonical lift of w1 = rho(z1-side)
      int w1 = rho.vbase[static_cast<size_t>(U.src(g.chain.front()))];
      // mu(w1 canonical) = rho.vwit[goodPre[w1]]^-1 * (goodPre[w1] canonical)
      Word align = mu.vwit[static_cast<size_t>(w1)] * steps.front().g.inverse();
      TreePath aligned = translate(U, align, arc);
      // TiSub chain of the natural edge: the rho-images of g.chain, subdivided
      std::vector<int> tchain;
      for (int e : g.chain) {
        const auto& re = *rho.eimg[static_cast<size_t>(e)];
        int p = re.e / 2;
        int k = counts[static_cast<size_t>(p)];
        for (int j = 0; j < k; ++j) {
          int sub = (re.e % 2 == 0) ? 2 * (off[static_cast<size_t>(p)] + j)
                                    : 2 * (off[static_cast<size_t>(p)] + (k - 1 - j)) + 1;
          tchain.push_back(sub);
        }
      }
      if (tchain.size() != aligned.steps.size())
        throw std::logic_error("comb_by_expansion: arc length mismatch");
      Word pre;
      for (size_t j = 0; j < tchain.size(); ++j) {
        int te = tchain[j];
        const TreeStep& img = aligned.steps[j];
        TreeStep rel{img.e, pre.inverse() * img.g};
        mu.eimg[static_cast<size_t>(te)] = rel;
        mu.eimg[static_cast<size_t>(FreeSplitting::rev(te))] = TreeStep{
            FreeSplitting::rev(rel.e),
            TiSub->twist(te).inverse() * rel.g * U.twist(rel.e)};
        pre = pre * TiSub->twist(te);
      }
      (void)preShift;
    }
    complete_vertex_images(mu);
    if (!validate_map(mu).empty()) throw std::logic_error("comb_by_expansion: multifold invalid");
    Trow[static_cast<size_t>(i)] = TiSub;
    mus[static_cast<size_t>(i)] = std::move(mu);
    rhos[static_cast<size_t>(i)] = rho;
  }

  // g maps along the T row: walk each natural edge of T_{i-1} through
  // h_i . mu_{i-1} and match against arcs of mu_i
  FoldableSequence Tseq;
  Tseq.splittings = Trow;
  for (int i = 1; i <= K; ++i) {
    const FreeSplitting& TA = *Trow[static_cast<size_t>(i - 1)];
    const FreeSplitting& TB = *Trow[static_cast<size_t>(i)];
    EqMap comp = compose(mus[static_cast<size_t>(i - 1)], hmaps[static_cast<size_t>(i - 1)]);
    const FreeSplitting& UB = *cols[static_cast<size_t>(i)].U;
    EqMap g;
    g.dom = Trow[static_cast<size_t>(i - 1)];
    g.cod = Trow[static_cast<size_t>(i)];
    g.vbase.assign(static_cast<size_t>(TA.nv()), -1);
    g.vwit.assign(static_cast<size_t>(TA.nv()), Word{});
    g.eimg.assign(static_cast<size_t>(TA.ne2()), std::nullopt);
    // natural vertices
    for (int v = 0; v < TA.nv(); ++v) {
      if (!TA.natural(v)) continue;
      int z = comp.vbase[static_cast<size_t>(v)];
      // z must be good in UB: the unique TB natural preimage
      int w = -1;
      for (int ww = 0; ww < TB.nv(); ++ww)
        if (TB.natural(ww) && mus[static_cast<size_t>(i)].vbase[static_cast<size_t>(ww)] == z) w = ww;
      if (w < 0) throw std::logic_error("comb_by_expansion: g-image vertex not good");
      g.vbase[static_cast<size_t>(v)] = w;
      g.vwit[static_cast<size_t>(v)] =
          comp.vwit[static_cast<size_t>(v)] *
          mus[static_cast<size_t>(i)].vwit[static_cast<size_t>(w)].inverse();
    }
    // natural edges: match image paths against mu_i images
    for (size_t c = 0; c < TA.natural_chains().size(); ++c) {
      const auto& ch = TA.natural_chains()[c];
      TreePath lift = chain_lift(TA, ch);
      TreePath W = map_path(comp, lift);
      if (W.steps.size() != ch.size())
        throw std::logic_error("comb_by_expansion: unexpected backtracking in g image");
      size_t pos = 0;
      Word pre;  // prefix twists along ch
      while (pos < ch.size()) {
        // match a TB natural edge whose mu-image starts with W.steps[pos]
        bool matched = false;
        for (size_t c2 = 0; c2 < TB.natural_chains().size() && !matched; ++c2) {
          const auto& ch2 = TB.natural_chains()[c2];
          // mu-image of the canonical lift of ch2
          TreePath m2 = map_path(mus[static_cast<size_t>(i)], chain_lift(TB, ch2));
          if (m2.steps.size() != ch2.size()) throw std::logic_error("multifold path degenerate");
          if (m2.steps.front().e != W.steps[pos].e) continue;
          Word k = W.steps[pos].g * m2.steps.front().g.inverse();
          // check the whole block matches
          if (pos + ch2.size() > ch.size()) continue;
          bool ok = true;
          for (size_t j = 0; j < ch2.size() && ok; ++j) {
            const TreeStep& a = W.steps[pos + j];
            const TreeStep& b = m2.steps[j];
            if (a.e != b.e || !(a.g == k * b.g)) ok = false;
          }
          if (!ok) continue;
          // emit images for the consumed TA edgelets
          Word pre2;
          for (size_t j = 0; j < ch2.size(); ++j) {
            int te = ch[pos + j];
            Word preAt = pre;
            for (size_t q = 0; q < j; ++q) preAt = preAt * TA.twist(ch[pos + q]);
            TreeStep img{ch2[j], preAt.inverse() * k * pre2};
            g.eimg[static_cast<size_t>(te)] = img;
            g.eimg[static_cast<size_t>(FreeSplitting::rev(te))] =
                TreeStep{FreeSplitting::rev(img.e),
                         TA.twist(te).inverse() * img.g * TB.twist(img.e)};
            pre2 = pre2 * TB.twist(ch2[j]);
          }
          for (size_t j = 0; j < ch2.size(); ++j) pre = pre * TA.twist(ch[pos + j]);
          pos += ch2.size();
          matched = true;
        }
        if (!matched) throw std::logic_error("comb_by_expansion: no multifold arc matches");
      }
    }
    complete_vertex_images(g);
    if (!validate_map(g).empty()) throw std::logic_error("comb_by_expansion: g map invalid");
    if (!maps_equal(compose(g, mus[static_cast<size_t>(i)]), comp))
      throw std::logic_error("comb_by_expansion: multifold square does not commute");
    (void)UB;
    Tseq.maps.push_back(std::move(g));
  }

  // rectangle: upper = T row with collapses pi_i = mu_i . toS_i
  CombingRectangle R;
  R.upper = Tseq;
  R.lower = seq;
  for (int i = 0; i <= K; ++i) {
    EqMap pi = compose(mus[static_cast<size_t>(i)], cols[static_cast<size_t>(i)].toS);
    auto c = is_collapse(pi);
    if (!c) throw std::logic_error("comb_by_expansion: column projection not a collapse");
    R.sigma.push_back(*c);
    R.collapses.push_back(std::move(pi));
  }
  out.rect = std::move(R);
  out.columns = std::move(cols);
  out.multifolds = std::move(mus);
  // T_K is conjugate to T'
  auto conj = are_conjugate(Trow[static_cast<size_t>(K)], piPrime.dom);
  if (!conj) throw std::logic_error("comb_by_expansion: last column not conjugate to T'");
  out.lastConj = std::move(*conj);
  return out;
}

}  // namespace fsplit
