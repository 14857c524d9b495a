#include "fsplit/units.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>

namespace fsplit {

BlueRed pullback_decomposition(const FoldableSequence& seq, const InvariantSubgraph& blueK) {
  if (blueK.empty() || blueK.full()) throw std::invalid_argument("NOT-A-DECOMPOSITION");
  BlueRed br;
  int K = seq.length();
  br.blue.assign(static_cast<size_t>(K) + 1, InvariantSubgraph{});
  br.blue[static_cast<size_t>(K)] = blueK;
  for (int i = K; i-- > 0;)
    br.blue[static_cast<size_t>(i)] =
        preimage(seq.maps[static_cast<size_t>(i)], br.blue[static_cast<size_t>(i + 1)]);
  return br;
}

namespace {

bool subgraph_natural(const FreeSplitting& S, const InvariantSubgraph& beta) {
  for (size_t c = 0; c < S.natural_chains().size(); ++c) {
    const auto& ch = S.natural_chains()[c];
    int in = 0;
    for (int e : ch) in += beta.has(e) ? 1 : 0;
    if (in != 0 && in != static_cast<int>(ch.size())) return false;
  }
  return true;
}

}  // namespace

bool decomposition_natural(const FoldableSequence& seq, const BlueRed& br) {
  for (int i = 0; i <= seq.length(); ++i)
    if (!subgraph_natural(*seq.splittings[static_cast<size_t>(i)], br.blue[static_cast<size_t>(i)]))
      return false;
  return true;
}

ComplexityReport complexity(const FreeSplitting& S, const InvariantSubgraph& beta) {
  if (beta.empty() || beta.full()) throw std::invalid_argument("IMPROPER");
  // components of the beta-subgraph (vertices incident to beta edgelets)
  std::vector<int> comp(static_cast<size_t>(S.nv()), -1);
  int ncomp = 0;
  for (int v0 = 0; v0 < S.nv(); ++v0) {
    bool touches = false;
    for (int e : S.halfedges(v0)) touches = touches || beta.has(e);
    if (!touches || comp[static_cast<size_t>(v0)] != -1) continue;
    comp[static_cast<size_t>(v0)] = ncomp;
    std::queue<int> q;
    q.push(v0);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e : S.halfedges(v))
        if (beta.has(e) && comp[static_cast<size_t>(S.dst(e))] == -1) {
          comp[static_cast<size_t>(S.dst(e))] = ncomp;
          q.push(S.dst(e));
        }
    }
    ++ncomp;
  }
  ComplexityReport r;
  r.c1 = ncomp;
  for (int c = 0; c < ncomp; ++c) {
    int ranks = 0, verts = 0, pairs = 0;
    for (int v = 0; v < S.nv(); ++v)
      if (comp[static_cast<size_t>(v)] == c) {
        ranks += S.group(v).rank();
        ++verts;
      }
    for (int e = 0; e < S.ne2(); e += 2)
      if (beta.has(e) && comp[static_cast<size_t>(S.src(e))] == c) ++pairs;
    r.c2 += ranks + (pairs - verts + 1);
  }
  r.c = r.c1 + (S.rank() - r.c2);
  return r;
}

ComplexityRun complexity_along(const FoldableSequence& seq, const BlueRed& br) {
  if (!decomposition_natural(seq, br)) throw std::invalid_argument("NOT-NATURAL");
  ComplexityRun run;
  for (int i = 0; i <= seq.length(); ++i)
    run.perColumn.push_back(
        complexity(*seq.splittings[static_cast<size_t>(i)], br.blue[static_cast<size_t>(i)]));
  run.nonincreasing = true;
  for (size_t i = 0; i + 1 < run.perColumn.size(); ++i)
    if (run.perColumn[i].c < run.perColumn[i + 1].c) run.nonincreasing = false;
  run.constancyIntervals = run.perColumn.empty() ? 0 : 1;
  for (size_t i = 0; i + 1 < run.perColumn.size(); ++i)
    if (run.perColumn[i].c != run.perColumn[i + 1].c) ++run.constancyIntervals;
  return run;
}

std::vector<std::string> validate_fspath(const FsPath& p) {
  std::vector<std::string> bad;
  if (p.vertices.size() != p.edges.size() + 1) {
    bad.push_back("SHAPE");
    return bad;
  }
  for (size_t k = 0; k < p.edges.size(); ++k) {
    const FsEdge& e = p.edges[k];
    if (!validate_map(e.wit).empty() || !is_collapse(e.wit)) {
      bad.push_back("WITNESS: edge " + std::to_string(k));
      continue;
    }
    Sp leftRep = e.domIsLeft ? e.wit.dom : e.wit.cod;
    Sp rightRep = e.domIsLeft ? e.wit.cod : e.wit.dom;
    if (!conjugate(leftRep, p.vertices[k])) bad.push_back("LEFT: edge " + std::to_string(k));
    if (!conjugate(rightRep, p.vertices[k + 1])) bad.push_back("RIGHT: edge " + std::to_string(k));
  }
  return bad;
}

// ---------- constant complexity path ----------

namespace {

// blue-priority fold factorization of the composite map of seq[a..b]
struct BluePriorityResult {
  std::vector<Sp> splittings;  // U_0 .. U_Q
  std::vector<EqMap> folds;
  std::vector<InvariantSubgraph> blue;  // per splitting
  int P = 0;                            // folds 1..P are blue
};

std::optional<Turn> find_colored_turn(const EqMap& f, const InvariantSubgraph& blueDom,
                                      bool wantBlue) {
  const FreeSplitting& S = *f.dom;
  for (int v = 0; v < S.nv(); ++v) {
    const auto& out = S.halfedges(v);
    for (size_t i = 0; i < out.size(); ++i)
      for (size_t j = i + 1; j < out.size(); ++j) {
        const auto& a = f.eimg[static_cast<size_t>(out[i])];
        const auto& b = f.eimg[static_cast<size_t>(out[j])];
        if (!a || !b || a->e != b->e) continue;
        bool blue = blueDom.has(out[i]) && blueDom.has(out[j]);
        if (blue != wantBlue) continue;
        Word w = a->g * b->g.inverse();
        if (S.group(v).member(w))
          return Turn{v, TreeStep{out[i], Word{}}, TreeStep{out[j], w}};
      }
  }
  return std::nullopt;
}

BluePriorityResult blue_priority_factorize(const EqMap& f0, const InvariantSubgraph& blueCod) {
  BluePriorityResult out;
  out.splittings.push_back(f0.dom);
  EqMap cur = f0;
  bool bluePhase = true;
  while (true) {
    out.blue.push_back(preimage(cur, blueCod));
    std::optional<Turn> turn;
    if (bluePhase) {
      turn = find_colored_turn(cur, out.blue.back(), true);
      if (!turn) {
        bluePhase = false;
        out.P = static_cast<int>(out.folds.size());
      }
    }
    if (!bluePhase) turn = find_illegal_turn(cur);
    if (!turn) break;
    FoldFactor ff = maximal_fold_factor(cur, *turn);
    out.splittings.push_back(ff.fold.to);
    out.folds.push_back(ff.fold.map);
    cur = ff.rest;
  }
  if (!locally_injective(cur))
    throw std::logic_error("blue_priority_factorize: terminal not a conjugacy");
  // absorb the terminal conjugacy
  if (!out.folds.empty()) {
    out.folds.back() = compose(out.folds.back(), cur);
    out.splittings.back() = f0.cod;
    out.blue.pop_back();
    out.blue.push_back(preimage(identity_map(f0.cod), blueCod));
  } else {
    out.splittings.back() = f0.dom;
  }
  return out;
}

FsEdge collapse_edge(const EqMap& wit, bool domIsLeft) { return FsEdge{wit, domIsLeft}; }

}  // namespace

FsPath constant_complexity_path(const FoldableSequence& seq, const BlueRed& br, int a, int b) {
  if (a == b) {
    FsPath p;
    p.vertices.push_back(seq.splittings[static_cast<size_t>(a)]);
    return p;
  }
  {
    auto run = complexity_along(seq.sub(a, b),
                                BlueRed{std::vector<InvariantSubgraph>(
                                    br.blue.begin() + a, br.blue.begin() + b + 1)});
    for (auto& r : run.perColumn)
      if (r.c != run.perColumn.front().c) throw std::invalid_argument("NOT-CONSTANT");
  }
  EqMap g = seq.composite(a, b);
  auto bp = blue_priority_factorize(g, br.blue[static_cast<size_t>(b)]);
  int P = bp.P, Q = static_cast<int>(bp.folds.size());
  // X_p = collapse blue; Y_q = collapse red
  auto Xat = [&](int p) { return collapse(bp.splittings[static_cast<size_t>(p)], bp.blue[static_cast<size_t>(p)]); };
  auto Yat = [&](int q) {
    auto red = InvariantSubgraph::all(bp.splittings[static_cast<size_t>(q)]->npairs())
                   .minus(bp.blue[static_cast<size_t>(q)]);
    return collapse(bp.splittings[static_cast<size_t>(q)], red);
  };
  // verify the constancy of the X and Y classes (the construction's content)
  for (int p = 1; p <= P; ++p)
    if (!conjugate(Xat(p - 1).to, Xat(p).to))
      throw std::logic_error("constant_complexity_path: X class changed under a blue fold");
  for (int q = P + 1; q <= Q; ++q)
    if (!conjugate(Yat(q - 1).to, Yat(q).to))
      throw std::logic_error("constant_complexity_path: Y class changed under a red fold");

  // [T_a] down to [X], up to [U_P], down to [Y], up to [T_b]
  FsPath path;
  path.vertices.push_back(seq.splittings[static_cast<size_t>(a)]);
  auto X0 = Xat(0);
  path.vertices.push_back(X0.to);
  path.edges.push_back(collapse_edge(X0.map, true));
  auto XP = Xat(P);
  path.vertices.push_back(bp.splittings[static_cast<size_t>(P)]);
  path.edges.push_back(collapse_edge(XP.map, false));
  auto YP = Yat(P);
  path.vertices.push_back(YP.to);
  path.edges.push_back(collapse_edge(YP.map, true));
  auto YQ = Yat(Q);
  path.vertices.push_back(seq.splittings[static_cast<size_t>(b)]);
  path.edges.push_back(collapse_edge(YQ.map, false));
  if (path.length() > 4) throw std::logic_error("constant_complexity_path: length exceeds 4");
  return path;
}

// ---------- almost invariant edges ----------

namespace {

// number of preimage components over a fixed natural edge: collect, for each
// domain edgelet orbit mapping into the chain support, the unique tree
// edgelet over the fixed natural-edge lift, then merge by shared endpoints
int preimage_component_count(const EqMap& f, int chain, std::vector<int>* chainOut) {
  const FreeSplitting& D = *f.dom;
  const FreeSplitting& C = *f.cod;
  const auto& ch = C.natural_chains()[static_cast<size_t>(chain)];
  // locator of each constituent edgelet in the canonical chain lift
  std::map<int, Word> pos;  // oriented edgelet -> prefix
  {
    Word pre;
    for (int e : ch) {
      pos[e] = pre;
      pre = pre * C.twist(e);
    }
  }
  std::vector<TreeStep> lifts;  // domain tree edgelets over the fixed edge
  std::vector<int> orbit;
  for (int p = 0; p < D.npairs(); ++p) {
    const auto& img = f.eimg[static_cast<size_t>(2 * p)];
    if (!img) continue;
    int e = img->e;
    Word w;
    if (pos.count(e))
      w = pos[e] * img->g.inverse();
    else if (pos.count(FreeSplitting::rev(e)))
      w = pos[FreeSplitting::rev(e)] * C.twist(FreeSplitting::rev(e)).inverse() * img->g.inverse();
    else
      continue;
    lifts.push_back(TreeStep{2 * p, w});
    orbit.push_back(2 * p);
  }
  if (lifts.empty()) return 0;
  // interior tree vertices of the fixed natural edge (between its edgelets)
  std::vector<TreeVertex> interior;
  {
    Word pre;
    for (size_t l = 0; l + 1 < ch.size(); ++l) {
      interior.push_back(C.step_end(TreeStep{ch[l], pre}));
      pre = pre * C.twist(ch[l]);
    }
  }
  auto maps_interior = [&](const TreeVertex& x) {
    TreeVertex img = map_vertex(f, x);
    for (const TreeVertex& iv : interior)
      if (img == iv) return true;
    return false;
  };
  // merge only through vertices mapping into the interior of the edge
  std::vector<int> uf(lifts.size());
  for (size_t i = 0; i < uf.size(); ++i) uf[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (uf[static_cast<size_t>(x)] != x) x = uf[static_cast<size_t>(x)];
    return x;
  };
  auto ends = [&](const TreeStep& s) {
    return std::pair{D.step_start(s), D.step_end(s)};
  };
  for (size_t i = 0; i < lifts.size(); ++i)
    for (size_t j = i + 1; j < lifts.size(); ++j) {
      auto [a1, b1] = ends(lifts[i]);
      auto [a2, b2] = ends(lifts[j]);
      for (const TreeVertex& shared : {a1, b1})
        if ((shared == a2 || shared == b2) && maps_interior(shared))
          uf[static_cast<size_t>(find(static_cast<int>(j)))] = find(static_cast<int>(i));
    }
  std::set<int> roots;
  for (size_t i = 0; i < lifts.size(); ++i) roots.insert(find(static_cast<int>(i)));
  if (chainOut && roots.size() == 1) *chainOut = orbit;
  return static_cast<int>(roots.size());
}

}  // namespace

std::optional<AlmostInvariantEdgeCert> almost_invariant_edge(const FoldableSequence& seq) {
  int K = seq.length();
  const FreeSplitting& TK = *seq.splittings[static_cast<size_t>(K)];
  EqMap whole = seq.composite(0, K);
  for (size_t c = 0; c < TK.natural_chains().size(); ++c) {
    if (static_cast<int>(c) > TK.natural_rev(static_cast<int>(c))) continue;
    int m0 = preimage_component_count(whole, static_cast<int>(c), nullptr);
    if (m0 != 1) continue;
    auto support = TK.chain_support(static_cast<int>(c));
    // certificate: for each column, the chain containing the unique preimage
    AlmostInvariantEdgeCert cert;
    bool ok = true;
    for (int k = 0; k <= K && ok; ++k) {
      EqMap toEnd = seq.composite(k, K);
      const FreeSplitting& Tk = *seq.splittings[static_cast<size_t>(k)];
      std::vector<int> orbits;
      if (preimage_component_count(toEnd, static_cast<int>(c), &orbits) != 1 || orbits.empty()) {
        ok = false;
        break;
      }
      int chain = Tk.chain_of(orbits.front());
      cert.chains.push_back(chain);
      auto sigma = InvariantSubgraph::all(Tk.npairs()).minus(Tk.chain_support(chain));
      auto col = collapse(seq.splittings[static_cast<size_t>(k)], sigma);
      cert.witnesses.push_back(col.map);
      if (k == 0) cert.R = col.to;
      auto conj = are_conjugate(col.to, cert.R);
      if (!conj) throw std::logic_error("almost_invariant_edge: columns disagree");
      cert.conjugates.push_back(std::move(*conj));
    }
    if (ok) return cert;
    (void)support;
  }
  return std::nullopt;
}

// ---------- unit certificates ----------

std::vector<std::string> validate_unit_certificate(const FoldSequence& seq,
                                                   const UnitCertificate& cert) {
  std::vector<std::string> bad;
  auto lb = validate_rectangle(cert.lower);
  for (auto& b : lb) bad.push_back("LOWER " + b);
  auto ub = validate_rectangle(cert.upper);
  for (auto& b : ub) bad.push_back("UPPER " + b);
  // the lower rectangle's upper row must be the fold sequence columns i..j
  for (int k = cert.i; k <= cert.j; ++k) {
    if (cert.lower.upper.splittings[static_cast<size_t>(k - cert.i)].get() !=
        seq.splittings[static_cast<size_t>(k)].get())
      bad.push_back("ROW: lower rectangle not anchored at column " + std::to_string(k));
  }
  // shared middle row
  for (int k = 0; k <= cert.j - cert.i; ++k) {
    const auto& a = cert.lower.lower.splittings[static_cast<size_t>(k)];
    const auto& b = cert.upper.lower.splittings[static_cast<size_t>(k)];
    if (a.get() != b.get() && a->canonical_string() != b->canonical_string())
      bad.push_back("MIDDLE: column " + std::to_string(k));
  }
  if (!cert.br && !cert.aie) {
    if (cert.i != cert.j) bad.push_back("DISJUNCTION: no witness");
    return bad;
  }
  if (cert.aie) {
    // re-verify the almost invariant edge on the top row
    auto again = almost_invariant_edge(cert.upper.upper);
    if (!again) bad.push_back("AIE: not reproducible");
  }
  if (cert.br) {
    try {
      auto run = complexity_along(cert.upper.upper, *cert.br);
      for (auto& r : run.perColumn)
        if (r.c != run.perColumn.front().c) bad.push_back("BR: complexity not constant");
    } catch (const std::exception& e) {
      bad.push_back(std::string("BR: ") + e.what());
    }
  }
  return bad;
}

namespace {

// one-edge expansions of a splitting at its nontrivial vertex groups
struct Expansion {
  Sp T;
  EqMap toS;  // collapse T -> S
};

std::vector<Expansion> one_edge_expansions(Sp S) {
  std::vector<Expansion> out;
  for (int v = 0; v < S->nv(); ++v) {
    auto basis = S->group(v).free_basis();
    int k = static_cast<int>(basis.size());
    if (k == 0) continue;
    // loop type: move one basis element onto a new loop
    for (int drop = 0; drop < k; ++drop) {
      std::vector<SubgroupAutomaton> groups;
      for (int u = 0; u < S->nv(); ++u) {
        if (u != v) {
          groups.push_back(S->group(u));
          continue;
        }
        std::vector<Word> gens;
        for (int g = 0; g < k; ++g)
          if (g != drop) gens.push_back(basis[static_cast<size_t>(g)]);
        groups.push_back(SubgroupAutomaton::from_generators(S->rank(), gens));
      }
      std::vector<FreeSplitting::Edgelet> pairs;
      for (int e = 0; e < S->ne2(); e += 2) pairs.push_back({S->src(e), S->dst(e), S->twist(e)});
      pairs.push_back({v, v, basis[static_cast<size_t>(drop)]});
      Sp T = FreeSplitting::make(S->rank(), groups, pairs);
      if (!T->validate().empty()) continue;
      auto sigma = InvariantSubgraph::none(T->npairs());
      sigma.pairs[static_cast<size_t>(T->npairs() - 1)] = 1;
      auto c = collapse(T, sigma);
      if (c.to->canonical_string() != S->canonical_string()) continue;
      EqMap m = c.map;
      m.cod = S;
      out.push_back({T, std::move(m)});
    }
    // edge type: split the basis between v and a new vertex
    for (int cut = 0; cut <= k; ++cut) {
      std::vector<SubgroupAutomaton> groups;
      std::vector<Word> g1, g2;
      for (int g = 0; g < k; ++g)
        (g < cut ? g1 : g2).push_back(basis[static_cast<size_t>(g)]);
      if (g2.empty()) continue;  // new vertex must take something
      for (int u = 0; u < S->nv(); ++u)
        groups.push_back(u == v ? SubgroupAutomaton::from_generators(S->rank(), g1)
                                : S->group(u));
      groups.push_back(SubgroupAutomaton::from_generators(S->rank(), g2));
      std::vector<FreeSplitting::Edgelet> pairs;
      for (int e = 0; e < S->ne2(); e += 2) pairs.push_back({S->src(e), S->dst(e), S->twist(e)});
      pairs.push_back({v, S->nv(), Word{}});
      Sp T = FreeSplitting::make(S->rank(), groups, pairs);
      if (!T->validate().empty()) continue;
      auto sigma = InvariantSubgraph::none(T->npairs());
      sigma.pairs[static_cast<size_t>(T->npairs() - 1)] = 1;
      auto c = collapse(T, sigma);
      if (c.to->canonical_string() != S->canonical_string()) continue;
      EqMap m = c.map;
      m.cod = S;
      out.push_back({T, std::move(m)});
    }
  }
  return out;
}

// enumerate proper natural invariant subgraphs (subsets of natural orbits)
std::vector<InvariantSubgraph> natural_subgraphs(const FreeSplitting& S, bool includeEmpty) {
  std::vector<int> orbits;
  for (size_t c = 0; c < S.natural_chains().size(); ++c)
    if (static_cast<int>(c) <= S.natural_rev(static_cast<int>(c)))
      orbits.push_back(static_cast<int>(c));
  std::vector<InvariantSubgraph> out;
  int n = static_cast<int>(orbits.size());
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (!includeEmpty && mask == 0) continue;
    if (mask == (1 << n) - 1) continue;  // improper
    auto s = InvariantSubgraph::none(S.npairs());
    for (int b = 0; b < n; ++b)
      if (mask & (1 << b)) s = s.united(S.chain_support(orbits[static_cast<size_t>(b)]));
    out.push_back(s);
  }
  return out;
}

// try the Def-5.6 disjunction on a top row
bool top_row_witness(const FoldableSequence& top, UnitCertificate& cert) {
  if (auto aie = almost_invariant_edge(top)) {
    cert.aie = std::move(aie);
    return true;
  }
  const FreeSplitting& TJ = *top.splittings.back();
  for (const auto& beta : natural_subgraphs(TJ, false)) {
    BlueRed br;
    try {
      br = pullback_decomposition(top, beta);
    } catch (const std::exception&) {
      continue;
    }
    if (!decomposition_natural(top, br)) continue;
    try {
      auto run = complexity_along(top, br);
      bool constant = true;
      for (auto& r : run.perColumn)
        if (r.c != run.perColumn.front().c) constant = false;
      if (constant) {
        cert.br = std::move(br);
        return true;
      }
    } catch (const std::exception&) {
    }
  }
  return false;
}

}  // namespace

std::optional<UnitCertificate> units_lt_one(const FoldSequence& seq, int i, int j) {
  FoldableSequence sub = as_foldable(seq).sub(i, j);
  // lower collapses range over natural invariant subgraphs of S_j
  for (const auto& sigma : natural_subgraphs(*seq.splittings[static_cast<size_t>(j)], true)) {
    CombingRectangle lower;
    try {
      lower = comb_by_collapse(sub, sigma);
    } catch (const std::exception&) {
      continue;
    }
    FoldableSequence mid = lower.lower;
    // upper candidates: trivial, and one-edge blowups (depth <= 2)
    std::vector<std::pair<CombingRectangle, bool>> uppers;
    uppers.push_back({improper_rectangle(mid), true});
    std::vector<Expansion> exps = one_edge_expansions(mid.splittings.back());
    std::vector<Expansion> depth2;
    for (const auto& e1 : exps) {
      auto more = one_edge_expansions(e1.T);
      for (auto& e2 : more) {
        EqMap comp = compose(e2.toS, e1.toS);
        depth2.push_back({e2.T, std::move(comp)});
        if (depth2.size() >= 16) break;
      }
      if (depth2.size() >= 16) break;
    }
    for (auto& e : depth2) exps.push_back(std::move(e));
    for (const auto& exp : exps) {
      try {
        auto res = comb_by_expansion(mid, exp.toS);
        uppers.push_back({res.rect, false});
      } catch (const std::exception&) {
      }
    }
    for (auto& [upper, trivialUpper] : uppers) {
      UnitCertificate cert;
      cert.i = i;
      cert.j = j;
      cert.lower = lower;
      cert.upper = upper;
      if (top_row_witness(upper.upper, cert)) {
        auto bad = validate_unit_certificate(seq, cert);
        if (bad.empty()) return cert;
      }
    }
  }
  return std::nullopt;
}

bool UnitOracle::lt_one(int i, int j) {
  if (i > j) std::swap(i, j);
  if (i == j) return true;
  auto key = std::make_pair(i, j);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  // stability closure: a certificate on a superrange restricts
  for (auto& [k, cert] : certs_) {
    if (k.first <= i && j <= k.second) {
      memo_[key] = true;
      return true;
    }
  }
  auto cert = units_lt_one(seq_, i, j);
  memo_[key] = cert.has_value();
  if (cert) certs_[key] = std::move(*cert);
  return memo_[key];
}

UnitCertificate UnitOracle::certificate(int i, int j) {
  if (i == j) {
    // trivial certificate
    FoldableSequence sub = as_foldable(seq_).sub(i, i);
    UnitCertificate cert;
    cert.i = cert.j = i;
    cert.lower = improper_rectangle(sub);
    cert.upper = improper_rectangle(sub);
    cert.aie = almost_invariant_edge(sub);
    return cert;
  }
  auto it = certs_.find({i, j});
  if (it != certs_.end()) return it->second;
  // truncate a covering certificate
  for (auto& [k, cert] : certs_) {
    if (k.first <= i && j <= k.second) {
      UnitCertificate t;
      t.i = i;
      t.j = j;
      t.lower = cert.lower.sub(i - k.first, j - k.first);
      t.upper = cert.upper.sub(i - k.first, j - k.first);
      if (cert.br)
        t.br = BlueRed{std::vector<InvariantSubgraph>(
            cert.br->blue.begin() + (i - k.first), cert.br->blue.begin() + (j - k.first) + 1)};
      if (cert.aie) t.aie = almost_invariant_edge(t.upper.upper);
      if (validate_unit_certificate(seq_, t).empty()) return t;
    }
  }
  if (!lt_one(i, j)) throw std::runtime_error("MISSING-CERTIFICATE");
  auto it2 = certs_.find({i, j});
  if (it2 != certs_.end()) return it2->second;
  throw std::runtime_error("MISSING-CERTIFICATE");
}

UnitCount UnitOracle::count(int I, int J) {
  UnitCount uc;
  // front greedy
  uc.frontGreedy.push_back(I);
  int cur = I;
  while (true) {
    int next = -1;
    for (int l = cur + 1; l <= J; ++l)
      if (!lt_one(cur, l)) {
        next = l;
        break;
      }
    if (next < 0) break;
    uc.frontGreedy.push_back(next);
    cur = next;
  }
  uc.upsilon = static_cast<int>(uc.frontGreedy.size()) - 1;
  // back greedy
  uc.backGreedy.push_back(J);
  cur = J;
  while (true) {
    int next = -1;
    for (int l = cur - 1; l >= I; --l)
      if (!lt_one(l, cur)) {
        next = l;
        break;
      }
    if (next < 0) break;
    uc.backGreedy.push_back(next);
    cur = next;
  }
  std::reverse(uc.backGreedy.begin(), uc.backGreedy.end());
  return uc;
}

// ---------- paths ----------

namespace {

void append_edge(FsPath& path, Sp nextVertex, const EqMap& wit, bool domIsLeft) {
  // skip improper edges (conjugate endpoints contribute nothing)
  auto c = is_collapse(wit);
  if (c && c->empty()) {
    path.vertices.back() = nextVertex;
    return;
  }
  path.vertices.push_back(nextVertex);
  path.edges.push_back(FsEdge{wit, domIsLeft});
}

void append_path(FsPath& path, const FsPath& tail) {
  for (size_t k = 0; k < tail.edges.size(); ++k) {
    path.vertices.push_back(tail.vertices[k + 1]);
    path.edges.push_back(tail.edges[k]);
  }
  if (tail.edges.empty() && !tail.vertices.empty()) path.vertices.back() = tail.vertices.back();
}

}  // namespace

FsPath lt1_path(const FoldSequence& seq, const UnitCertificate& cert) {
  FsPath path;
  path.vertices.push_back(seq.splittings[static_cast<size_t>(cert.i)]);
  if (cert.i == cert.j) return path;
  int cols = cert.j - cert.i;
  // S_i down to S'_i, up to T_i
  append_edge(path, cert.lower.lower.splittings.front(), cert.lower.collapses.front(), true);
  append_edge(path, cert.upper.upper.splittings.front(), cert.upper.collapses.front(), false);
  // across the top row
  if (cert.aie) {
    append_edge(path, cert.aie->R, cert.aie->witnesses.front(), true);
    append_edge(path, cert.upper.upper.splittings.back(), cert.aie->witnesses.back(), false);
  } else if (cert.br) {
    FsPath cross = constant_complexity_path(cert.upper.upper, *cert.br, 0, cols);
    append_path(path, cross);
  }
  // T_j down to S'_j, up to S_j
  append_edge(path, cert.upper.lower.splittings.back(), cert.upper.collapses.back(), true);
  append_edge(path, seq.splittings[static_cast<size_t>(cert.j)], cert.lower.collapses.back(),
              false);
  if (path.length() > 8) throw std::logic_error("lt1_path: length exceeds 8");
  return path;
}

FsPath lipschitz_path(UnitOracle& oracle, int I, int J) {
  const FoldSequence& seq = oracle.seq();
  UnitCount uc = oracle.count(I, J);
  FsPath path;
  path.vertices.push_back(seq.splittings[static_cast<size_t>(I)]);
  int cur = I;
  for (size_t u = 1; u < uc.frontGreedy.size(); ++u) {
    int next = uc.frontGreedy[u];
    // cur .. next-1 differ by < 1 unit
    FsPath seg = lt1_path(seq, oracle.certificate(cur, next - 1));
    append_path(path, seg);
    // fold interpolation next-1 -> next
    auto itp = interpolate_fold(seq.splittings[static_cast<size_t>(next - 1)],
                                seq.specs[static_cast<size_t>(next - 1)]);
    if (itp.length >= 1) {
      append_edge(path, itp.mid, *itp.up, false);
      append_edge(path, seq.splittings[static_cast<size_t>(next)], *itp.down, true);
    } else {
      path.vertices.back() = seq.splittings[static_cast<size_t>(next)];
    }
    cur = next;
  }
  FsPath seg = lt1_path(seq, oracle.certificate(cur, J));
  append_path(path, seg);
  return path;
}

}  // namespace fsplit
