#include "fsplit/conjugacy.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace fsplit {

namespace {

// search bound for vertex-group-coset ambiguities in witness construction
constexpr int kBallLen = 6;

struct GraphIso {
  std::vector<int> vmap;  // S vertex -> T vertex
  std::vector<int> emap;  // S oriented edgelet -> T oriented edgelet
};

// enumerate quotient-graph isomorphisms respecting vertex group ranks
void enumerate_isos(const FreeSplitting& S, const FreeSplitting& T,
                    const std::function<bool(const GraphIso&)>& cb) {
  if (S.nv() != T.nv() || S.npairs() != T.npairs()) return;
  int V = S.nv(), E2 = S.ne2();
  std::vector<int> vmap(static_cast<size_t>(V), -1), vused(static_cast<size_t>(T.nv()), 0);
  std::vector<int> emap(static_cast<size_t>(E2), -1), eused(static_cast<size_t>(S.npairs()), 0);
  bool stop = false;

  std::function<void(int)> edgeStep;
  std::function<void(int)> vertStep = [&](int v) {
    if (stop) return;
    if (v == V) {
      edgeStep(0);
      return;
    }
    for (int w = 0; w < T.nv() && !stop; ++w) {
      if (vused[static_cast<size_t>(w)]) continue;
      if (S.group(v).rank() != T.group(w).rank()) continue;
      if (S.halfedges(v).size() != T.halfedges(w).size()) continue;
      vmap[static_cast<size_t>(v)] = w;
      vused[static_cast<size_t>(w)] = 1;
      vertStep(v + 1);
      vused[static_cast<size_t>(w)] = 0;
      vmap[static_cast<size_t>(v)] = -1;
    }
  };
  edgeStep = [&](int p) {
    if (stop) return;
    if (p == S.npairs()) {
      GraphIso iso{vmap, emap};
      if (cb(iso)) stop = true;
      return;
    }
    int e = 2 * p;
    for (int e2 = 0; e2 < E2 && !stop; ++e2) {
      if (eused[static_cast<size_t>(e2 / 2)]) continue;
      if (T.src(e2) != vmap[static_cast<size_t>(S.src(e))]) continue;
      if (T.dst(e2) != vmap[static_cast<size_t>(S.dst(e))]) continue;
      emap[static_cast<size_t>(e)] = e2;
      emap[static_cast<size_t>(e + 1)] = FreeSplitting::rev(e2);
      eused[static_cast<size_t>(e2 / 2)] = 1;
      edgeStep(p + 1);
      eused[static_cast<size_t>(e2 / 2)] = 0;
    }
  };
  vertStep(0);
}

// assemble and verify a witness from a full assignment of vertex locators
std::optional<EqMap> build_witness(Sp S, Sp T, const GraphIso& iso,
                                   const std::vector<Word>& cv) {
  EqMap h;
  h.dom = S;
  h.cod = T;
  h.vbase = iso.vmap;
  h.vwit = cv;
  h.eimg.assign(static_cast<size_t>(S->ne2()), std::nullopt);
  for (int e = 0; e < S->ne2(); e += 2) {
    int e2 = iso.emap[static_cast<size_t>(e)];
    int v = S->src(e), w = S->dst(e);
    Word g;
    if (T->group(T->src(e2)).trivial() && T->group(T->dst(e2)).trivial()) {
      g = cv[static_cast<size_t>(v)];
    } else {
      // g in cv*A'_src and g*twist_T(e2)*A'_dst = twist_S(e)*c_dst*A'_dst
      auto gi = SubgroupAutomaton::coset_intersection(
          cv[static_cast<size_t>(v)], T->group(T->src(e2)),
          S->twist(e) * cv[static_cast<size_t>(w)] * T->twist(e2).inverse(),
          T->group(T->dst(e2)).conjugated(T->twist(e2)));
      if (!gi) return std::nullopt;
      g = *gi;
    }
    h.eimg[static_cast<size_t>(e)] = TreeStep{e2, g};
    h.eimg[static_cast<size_t>(e + 1)] =
        TreeStep{FreeSplitting::rev(e2), S->twist(e).inverse() * g * T->twist(e2)};
  }
  if (!validate_map(h).empty()) return std::nullopt;
  if (!is_conjugacy(h)) return std::nullopt;
  for (int v = 0; v < S->nv(); ++v) {
    const auto conj =
        T->group(iso.vmap[static_cast<size_t>(v)]).conjugated(cv[static_cast<size_t>(v)]);
    if (!conj.equals(S->group(v))) return std::nullopt;
  }
  return h;
}

// spanning-tree depth order of the vertices of S
std::vector<int> tree_order(const FreeSplitting& S) {
  std::vector<int> depth(static_cast<size_t>(S.nv()), 0);
  for (int v = 0; v < S.nv(); ++v) {
    int d = 0, cur = v;
    while (S.spanning_parent()[static_cast<size_t>(cur)] != -1) {
      cur = S.src(S.spanning_parent()[static_cast<size_t>(cur)]);
      ++d;
    }
    depth[static_cast<size_t>(v)] = d;
  }
  std::vector<int> order(static_cast<size_t>(S.nv()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return depth[static_cast<size_t>(a)] < depth[static_cast<size_t>(b)]; });
  return order;
}

// fully properly-discontinuous case: marking bases differ by a conjugation
std::optional<EqMap> conjugate_pd(Sp S, Sp T) {
  std::optional<EqMap> found;
  enumerate_isos(*S, *T, [&](const GraphIso& iso) {
    std::vector<Word> mprime(static_cast<size_t>(T->nv()));
    for (int v : tree_order(*S)) {
      int pe = S->spanning_parent()[static_cast<size_t>(v)];
      if (pe == -1) continue;
      int pv = S->src(pe);
      int w = iso.vmap[static_cast<size_t>(v)], pw = iso.vmap[static_cast<size_t>(pv)];
      mprime[static_cast<size_t>(w)] =
          mprime[static_cast<size_t>(pw)] * T->twist(iso.emap[static_cast<size_t>(pe)]);
    }
    std::vector<Word> lam, lamP;
    std::set<int> treePairs;
    for (int v = 0; v < S->nv(); ++v)
      if (S->spanning_parent()[static_cast<size_t>(v)] != -1)
        treePairs.insert(S->spanning_parent()[static_cast<size_t>(v)] / 2);
    for (int e = 0; e < S->ne2(); e += 2) {
      if (treePairs.count(e / 2)) continue;
      lam.push_back(S->mu(S->src(e)) * S->twist(e) * S->mu(S->dst(e)).inverse());
      int e2 = iso.emap[static_cast<size_t>(e)];
      lamP.push_back(mprime[static_cast<size_t>(T->src(e2))] * T->twist(e2) *
                     mprime[static_cast<size_t>(T->dst(e2))].inverse());
    }
    auto c = common_conjugator(lamP, lam);
    if (!c) return false;
    std::vector<Word> cv;
    for (int v = 0; v < S->nv(); ++v)
      cv.push_back(S->mu(v).inverse() * *c *
                   mprime[static_cast<size_t>(iso.vmap[static_cast<size_t>(v)])]);
    auto h = build_witness(S, T, iso, cv);
    if (h) {
      found = h;
      return true;
    }
    return false;
  });
  return found;
}

// general case: anchor at a nontrivial-group vertex and search the bounded
// coset ambiguities along the spanning tree
std::optional<EqMap> conjugate_general(Sp S, Sp T) {
  std::optional<EqMap> found;
  enumerate_isos(*S, *T, [&](const GraphIso& iso) {
    int anchor = -1;
    for (int v = 0; v < S->nv(); ++v)
      if (!S->group(v).trivial()) {
        anchor = v;
        break;
      }
    if (anchor < 0) return false;
    // BFS over the spanning tree from the anchor
    std::vector<std::pair<int, int>> steps;  // (known vertex, tree edgelet known->unknown)
    {
      std::set<int> known{anchor};
      std::vector<std::pair<int, int>> adj;  // tree edges both directions
      for (int v = 0; v < S->nv(); ++v) {
        int pe = S->spanning_parent()[static_cast<size_t>(v)];
        if (pe == -1) continue;
        adj.push_back({S->src(pe), pe});
        adj.push_back({v, FreeSplitting::rev(pe)});
      }
      bool grow = true;
      while (grow) {
        grow = false;
        for (auto& [a, e] : adj)
          if (known.count(a) && !known.count(S->dst(e))) {
            steps.push_back({a, e});
            known.insert(S->dst(e));
            grow = true;
          }
      }
    }
    auto c0 = SubgroupAutomaton::conjugator(S->group(anchor),
                                            *&T->group(iso.vmap[static_cast<size_t>(anchor)]));
    if (!c0) return false;
    std::vector<Word> cv(static_cast<size_t>(S->nv()));
    std::function<bool(size_t)> go = [&](size_t idx) -> bool {
      if (idx == steps.size()) {
        auto h = build_witness(S, T, iso, cv);
        if (h) {
          found = h;
          return true;
        }
        return false;
      }
      auto [u, e] = steps[idx];
      int w = S->dst(e);
      int e2 = iso.emap[static_cast<size_t>(e)];
      const auto& Asrc = T->group(T->src(e2));
      const auto& Adst = T->group(T->dst(e2));
      std::set<std::string> seen;
      for (const Word& a : Asrc.elements_up_to(kBallLen))
        for (const Word& b : Adst.elements_up_to(kBallLen)) {
          Word cand = S->twist(e).inverse() * cv[static_cast<size_t>(u)] * a * T->twist(e2) * b;
          if (!seen.insert(cand.str()).second) continue;
          if (!S->group(w).trivial() &&
              !Adst.conjugated(cand).equals(S->group(w)))
            continue;
          cv[static_cast<size_t>(w)] = cand;
          if (go(idx + 1)) return true;
        }
      return false;
    };
    for (const Word& a : T->group(iso.vmap[static_cast<size_t>(anchor)]).elements_up_to(kBallLen)) {
      cv[static_cast<size_t>(anchor)] = *c0 * a;
      if (go(0)) return true;
    }
    return false;
  });
  return found;
}

}  // namespace

bool is_conjugacy(const EqMap& h) {
  if (!validate_map(h).empty()) return false;
  if (!locally_injective(h)) return false;
  auto c = is_collapse(h);
  return c.has_value() && c->empty();
}

std::vector<CollapseResult> one_edge_collapses(Sp S) {
  std::vector<CollapseResult> out;
  for (size_t c = 0; c < S->natural_chains().size(); ++c) {
    if (static_cast<int>(c) > S->natural_rev(static_cast<int>(c))) continue;
    auto sigma = InvariantSubgraph::all(S->npairs()).minus(S->chain_support(static_cast<int>(c)));
    out.push_back(collapse(S, sigma));
  }
  return out;
}

std::optional<EqMap> are_conjugate(Sp S, Sp T) {
  if (S->rank() != T->rank()) return std::nullopt;
  Sp SN = S->natural_form(), TN = T->natural_form();
  if (SN->nv() != TN->nv() || SN->npairs() != TN->npairs()) return std::nullopt;
  auto profile = [](const FreeSplitting& X) {
    std::multiset<std::pair<int, int>> m;
    for (int v = 0; v < X.nv(); ++v)
      m.insert({X.group(v).rank(), static_cast<int>(X.halfedges(v).size())});
    return m;
  };
  if (profile(*SN) != profile(*TN)) return std::nullopt;

  bool pd = true;
  for (int v = 0; v < SN->nv(); ++v)
    if (!SN->group(v).trivial()) pd = false;
  if (pd) return conjugate_pd(SN, TN);
  return conjugate_general(SN, TN);
}

bool conjugate(Sp S, Sp T) { return are_conjugate(S, T).has_value(); }

}  // namespace fsplit
