#include "fsplit/treemap.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>

namespace fsplit {

EqMap identity_map(Sp S) {
  EqMap f;
  f.dom = f.cod = S;
  f.vbase.resize(static_cast<size_t>(S->nv()));
  std::iota(f.vbase.begin(), f.vbase.end(), 0);
  f.vwit.assign(static_cast<size_t>(S->nv()), Word{});
  for (int e = 0; e < S->ne2(); ++e) f.eimg.push_back(TreeStep{e, Word{}});
  return f;
}

TreeVertex map_vertex(const EqMap& f, const TreeVertex& x) {
  return f.cod->tv(f.vbase[static_cast<size_t>(x.v)], x.loc * f.vwit[static_cast<size_t>(x.v)]);
}

std::optional<TreeStep> map_step(const EqMap& f, const TreeStep& s) {
  const auto& img = f.eimg[static_cast<size_t>(s.e)];
  if (!img) return std::nullopt;
  return TreeStep{img->e, s.g * img->g};
}

TreePath map_path(const EqMap& f, const TreePath& p) {
  TreePath r;
  r.start = map_vertex(f, p.start);
  for (const auto& s : p.steps)
    if (auto is = map_step(f, s)) r.steps.push_back(*is);
  return tighten(*f.cod, r);
}

EqMap compose(const EqMap& f, const EqMap& g) {
  if (f.cod.get() != g.dom.get() &&
      (f.cod->nv() != g.dom->nv() || f.cod->ne2() != g.dom->ne2()))
    throw std::invalid_argument("compose: codomain/domain mismatch");
  EqMap h;
  h.dom = f.dom;
  h.cod = g.cod;
  for (int v = 0; v < f.dom->nv(); ++v) {
    int u = f.vbase[static_cast<size_t>(v)];
    h.vbase.push_back(g.vbase[static_cast<size_t>(u)]);
    h.vwit.push_back(f.vwit[static_cast<size_t>(v)] * g.vwit[static_cast<size_t>(u)]);
  }
  for (int e = 0; e < f.dom->ne2(); ++e) {
    const auto& i1 = f.eimg[static_cast<size_t>(e)];
    if (!i1) {
      h.eimg.push_back(std::nullopt);
      continue;
    }
    const auto& i2 = g.eimg[static_cast<size_t>(i1->e)];
    if (!i2) {
      h.eimg.push_back(std::nullopt);
      continue;
    }
    h.eimg.push_back(TreeStep{i2->e, i1->g * i2->g});
  }
  return h;
}

std::vector<std::string> validate_map(const EqMap& f) {
  std::vector<std::string> bad;
  const FreeSplitting &S = *f.dom, &T = *f.cod;
  if (static_cast<int>(f.vbase.size()) != S.nv() || static_cast<int>(f.eimg.size()) != S.ne2()) {
    bad.push_back("SHAPE: table sizes");
    return bad;
  }
  for (int v = 0; v < S.nv(); ++v) {
    int w = f.vbase[static_cast<size_t>(v)];
    if (w < 0 || w >= T.nv()) {
      bad.push_back("SHAPE: vertex image range");
      continue;
    }
    const Word& g = f.vwit[static_cast<size_t>(v)];
    for (const Word& b : S.group(v).free_basis())
      if (!T.group(w).member(g.inverse() * b * g))
        bad.push_back("STABILIZER: vertex " + std::to_string(v));
  }
  for (int e = 0; e < S.ne2(); ++e) {
    const auto& img = f.eimg[static_cast<size_t>(e)];
    const auto& imgR = f.eimg[static_cast<size_t>(FreeSplitting::rev(e))];
    if (static_cast<bool>(img) != static_cast<bool>(imgR)) {
      bad.push_back("REVERSAL: collapsed flag of edgelet " + std::to_string(e));
      continue;
    }
    if (!img) {
      TreeVertex a = map_vertex(f, S.tv(S.src(e), Word{}));
      TreeVertex b = map_vertex(f, S.tv(S.dst(e), S.twist(e)));
      if (!(a == b)) bad.push_back("COLLAPSED: endpoints of edgelet " + std::to_string(e) + " disagree");
      continue;
    }
    int e2 = img->e;
    const Word& u = img->g;
    // initial endpoint compatibility
    int v = S.src(e), w = f.vbase[static_cast<size_t>(v)];
    if (T.src(e2) != w)
      bad.push_back("ENDPOINT: edgelet " + std::to_string(e));
    else if (!(T.coset(w, f.vwit[static_cast<size_t>(v)]) == T.coset(w, u)))
      bad.push_back("ENDPOINT: coset of edgelet " + std::to_string(e));
    // reversal consistency: f(rev(e,1)) = rev(f(e,1)); here
    // f(rev(e,1)) = f(e^1, twist(e)) = (imgR.e, twist(e)*imgR.g)
    TreeStep expect{FreeSplitting::rev(e2), u * T.twist(e2)};
    TreeStep got{imgR->e, S.twist(e) * imgR->g};
    if (!(got == expect)) bad.push_back("REVERSAL: images of edgelet " + std::to_string(e));
  }
  return bad;
}

std::optional<InvariantSubgraph> is_collapse(const EqMap& f) {
  const FreeSplitting &S = *f.dom, &T = *f.cod;
  std::vector<int> hits(static_cast<size_t>(T.npairs()), 0);
  auto sigma = InvariantSubgraph::none(S.npairs());
  for (int p = 0; p < S.npairs(); ++p) {
    const auto& img = f.eimg[static_cast<size_t>(2 * p)];
    if (!img)
      sigma.pairs[static_cast<size_t>(p)] = 1;
    else
      hits[static_cast<size_t>(img->e / 2)]++;
  }
  for (int q = 0; q < T.npairs(); ++q)
    if (hits[static_cast<size_t>(q)] != 1) return std::nullopt;
  return sigma;
}

bool locally_injective(const EqMap& f) {
  const FreeSplitting& S = *f.dom;
  for (int e = 0; e < S.ne2(); ++e)
    if (!f.eimg[static_cast<size_t>(e)]) return false;
  for (int v = 0; v < S.nv(); ++v) {
    const auto& out = S.halfedges(v);
    for (size_t i = 0; i < out.size(); ++i)
      for (size_t j = i + 1; j < out.size(); ++j) {
        const auto& a = f.eimg[static_cast<size_t>(out[i])];
        const auto& b = f.eimg[static_cast<size_t>(out[j])];
        if (a->e / 2 != b->e / 2) continue;
        if (a->e != b->e) continue;  // opposite orientations never collide at v
        if (S.group(v).member(a->g * b->g.inverse())) return false;
      }
    // same halfedge, distinct stabilizer translates never collide (free orbit)
  }
  return true;
}

GatePartition gates_at(const EqMap& f, int v) {
  const FreeSplitting& S = *f.dom;
  const auto& out = S.halfedges(v);
  for (int e : out)
    if (!f.eimg[static_cast<size_t>(e)]) throw std::runtime_error("UNDEFINED-DERIVATIVE");
  GatePartition gp;
  if (S.group(v).trivial()) {
    std::map<std::pair<int, std::string>, std::vector<int>> blocks;
    for (int e : out) {
      const auto& img = *f.eimg[static_cast<size_t>(e)];
      blocks[{img.e, img.g.str()}].push_back(e);
    }
    for (auto& [k, b] : blocks) {
      gp.max_gate_size = std::max(gp.max_gate_size, static_cast<int>(b.size()));
      gp.blocks.push_back(b);
    }
    gp.gate_count_or_minus1 = static_cast<int>(gp.blocks.size());
    return gp;
  }
  gp.infinite = true;
  for (int e : out) {
    int size = 0;
    const auto& ie = *f.eimg[static_cast<size_t>(e)];
    for (int e2 : out) {
      const auto& ie2 = *f.eimg[static_cast<size_t>(e2)];
      if (ie.e != ie2.e) continue;
      if (S.group(v).member(ie.g * ie2.g.inverse())) ++size;
    }
    gp.max_gate_size = std::max(gp.max_gate_size, size);
  }
  return gp;
}

std::vector<TreeStep> gate_members(const EqMap& f, int v, const TreeStep& d) {
  const FreeSplitting& S = *f.dom;
  std::vector<TreeStep> mem;
  auto id = map_step(f, d);
  if (!id) throw std::runtime_error("UNDEFINED-DERIVATIVE");
  for (int e : S.halfedges(v)) {
    const auto& ie = f.eimg[static_cast<size_t>(e)];
    if (!ie) throw std::runtime_error("UNDEFINED-DERIVATIVE");
    if (ie->e != id->e) continue;
    // (e, a) with a*ie.g == id.g needs a = id.g * ie.g^-1 in A_v
    Word a = id->g * ie->g.inverse();
    if (S.group(v).member(a)) mem.push_back(TreeStep{e, a});
  }
  return mem;
}

namespace {

// image of the canonical lift of a natural chain, as raw steps (no tighten)
std::vector<std::optional<TreeStep>> chain_image(const EqMap& f, const std::vector<int>& chain) {
  std::vector<std::optional<TreeStep>> out;
  Word pre;
  for (int e : chain) {
    out.push_back(map_step(f, TreeStep{e, pre}));
    pre = pre * f.dom->twist(e);
  }
  return out;
}

bool chain_injective(const EqMap& f, const std::vector<int>& chain) {
  auto img = chain_image(f, chain);
  for (auto& s : img)
    if (!s) return false;
  for (size_t i = 0; i + 1 < img.size(); ++i)
    if (f.cod->step_rev(*img[i]) == *img[i + 1]) return false;
  return true;
}

}  // namespace

FoldabilityReport is_foldable(const EqMap& f) {
  const FreeSplitting& S = *f.dom;
  // natural edge definition
  bool natOk = true;
  std::string witness;
  for (size_t c = 0; c < S.natural_chains().size() && natOk; ++c) {
    if (static_cast<int>(c) > S.natural_rev(static_cast<int>(c))) continue;
    if (!chain_injective(f, S.natural_chains()[c])) {
      natOk = false;
      witness = "natural edge " + std::to_string(c);
    }
  }
  for (int v = 0; v < S.nv() && natOk; ++v) {
    if (!S.natural(v)) continue;
    if (S.group(v).trivial()) {
      auto gp = gates_at(f, v);
      if (gp.gate_count_or_minus1 < 3) {
        natOk = false;
        witness = "natural vertex " + std::to_string(v);
      }
    }
  }
  // edgelet definition
  bool edgOk = true;
  std::string ewitness;
  for (int e = 0; e < S.ne2() && edgOk; ++e)
    if (!f.eimg[static_cast<size_t>(e)]) {
      edgOk = false;
      ewitness = "collapsed edgelet " + std::to_string(e);
    }
  for (int v = 0; v < S.nv() && edgOk; ++v) {
    if (S.group(v).trivial()) {
      auto gp = gates_at(f, v);
      int need = S.natural(v) ? 3 : 2;
      if (gp.gate_count_or_minus1 < need) {
        edgOk = false;
        ewitness = "vertex " + std::to_string(v);
      }
    }
  }
  if (natOk != edgOk) throw std::logic_error("foldability definitions disagree");
  FoldabilityReport r;
  r.ok = natOk;
  r.witness = natOk ? "" : (witness.empty() ? ewitness : witness);
  return r;
}

std::optional<Turn> find_illegal_turn(const EqMap& f) {
  const FreeSplitting& S = *f.dom;
  for (int v = 0; v < S.nv(); ++v) {
    const auto& out = S.halfedges(v);
    for (size_t i = 0; i < out.size(); ++i)
      for (size_t j = i + 1; j < out.size(); ++j) {
        const auto& a = f.eimg[static_cast<size_t>(out[i])];
        const auto& b = f.eimg[static_cast<size_t>(out[j])];
        if (!a || !b || a->e != b->e) continue;
        Word w = a->g * b->g.inverse();
        if (S.group(v).member(w))
          return Turn{v, TreeStep{out[i], Word{}}, TreeStep{out[j], w}};
      }
  }
  return std::nullopt;
}

// ---------- collapse ----------

CollapseResult collapse(Sp S, const InvariantSubgraph& sigma) {
  if (sigma.full()) throw std::invalid_argument("PROPERNESS");
  int V = S->nv();
  // components of sigma (vertices not touching sigma are degenerate comps)
  std::vector<int> comp(static_cast<size_t>(V), -1);
  int ncomp = 0;
  for (int v0 = 0; v0 < V; ++v0) {
    if (comp[static_cast<size_t>(v0)] != -1) continue;
    comp[static_cast<size_t>(v0)] = ncomp;
    std::queue<int> q;
    q.push(v0);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e : S->halfedges(v))
        if (sigma.has(e) && comp[static_cast<size_t>(S->dst(e))] == -1) {
          comp[static_cast<size_t>(S->dst(e))] = ncomp;
          q.push(S->dst(e));
        }
    }
    ++ncomp;
  }
  // per component: root (first vertex), sigma-spanning tree, muC, group
  std::vector<int> root(static_cast<size_t>(ncomp), -1);
  for (int v = 0; v < V; ++v)
    if (root[static_cast<size_t>(comp[static_cast<size_t>(v)])] == -1)
      root[static_cast<size_t>(comp[static_cast<size_t>(v)])] = v;
  std::vector<Word> muC(static_cast<size_t>(V));
  std::vector<char> seen(static_cast<size_t>(V), 0);
  std::vector<std::set<int>> treePairs(static_cast<size_t>(ncomp));
  for (int c = 0; c < ncomp; ++c) {
    int r = root[static_cast<size_t>(c)];
    seen[static_cast<size_t>(r)] = 1;
    std::queue<int> q;
    q.push(r);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e : S->halfedges(v)) {
        int w = S->dst(e);
        if (sigma.has(e) && !seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = 1;
          muC[static_cast<size_t>(w)] = muC[static_cast<size_t>(v)] * S->twist(e);
          treePairs[static_cast<size_t>(c)].insert(e / 2);
          q.push(w);
        }
      }
    }
  }
  std::vector<SubgroupAutomaton> groups;
  for (int c = 0; c < ncomp; ++c) {
    std::vector<Word> gens;
    for (int v = 0; v < V; ++v) {
      if (comp[static_cast<size_t>(v)] != c) continue;
      for (const Word& b : S->group(v).free_basis())
        gens.push_back(b.conjugate(muC[static_cast<size_t>(v)]));
    }
    for (int e = 0; e < S->ne2(); e += 2) {
      if (!sigma.has(e)) continue;
      if (comp[static_cast<size_t>(S->src(e))] != c) continue;
      if (treePairs[static_cast<size_t>(c)].count(e / 2)) continue;
      gens.push_back(muC[static_cast<size_t>(S->src(e))] * S->twist(e) *
                     muC[static_cast<size_t>(S->dst(e))].inverse());
    }
    groups.push_back(SubgroupAutomaton::from_generators(S->rank(), gens));
  }
  // surviving edgelets
  std::vector<FreeSplitting::Edgelet> pairs;
  std::vector<int> pairOf(static_cast<size_t>(S->npairs()), -1);
  for (int e = 0; e < S->ne2(); e += 2) {
    if (sigma.has(e)) continue;
    pairOf[static_cast<size_t>(e / 2)] = static_cast<int>(pairs.size());
    pairs.push_back({comp[static_cast<size_t>(S->src(e))], comp[static_cast<size_t>(S->dst(e))],
                     muC[static_cast<size_t>(S->src(e))] * S->twist(e) *
                         muC[static_cast<size_t>(S->dst(e))].inverse()});
  }
  Sp T = FreeSplitting::make(S->rank(), std::move(groups), std::move(pairs));
  EqMap f;
  f.dom = S;
  f.cod = T;
  for (int v = 0; v < V; ++v) {
    f.vbase.push_back(comp[static_cast<size_t>(v)]);
    f.vwit.push_back(muC[static_cast<size_t>(v)].inverse());
  }
  for (int e = 0; e < S->ne2(); ++e) {
    if (sigma.has(e)) {
      f.eimg.push_back(std::nullopt);
      continue;
    }
    int p = pairOf[static_cast<size_t>(e / 2)];
    int e2 = 2 * p + (e % 2);
    f.eimg.push_back(TreeStep{e2, muC[static_cast<size_t>(S->src(e))].inverse()});
  }
  return CollapseResult{T, std::move(f)};
}

InvariantSubgraph natural_core(const FreeSplitting& S, const InvariantSubgraph& sigma) {
  auto core = InvariantSubgraph::none(S.npairs());
  for (size_t c = 0; c < S.natural_chains().size(); ++c) {
    if (static_cast<int>(c) > S.natural_rev(static_cast<int>(c))) continue;
    bool inside = true;
    for (int e : S.natural_chains()[c])
      if (!sigma.has(e)) inside = false;
    if (inside)
      for (int e : S.natural_chains()[c]) core.pairs[static_cast<size_t>(e / 2)] = 1;
  }
  return core;
}

CollapseResult pd_expansion(Sp S) {
  bool allTrivial = true;
  for (int v = 0; v < S->nv(); ++v)
    if (!S->group(v).trivial()) allTrivial = false;
  if (allTrivial) return CollapseResult{S, identity_map(S)};

  std::vector<SubgroupAutomaton> groups(static_cast<size_t>(S->nv()),
                                        SubgroupAutomaton(S->rank()));
  std::vector<FreeSplitting::Edgelet> pairs;
  for (int e = 0; e < S->ne2(); e += 2)
    pairs.push_back({S->src(e), S->dst(e), S->twist(e)});
  int firstLoopPair = static_cast<int>(pairs.size());
  for (int v = 0; v < S->nv(); ++v)
    for (const Word& b : S->group(v).free_basis()) pairs.push_back({v, v, b});
  Sp R = FreeSplitting::make(S->rank(), std::move(groups), std::move(pairs));
  auto sigma = InvariantSubgraph::none(R->npairs());
  for (int p = firstLoopPair; p < R->npairs(); ++p) sigma.pairs[static_cast<size_t>(p)] = 1;
  CollapseResult res = collapse(R, sigma);
  // the collapse reproduces S cell-for-cell; rebind the codomain
  if (res.to->canonical_string() != S->canonical_string())
    throw std::logic_error("pd_expansion: collapse does not reproduce the splitting");
  res.map.cod = S;
  return CollapseResult{R, std::move(res.map)};
}

std::vector<SubgroupAutomaton> vertex_group_system(const FreeSplitting& S) {
  std::vector<SubgroupAutomaton> sys;
  for (int v = 0; v < S.nv(); ++v)
    if (!S.group(v).trivial()) sys.push_back(S.group(v));
  return sys;
}

InvariantSubgraph preimage(const EqMap& f, const InvariantSubgraph& sigma) {
  auto r = InvariantSubgraph::none(f.dom->npairs());
  for (int p = 0; p < f.dom->npairs(); ++p) {
    const auto& img = f.eimg[static_cast<size_t>(2 * p)];
    if (img && sigma.has(img->e)) r.pairs[static_cast<size_t>(p)] = 1;
  }
  return r;
}

InvariantSubgraph image_subgraph(const EqMap& f, const InvariantSubgraph& sigma) {
  auto r = InvariantSubgraph::none(f.cod->npairs());
  for (int p = 0; p < f.dom->npairs(); ++p) {
    if (!sigma.pairs[static_cast<size_t>(p)]) continue;
    const auto& img = f.eimg[static_cast<size_t>(2 * p)];
    if (img) r.pairs[static_cast<size_t>(img->e / 2)] = 1;
  }
  return r;
}

void complete_vertex_images(EqMap& f) {
  const FreeSplitting& S = *f.dom;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int e = 0; e < S.ne2(); ++e) {
      const auto& img = f.eimg[static_cast<size_t>(e)];
      if (!img) continue;
      int v = S.dst(e);
      if (f.vbase[static_cast<size_t>(v)] != -1) continue;
      TreeVertex end = f.cod->step_end(*img);
      f.vbase[static_cast<size_t>(v)] = end.v;
      f.vwit[static_cast<size_t>(v)] =
          S.twist(e).inverse() * img->g * f.cod->twist(img->e);
      grew = true;
    }
  }
}

bool maps_equal(const EqMap& f, const EqMap& g) {
  if (f.dom->canonical_string() != g.dom->canonical_string()) return false;
  if (f.cod->canonical_string() != g.cod->canonical_string()) return false;
  for (int v = 0; v < f.dom->nv(); ++v)
    if (!(f.vertex_image(v) == g.vertex_image(v))) return false;
  for (int e = 0; e < f.dom->ne2(); ++e) {
    const auto &a = f.eimg[static_cast<size_t>(e)], &b = g.eimg[static_cast<size_t>(e)];
    if (static_cast<bool>(a) != static_cast<bool>(b)) return false;
    if (a && !(*a == *b)) return false;
  }
  return true;
}

SubdividedMap pull_subdivision(const EqMap& f, Sp codSub, const std::vector<int>& codCounts) {
  const FreeSplitting& S = *f.dom;
  std::vector<int> domCounts(static_cast<size_t>(S.npairs()), 1);
  for (int p = 0; p < S.npairs(); ++p) {
    const auto& img = f.eimg[static_cast<size_t>(2 * p)];
    if (img) domCounts[static_cast<size_t>(p)] = codCounts[static_cast<size_t>(img->e / 2)];
  }
  Sp domSub = S.subdivided(domCounts);
  // pair offsets in the subdivided graphs
  auto offsets = [](const std::vector<int>& counts) {
    std::vector<int> off(counts.size() + 1, 0);
    for (size_t i = 0; i < counts.size(); ++i)
      off[i + 1] = off[i] + std::max(1, counts[i]);
    return off;
  };
  std::vector<int> offD = offsets(domCounts), offC = offsets(codCounts);
  // chain of sub-steps realizing the tree edgelet (e, u) of the unsubdivided
  // codomain inside the subdivided one
  auto lift_chain = [&](const FreeSplitting& TS, const std::vector<int>& off, int e,
                        const Word& u) {
    int p = e / 2, k = std::max(1, codCounts[static_cast<size_t>(p)]);
    std::vector<TreeStep> chain;
    Word cur = u;
    for (int j = 0; j < k; ++j) {
      int sub = (e % 2 == 0) ? 2 * (off[static_cast<size_t>(p)] + j)
                             : 2 * (off[static_cast<size_t>(p)] + (k - 1 - j)) + 1;
      chain.push_back(TreeStep{sub, cur});
      cur = cur * TS.twist(sub);
    }
    return chain;
  };
  EqMap g;
  g.dom = domSub;
  g.cod = codSub;
  g.vbase.assign(static_cast<size_t>(domSub->nv()), -1);
  g.vwit.assign(static_cast<size_t>(domSub->nv()), Word{});
  g.eimg.assign(static_cast<size_t>(domSub->ne2()), std::nullopt);
  // original vertices keep their images
  for (int v = 0; v < S.nv(); ++v) {
    g.vbase[static_cast<size_t>(v)] = f.vbase[static_cast<size_t>(v)];
    g.vwit[static_cast<size_t>(v)] = f.vwit[static_cast<size_t>(v)];
  }
  for (int p = 0; p < S.npairs(); ++p) {
    int k = domCounts[static_cast<size_t>(p)];
    const auto& img = f.eimg[static_cast<size_t>(2 * p)];
    std::vector<TreeStep> chain;
    if (img) chain = lift_chain(*codSub, offC, img->e, img->g);
    for (int j = 0; j < k; ++j) {
      int subE = 2 * (offD[static_cast<size_t>(p)] + j);
      if (img) {
        const TreeStep& st = chain[static_cast<size_t>(j)];
        g.eimg[static_cast<size_t>(subE)] = st;
        g.eimg[static_cast<size_t>(subE + 1)] = TreeStep{
            FreeSplitting::rev(st.e),
            domSub->twist(subE).inverse() * st.g * codSub->twist(st.e)};
      } else {
        g.eimg[static_cast<size_t>(subE)] = std::nullopt;
        g.eimg[static_cast<size_t>(subE + 1)] = std::nullopt;
      }
      // interior vertex after sub-edgelet j (for j < k-1)
      if (j + 1 < k) {
        int iv = domSub->dst(subE);
        if (img) {
          TreeVertex im = codSub->step_end(chain[static_cast<size_t>(j)]);
          g.vbase[static_cast<size_t>(iv)] = im.v;
          g.vwit[static_cast<size_t>(iv)] =
              chain[static_cast<size_t>(j)].g * codSub->twist(chain[static_cast<size_t>(j)].e);
        }
      }
    }
  }
  SubdividedMap r;
  r.domSub = domSub;
  r.map = std::move(g);
  r.domCounts = std::move(domCounts);
  return r;
}

NfExpansion nf_expand_iso(Sp S) {
  NfExpansion out;
  out.nf = S->natural_form();
  // counts per natural-form pair, in orbit enumeration order
  std::vector<int> chains;
  for (size_t c = 0; c < S->natural_chains().size(); ++c)
    if (static_cast<int>(c) <= S->natural_rev(static_cast<int>(c)))
      chains.push_back(static_cast<int>(c));
  for (int c : chains)
    out.counts.push_back(static_cast<int>(S->natural_chains()[static_cast<size_t>(c)].size()));
  Sp sub = out.nf->subdivided(out.counts);
  // vertex correspondence: natural vertices in order, then interior vertices
  EqMap iso;
  iso.dom = sub;
  iso.cod = S;
  iso.vbase.assign(static_cast<size_t>(sub->nv()), -1);
  iso.vwit.assign(static_cast<size_t>(sub->nv()), Word{});
  iso.eimg.assign(static_cast<size_t>(sub->ne2()), std::nullopt);
  {
    int id = 0;
    for (int v = 0; v < S->nv(); ++v)
      if (S->natural(v)) {
        iso.vbase[static_cast<size_t>(id)] = v;
        ++id;
      }
  }
  std::vector<int> off(chains.size() + 1, 0);
  for (size_t i = 0; i < chains.size(); ++i) off[i + 1] = off[i] + out.counts[i];
  for (size_t ci = 0; ci < chains.size(); ++ci) {
    const auto& ch = S->natural_chains()[static_cast<size_t>(chains[ci])];
    Word preS, preN;
    for (size_t j = 0; j < ch.size(); ++j) {
      int subE = 2 * (off[ci] + static_cast<int>(j));
      // (subE, preN)-lift corresponds to (ch[j], preS)-lift
      iso.eimg[static_cast<size_t>(subE)] = TreeStep{ch[j], preN.inverse() * preS};
      iso.eimg[static_cast<size_t>(subE + 1)] =
          TreeStep{FreeSplitting::rev(ch[j]), sub->twist(subE).inverse() * preN.inverse() * preS *
                                                  S->twist(ch[j])};
      preS = preS * S->twist(ch[j]);
      preN = preN * sub->twist(subE);
    }
  }
  complete_vertex_images(iso);
  if (!validate_map(iso).empty()) throw std::logic_error("nf_expand_iso: invalid");
  if (!locally_injective(iso)) throw std::logic_error("nf_expand_iso: not a conjugacy");
  iso.dom = sub;
  out.iso = std::move(iso);
  return out;
}

}  // namespace fsplit
