#include "fsplit/make_foldable.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace fsplit {

namespace {

struct SearchState {
  Sp X;  // natural-form splitting (one edgelet per natural edge)
  Sp T;
  std::vector<TreeVertex> vimg;      // image of each X vertex
  std::vector<TreePath> epath;       // per pair: image path of the canonical lift
  std::vector<EqMap> collapseChain;  // collapses applied so far

  void recompute_path(int p) {
    int e = 2 * p;
    TreeVertex from = vimg[static_cast<size_t>(X->src(e))];
    const TreeVertex& dv = vimg[static_cast<size_t>(X->dst(e))];
    TreeVertex to = T->tv(dv.v, X->twist(e) * dv.loc);
    epath[static_cast<size_t>(p)] = T->tree_path(from, to);
  }
  void recompute_all() {
    epath.assign(static_cast<size_t>(X->npairs()), TreePath{});
    for (int p = 0; p < X->npairs(); ++p) recompute_path(p);
  }
  long length() const {
    long s = 0;
    for (auto& p : epath) s += static_cast<long>(p.steps.size());
    return s;
  }
  long energy() const {
    long s = 0;
    for (auto& p : epath)
      s += static_cast<long>(p.steps.size()) * static_cast<long>(p.steps.size());
    return s;
  }
  // image path of the canonical lift of an oriented halfedge e
  TreePath oriented_path(int e) const {
    const TreePath& p = epath[static_cast<size_t>(e / 2)];
    if (e % 2 == 0) return p;
    TreePath r;
    if (p.steps.empty()) {
      r.start = T->tv(p.start.v, X->twist(e) * p.start.loc);
      return r;
    }
    r.start = T->step_end(p.steps.back());
    for (size_t i = p.steps.size(); i-- > 0;) r.steps.push_back(T->step_rev(p.steps[i]));
    return translate(*T, X->twist(e), r);
  }
};

// collapse one constant natural edge, carrying vertex images through
void apply_collapse(SearchState& st, int pair) {
  auto sigma = InvariantSubgraph::none(st.X->npairs());
  sigma.pairs[static_cast<size_t>(pair)] = 1;
  CollapseResult c = collapse(st.X, sigma);
  std::vector<TreeVertex> nv(static_cast<size_t>(c.to->nv()));
  std::vector<char> set(static_cast<size_t>(c.to->nv()), 0);
  for (int v = 0; v < st.X->nv(); ++v) {
    int z = c.map.vbase[static_cast<size_t>(v)];
    TreeVertex img = st.T->tv(st.vimg[static_cast<size_t>(v)].v,
                              c.map.vwit[static_cast<size_t>(v)].inverse() *
                                  st.vimg[static_cast<size_t>(v)].loc);
    if (!set[static_cast<size_t>(z)]) {
      nv[static_cast<size_t>(z)] = img;
      set[static_cast<size_t>(z)] = 1;
    } else if (!(nv[static_cast<size_t>(z)] == img)) {
      throw std::logic_error("make_foldable: inconsistent collapse of a non-constant edge");
    }
  }
  for (int v = 0; v < c.to->nv(); ++v)
    if (!c.to->natural(v)) throw std::logic_error("make_foldable: collapse left the natural form");
  st.collapseChain.push_back(c.map);
  st.X = c.to;
  st.vimg = std::move(nv);
  st.recompute_all();
}

std::vector<TreeVertex> move_candidates(const SearchState& st, int v) {
  std::set<std::string> seen;
  std::vector<TreeVertex> out;
  for (int e : st.X->halfedges(v)) {
    TreePath p = st.oriented_path(e);
    if (p.steps.empty()) continue;
    TreeVertex cand = st.T->step_end(p.steps.front());
    std::string key = std::to_string(cand.v) + ":" + cand.loc.str();
    if (seen.insert(key).second) out.push_back(cand);
  }
  return out;
}

bool vertex_pinned(const SearchState& st, int v) { return !st.X->group(v).trivial(); }

}  // namespace

FoldableHull make_foldable(Sp S, Sp T, int moveBudget) {
  CollapseResult pd = pd_expansion(S);
  Sp Sprime = pd.to;

  SearchState st;
  st.X = Sprime->natural_form();
  st.T = T;
  st.vimg.assign(static_cast<size_t>(st.X->nv()), T->base_vertex());
  st.recompute_all();

  int budget = moveBudget;
  auto collapse_constants = [&]() {
    bool again = true;
    while (again) {
      again = false;
      for (int p = 0; p < st.X->npairs(); ++p)
        if (st.epath[static_cast<size_t>(p)].steps.empty()) {
          if (st.X->npairs() == 1)
            throw std::logic_error("make_foldable: constant map on a one-edge splitting");
          apply_collapse(st, p);
          again = true;
          break;
        }
    }
  };

  collapse_constants();
  for (int phase = 0; phase < 2; ++phase) {
    bool improved = true;
    while (improved && budget > 0) {
      improved = false;
      for (int v = 0; v < st.X->nv() && !improved; ++v) {
        if (vertex_pinned(st, v)) continue;
        long curL = st.length(), curE = st.energy();
        TreeVertex save = st.vimg[static_cast<size_t>(v)];
        for (const TreeVertex& cand : move_candidates(st, v)) {
          st.vimg[static_cast<size_t>(v)] = cand;
          st.recompute_all();
          bool better = phase == 0 ? st.length() < curL
                                   : (st.length() == curL && st.energy() > curE);
          if (better) {
            improved = true;
            --budget;
            break;
          }
          st.vimg[static_cast<size_t>(v)] = save;
        }
        if (!improved) st.recompute_all();
      }
      collapse_constants();
    }
  }
  if (budget <= 0) throw std::runtime_error("ITERATION-LIMIT");

  auto assemble = [&]() {
    std::vector<int> counts(static_cast<size_t>(st.X->npairs()), 1);
    for (int p = 0; p < st.X->npairs(); ++p)
      counts[static_cast<size_t>(p)] =
          std::max<int>(1, static_cast<int>(st.epath[static_cast<size_t>(p)].steps.size()));
    Sp Spp = st.X->subdivided(counts);
    EqMap f;
    f.dom = Spp;
    f.cod = T;
    f.vbase.assign(static_cast<size_t>(Spp->nv()), -1);
    f.vwit.assign(static_cast<size_t>(Spp->nv()), Word{});
    f.eimg.assign(static_cast<size_t>(Spp->ne2()), std::nullopt);
    for (int v = 0; v < st.X->nv(); ++v) {
      f.vbase[static_cast<size_t>(v)] = st.vimg[static_cast<size_t>(v)].v;
      f.vwit[static_cast<size_t>(v)] = st.vimg[static_cast<size_t>(v)].loc;
    }
    std::vector<int> off(static_cast<size_t>(st.X->npairs()) + 1, 0);
    for (int p = 0; p < st.X->npairs(); ++p)
      off[static_cast<size_t>(p) + 1] =
          off[static_cast<size_t>(p)] + counts[static_cast<size_t>(p)];
    for (int p = 0; p < st.X->npairs(); ++p) {
      const TreePath& path = st.epath[static_cast<size_t>(p)];
      int k = counts[static_cast<size_t>(p)];
      for (int j = 0; j < k; ++j) {
        int subE = 2 * (off[static_cast<size_t>(p)] + j);
        const TreeStep& img = path.steps[static_cast<size_t>(j)];
        f.eimg[static_cast<size_t>(subE)] = img;
        f.eimg[static_cast<size_t>(subE + 1)] =
            TreeStep{FreeSplitting::rev(img.e),
                     Spp->twist(subE).inverse() * img.g * T->twist(img.e)};
        if (j + 1 < k) {
          int iv = Spp->dst(subE);
          TreeVertex im = T->step_end(img);
          f.vbase[static_cast<size_t>(iv)] = im.v;
          f.vwit[static_cast<size_t>(iv)] = img.g * T->twist(img.e);
        }
      }
    }
    return std::pair<Sp, EqMap>{Spp, std::move(f)};
  };

  auto [Spp, f] = assemble();
  if (!validate_map(f).empty()) throw std::logic_error("make_foldable: assembled map invalid");
  auto rep = is_foldable(f);
  if (!rep.ok) {
    // two-gate outcome at the unique natural vertex orbit: move the image to
    // the nearest branch point of the oriented-ray image subtree
    int bad = -1;
    for (int v = 0; v < st.X->nv(); ++v) {
      if (vertex_pinned(st, v)) continue;
      auto gp = gates_at(f, v);
      if (gp.gate_count_or_minus1 == 2) {
        bad = v;
        break;
      }
    }
    if (bad >= 0) {
      auto gp = gates_at(f, bad);
      if (gp.blocks.size() == 2) {
        std::set<int> outward;
        // orient the natural edges of X by the image direction of their
        // oriented paths at `bad`
        std::map<std::string, std::vector<int>> blocks;
        for (int e : st.X->halfedges(bad)) {
          TreePath p = st.oriented_path(e);
          const TreeStep& first = p.steps.front();
          blocks[std::to_string(first.e) + ":" + first.g.str()].push_back(e);
        }
        if (blocks.size() == 2) {
          outward = std::set<int>(blocks.begin()->second.begin(), blocks.begin()->second.end());
          TreeVertex P = st.vimg[static_cast<size_t>(bad)];
          std::map<std::string, std::set<std::string>> dirs;
          std::map<std::string, TreeVertex> at;
          auto touch = [&](const TreeVertex& x, const TreeStep& d) {
            std::string k = std::to_string(x.v) + ":" + x.loc.str();
            dirs[k].insert(std::to_string(d.e) + ":" + d.g.str());
            at[k] = x;
          };
          struct Ray {
            Word loc;  // the ray end is loc * (canonical lift of `bad`)
          };
          std::vector<Ray> frontier{{Word{}}};
          for (int depth = 0; depth < 3; ++depth) {
            std::vector<Ray> next;
            for (auto& r : frontier) {
              for (int e : st.X->halfedges(bad)) {
                if (!outward.count(e)) continue;
                TreePath moved = translate(*st.T, r.loc, st.oriented_path(e));
                TreeVertex cur = moved.start;
                for (auto& s : moved.steps) {
                  touch(cur, s);
                  cur = st.T->step_end(s);
                  touch(cur, st.T->step_rev(s));
                }
                next.push_back(Ray{r.loc * st.X->twist(e)});
              }
              if (next.size() > 256) break;
            }
            frontier = next;
          }
          std::string bestKey;
          int bestDist = 1 << 30;
          for (auto& [k, ds] : dirs) {
            if (static_cast<int>(ds.size()) < 3) continue;
            int dist = static_cast<int>(st.T->tree_path(P, at[k]).steps.size());
            if (dist < bestDist) {
              bestDist = dist;
              bestKey = k;
            }
          }
          if (!bestKey.empty()) {
            st.vimg[static_cast<size_t>(bad)] = at[bestKey];
            st.recompute_all();
            collapse_constants();
            std::tie(Spp, f) = assemble();
            rep = is_foldable(f);
          }
        }
      }
    }
  }
  if (!rep.ok || !validate_map(f).empty())
    throw std::runtime_error("make_foldable: optimization ended non-foldable (" + rep.witness +
                             ")");

  EqMap chain = identity_map(Sprime->natural_form());
  for (const EqMap& c : st.collapseChain) chain = compose(chain, c);
  std::vector<int> counts(static_cast<size_t>(st.X->npairs()), 1);
  for (int p = 0; p < st.X->npairs(); ++p)
    counts[static_cast<size_t>(p)] =
        std::max<int>(1, static_cast<int>(st.epath[static_cast<size_t>(p)].steps.size()));
  SubdividedMap sub = pull_subdivision(chain, Spp, counts);

  FoldableHull out;
  out.expansion = Sprime;
  out.expandToS = pd.map;
  out.middle = Spp;
  out.collapseWit = sub.map;
  out.map = f;
  return out;
}

}  // namespace fsplit
