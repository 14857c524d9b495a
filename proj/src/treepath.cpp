#include <stdexcept>

#include "fsplit/splitting.hpp"

// Reduced paths in the Bass-Serre tree between explicit tree vertices.
// Strategy: every group element g has an expression in the marking
// generators; each marking generator gamma has an explicit path from the
// base vertex X0 to gamma*X0.  Telescoping those pieces gives some path
// X0 -> g*X0, and tightening yields the reduced one (paths in trees are
// unique once reduced).

namespace fsplit {

namespace {

TreePath reverse_path(const FreeSplitting& S, const TreePath& p) {
  TreePath r;
  TreeVertex cur = p.start;
  std::vector<TreeVertex> vs{cur};
  for (auto& s : p.steps) vs.push_back(S.step_end(s));
  r.start = vs.back();
  for (size_t i = p.steps.size(); i-- > 0;) r.steps.push_back(S.step_rev(p.steps[i]));
  return r;
}

// spanning-tree lift X0 -> (v, mu_v * A_v)
TreePath tree_lift(const FreeSplitting& S, int v) {
  std::vector<int> chain;
  int cur = v;
  while (S.spanning_parent()[static_cast<size_t>(cur)] != -1) {
    chain.push_back(S.spanning_parent()[static_cast<size_t>(cur)]);
    cur = S.src(S.spanning_parent()[static_cast<size_t>(cur)]);
  }
  TreePath p;
  p.start = S.base_vertex();
  for (size_t i = chain.size(); i-- > 0;) {
    int e = chain[i];
    p.steps.push_back(TreeStep{e, S.mu(S.src(e))});
  }
  return p;
}

// explicit path X0 -> gamma * X0 for the i-th marking generator
TreePath generator_piece(const FreeSplitting& S, int i) {
  auto [kind, which] = S.marking_kinds()[static_cast<size_t>(i)];
  const Word& gamma = S.marking_generators()[static_cast<size_t>(i)];
  if (kind == 0) {
    // vertex-group generator at vertex v: gamma fixes (v, mu_v A_v)
    TreePath up = tree_lift(S, which);
    TreePath down = translate(S, gamma, reverse_path(S, up));
    return concat(S, up, down);
  }
  // loop generator of non-tree edgelet e
  int e = which;
  TreePath up = tree_lift(S, S.src(e));
  up.steps.push_back(TreeStep{e, S.mu(S.src(e))});
  TreePath down = translate(S, gamma, reverse_path(S, tree_lift(S, S.dst(e))));
  return concat(S, up, down);
}

}  // namespace

TreePath FreeSplitting::path_base_to(const Word& g) const {
  TreeVertex target = tv(0, g);
  TreePath p;
  p.start = base_vertex();
  if (target == p.start) return p;
  auto expr = expresser().express(g);
  if (!expr) throw std::logic_error("path_base_to: expression failed");
  Word acc;
  TreePath path;
  path.start = base_vertex();
  for (auto [i, sgn] : *expr) {
    TreePath piece = generator_piece(*this, i);
    if (sgn < 0) {
      const Word& gamma = marking_generators()[static_cast<size_t>(i)];
      piece = translate(*this, gamma.inverse(), reverse_path(*this, piece));
    }
    TreePath shifted = translate(*this, acc, piece);
    path.steps.insert(path.steps.end(), shifted.steps.begin(), shifted.steps.end());
    acc = acc * (sgn > 0 ? marking_generators()[static_cast<size_t>(i)]
                         : marking_generators()[static_cast<size_t>(i)].inverse());
  }
  return tighten(*this, path);
}

TreePath FreeSplitting::tree_path(const TreeVertex& from, const TreeVertex& to) const {
  // path0(X): base -> X
  auto path0 = [&](const TreeVertex& x) {
    TreePath lift = tree_lift(*this, x.v);
    TreeVertex reached = tv(x.v, mu(x.v));
    if (reached == x) return lift;
    Word delta = x.loc * mu(x.v).inverse();
    TreePath pd = path_base_to(delta);
    TreePath tail = translate(*this, delta, lift);
    TreePath r = pd;
    r.steps.insert(r.steps.end(), tail.steps.begin(), tail.steps.end());
    return tighten(*this, r);
  };
  TreePath a = reverse_path(*this, path0(from));
  TreePath b = path0(to);
  TreePath r = a;
  r.steps.insert(r.steps.end(), b.steps.begin(), b.steps.end());
  r = tighten(*this, r);
  r.start = from;
  return r;
}

}  // namespace fsplit
