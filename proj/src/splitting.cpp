#include "fsplit/splitting.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fsplit {

bool InvariantSubgraph::empty() const {
  for (char c : pairs)
    if (c) return false;
  return true;
}
bool InvariantSubgraph::full() const {
  for (char c : pairs)
    if (!c) return false;
  return true;
}
int InvariantSubgraph::count() const {
  int n = 0;
  for (char c : pairs) n += c ? 1 : 0;
  return n;
}
InvariantSubgraph InvariantSubgraph::none(int npairs) {
  return InvariantSubgraph{std::vector<char>(static_cast<size_t>(npairs), 0)};
}
InvariantSubgraph InvariantSubgraph::all(int npairs) {
  return InvariantSubgraph{std::vector<char>(static_cast<size_t>(npairs), 1)};
}
InvariantSubgraph InvariantSubgraph::united(const InvariantSubgraph& o) const {
  InvariantSubgraph r = *this;
  for (size_t i = 0; i < pairs.size(); ++i) r.pairs[i] = pairs[i] || o.pairs[i];
  return r;
}
InvariantSubgraph InvariantSubgraph::intersect(const InvariantSubgraph& o) const {
  InvariantSubgraph r = *this;
  for (size_t i = 0; i < pairs.size(); ++i) r.pairs[i] = pairs[i] && o.pairs[i];
  return r;
}
InvariantSubgraph InvariantSubgraph::minus(const InvariantSubgraph& o) const {
  InvariantSubgraph r = *this;
  for (size_t i = 0; i < pairs.size(); ++i) r.pairs[i] = pairs[i] && !o.pairs[i];
  return r;
}

Sp FreeSplitting::make(int rank, std::vector<SubgroupAutomaton> groups,
                       std::vector<Edgelet> pairs) {
  auto s = std::make_shared<FreeSplitting>();
  s->rank_ = rank;
  s->grp_ = std::move(groups);
  s->ed_.clear();
  for (auto& p : pairs) {
    s->ed_.push_back(p);
    s->ed_.push_back(Edgelet{p.dst, p.src, p.twist.inverse()});
  }
  s->finalize();
  return s;
}

Sp FreeSplitting::rose(int rank) {
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(rank)};
  std::vector<Edgelet> pairs;
  for (int i = 1; i <= rank; ++i) pairs.push_back({0, 0, Word::letter(i)});
  return make(rank, std::move(groups), std::move(pairs));
}

void FreeSplitting::finalize() {
  int V = nv(), E2 = ne2();
  out_.assign(static_cast<size_t>(V), {});
  for (int e = 0; e < E2; ++e) out_[static_cast<size_t>(src(e))].push_back(e);

  // natural vertices: nontrivial group (with any halfedge) or valence >= 3
  natVertex_.assign(static_cast<size_t>(V), 0);
  for (int v = 0; v < V; ++v) {
    if (!grp_[static_cast<size_t>(v)].trivial())
      natVertex_[static_cast<size_t>(v)] = 1;
    else
      natVertex_[static_cast<size_t>(v)] = out_[static_cast<size_t>(v)].size() >= 3;
  }

  // natural edge chains
  natChains_.clear();
  chainOf_.assign(static_cast<size_t>(E2), -1);
  for (int e0 = 0; e0 < E2; ++e0) {
    if (chainOf_[static_cast<size_t>(e0)] != -1) continue;
    if (!natVertex_[static_cast<size_t>(src(e0))]) continue;
    std::vector<int> chain{e0};
    int cur = e0;
    while (!natVertex_[static_cast<size_t>(dst(cur))]) {
      int w = dst(cur);
      int nxt = -1;
      for (int h : out_[static_cast<size_t>(w)])
        if (h != rev(cur)) nxt = h;
      if (nxt == -1) break;  // dead end (invalid graph; reported by validate)
      chain.push_back(nxt);
      cur = nxt;
      if (static_cast<int>(chain.size()) > E2) break;  // circle guard
    }
    int id = static_cast<int>(natChains_.size());
    for (int e : chain) chainOf_[static_cast<size_t>(e)] = id;
    natChains_.push_back(std::move(chain));
  }
  // pair up reversed chains
  natRev_.assign(natChains_.size(), -1);
  for (size_t i = 0; i < natChains_.size(); ++i) {
    if (natRev_[i] != -1) continue;
    int last = natChains_[i].back();
    int j = chainOf_[static_cast<size_t>(rev(last))];
    if (j >= 0) {
      natRev_[i] = j;
      natRev_[static_cast<size_t>(j)] = static_cast<int>(i);
    }
  }

  // spanning tree from vertex 0 (BFS, deterministic order)
  parentEdge_.assign(static_cast<size_t>(V), -1);
  mu_.assign(static_cast<size_t>(V), Word{});
  std::vector<char> seen(static_cast<size_t>(V), 0);
  if (V > 0) {
    seen[0] = 1;
    std::queue<int> q;
    q.push(0);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e : out_[static_cast<size_t>(v)]) {
        int w = dst(e);
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = 1;
          parentEdge_[static_cast<size_t>(w)] = e;
          mu_[static_cast<size_t>(w)] = mu_[static_cast<size_t>(v)] * twist(e);
          q.push(w);
        }
      }
    }
  }

  // marking generators: mu-conjugated vertex group bases + loop words
  markGens_.clear();
  markKinds_.clear();
  for (int v = 0; v < V; ++v)
    for (const Word& b : grp_[static_cast<size_t>(v)].free_basis()) {
      markGens_.push_back(b.conjugate(mu_[static_cast<size_t>(v)]));
      markKinds_.push_back({0, v});
    }
  std::set<int> treeEdges;
  for (int v = 0; v < V; ++v)
    if (parentEdge_[static_cast<size_t>(v)] != -1) {
      treeEdges.insert(parentEdge_[static_cast<size_t>(v)]);
      treeEdges.insert(rev(parentEdge_[static_cast<size_t>(v)]));
    }
  for (int e = 0; e < E2; e += 2) {
    if (treeEdges.count(e)) continue;
    markGens_.push_back(mu_[static_cast<size_t>(src(e))] * twist(e) *
                        mu_[static_cast<size_t>(dst(e))].inverse());
    markKinds_.push_back({1, e});
  }
  expr_ = GenExpresser(rank_, markGens_);
}

int FreeSplitting::betti() const { return npairs() - nv() + 1; }

int FreeSplitting::natural_orbit_count() const {
  int n = 0;
  for (size_t i = 0; i < natChains_.size(); ++i)
    if (static_cast<int>(i) <= natRev_[i]) ++n;
  return n;
}

InvariantSubgraph FreeSplitting::chain_support(int chain) const {
  auto s = InvariantSubgraph::none(npairs());
  for (int e : natChains_[static_cast<size_t>(chain)]) s.pairs[static_cast<size_t>(e / 2)] = 1;
  return s;
}

std::optional<int> FreeSplitting::tree_valence(int v) const {
  if (!grp_[static_cast<size_t>(v)].trivial()) {
    if (out_[static_cast<size_t>(v)].empty()) return 0;
    return std::nullopt;  // infinite
  }
  return static_cast<int>(out_[static_cast<size_t>(v)].size());
}

std::vector<std::string> FreeSplitting::validate() const {
  std::vector<std::string> bad;
  int V = nv(), E2 = ne2();
  if (E2 == 0) bad.push_back("DEGENERATE: no edgelets");
  // reversal consistency
  for (int e = 0; e < E2; e += 2) {
    if (src(e) != dst(rev(e)) || dst(e) != src(rev(e)))
      bad.push_back("REVERSAL: endpoints of pair " + std::to_string(e / 2));
    if (!(twist(rev(e)) == twist(e).inverse()))
      bad.push_back("REVERSAL: twist of pair " + std::to_string(e / 2));
  }
  // connectivity
  {
    std::vector<char> seen(static_cast<size_t>(V), 0);
    std::queue<int> q;
    if (V > 0) {
      seen[0] = 1;
      q.push(0);
    }
    int cnt = V > 0 ? 1 : 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e : out_[static_cast<size_t>(v)])
        if (!seen[static_cast<size_t>(dst(e))]) {
          seen[static_cast<size_t>(dst(e))] = 1;
          ++cnt;
          q.push(dst(e));
        }
    }
    if (cnt != V) bad.push_back("CONNECTIVITY: quotient graph disconnected");
  }
  // minimality
  for (int v = 0; v < V; ++v)
    if (grp_[static_cast<size_t>(v)].trivial() && out_[static_cast<size_t>(v)].size() <= 1)
      bad.push_back("MINIMALITY: trivial-group vertex " + std::to_string(v) + " of valence " +
                    std::to_string(out_[static_cast<size_t>(v)].size()));
  // rank formula
  int sum = 0;
  for (int v = 0; v < V; ++v) sum += grp_[static_cast<size_t>(v)].rank();
  if (sum + betti() != rank_)
    bad.push_back("MARKING: vertex group ranks + betti = " + std::to_string(sum + betti()) +
                  " != rank " + std::to_string(rank_));
  // marking surjectivity
  else {
    auto whole = SubgroupAutomaton::from_generators(rank_, markGens_);
    bool onto = whole.num_states() == 1 && whole.rank() == rank_;
    if (!onto) bad.push_back("MARKING: induced generating set is not all of F");
  }
  // natural label consistency: every unnatural vertex inside exactly one chain
  for (int e = 0; e < E2; ++e)
    if (chainOf_[static_cast<size_t>(e)] == -1)
      bad.push_back("NATURAL: edgelet " + std::to_string(e) + " lies on no natural edge");
  if (natural_orbit_count() > 3 * rank_ - 3)
    bad.push_back("NATURAL: more than 3*rank-3 natural edge orbits");
  return bad;
}

// ---------- canonical string ----------

namespace {

std::string serialize_from(const FreeSplitting& S, const std::vector<int>& order) {
  // order: canonical position -> vertex id
  std::vector<int> pos(static_cast<size_t>(S.nv()), -1);
  for (size_t i = 0; i < order.size(); ++i) pos[static_cast<size_t>(order[i])] = static_cast<int>(i);
  std::ostringstream os;
  for (int v : order) os << "[" << S.group(v).canonical_string() << "]";
  // edges sorted by (pos src, pos dst, twist)
  std::vector<std::tuple<int, int, std::string>> rows;
  for (int e = 0; e < S.ne2(); e += 2) {
    int a = pos[static_cast<size_t>(S.src(e))], b = pos[static_cast<size_t>(S.dst(e))];
    std::string t = S.twist(e).str();
    std::string rt = S.twist(FreeSplitting::rev(e)).str();
    if (a <= b)
      rows.emplace_back(a, b, t);
    else
      rows.emplace_back(b, a, rt);
  }
  std::sort(rows.begin(), rows.end());
  for (auto& [a, b, t] : rows) os << "(" << a << "-" << b << ":" << t << ")";
  return os.str();
}

}  // namespace

std::string FreeSplitting::canonical_string() const {
  int V = nv();
  // invariant refinement
  std::vector<std::string> inv(static_cast<size_t>(V));
  for (int v = 0; v < V; ++v) {
    std::ostringstream os;
    os << grp_[static_cast<size_t>(v)].rank() << "/" << out_[static_cast<size_t>(v)].size();
    inv[static_cast<size_t>(v)] = os.str();
  }
  for (int round = 0; round < 3; ++round) {
    std::vector<std::string> next(static_cast<size_t>(V));
    for (int v = 0; v < V; ++v) {
      std::vector<std::string> nb;
      for (int e : out_[static_cast<size_t>(v)])
        nb.push_back(inv[static_cast<size_t>(dst(e))] + "~" + twist(e).str());
      std::sort(nb.begin(), nb.end());
      std::string s = inv[static_cast<size_t>(v)] + "|";
      for (auto& x : nb) s += x + ",";
      next[static_cast<size_t>(v)] = s;
    }
    inv = next;
  }
  // candidate roots: minimal invariant class; BFS orders with sorted tie-break
  std::string best;
  for (int r = 0; r < V; ++r) {
    std::vector<int> order;
    std::vector<char> seen(static_cast<size_t>(V), 0);
    std::queue<int> q;
    q.push(r);
    seen[static_cast<size_t>(r)] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      order.push_back(v);
      std::vector<std::pair<std::string, int>> nb;
      for (int e : out_[static_cast<size_t>(v)])
        nb.push_back({inv[static_cast<size_t>(dst(e))] + twist(e).str(), dst(e)});
      std::sort(nb.begin(), nb.end());
      for (auto& [s, w] : nb)
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = 1;
          q.push(w);
        }
    }
    std::string ser = "r" + std::to_string(rank_) + ";" + serialize_from(*this, order);
    if (best.empty() || ser < best) best = ser;
  }
  return best;
}

size_t FreeSplitting::content_hash() const {
  std::string s = canonical_string();
  size_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<size_t>(static_cast<unsigned char>(c));
    h *= 1099511628211ull;
  }
  return h;
}

// ---------- natural form / subdivision ----------

Sp FreeSplitting::natural_form() const {
  // new vertices = natural vertices
  std::vector<int> vmap(static_cast<size_t>(nv()), -1);
  std::vector<SubgroupAutomaton> groups;
  for (int v = 0; v < nv(); ++v)
    if (natural(v)) {
      vmap[static_cast<size_t>(v)] = static_cast<int>(groups.size());
      groups.push_back(grp_[static_cast<size_t>(v)]);
    }
  std::vector<Edgelet> pairs;
  for (size_t c = 0; c < natChains_.size(); ++c) {
    if (static_cast<int>(c) > natRev_[c]) continue;  // one orientation per orbit
    const auto& chain = natChains_[c];
    Word t;
    for (int e : chain) t = t * twist(e);
    pairs.push_back({vmap[static_cast<size_t>(src(chain.front()))],
                     vmap[static_cast<size_t>(dst(chain.back()))], t});
  }
  return make(rank_, std::move(groups), std::move(pairs));
}

Sp FreeSplitting::subdivided(const std::vector<int>& counts) const {
  std::vector<SubgroupAutomaton> groups = grp_;
  std::vector<Edgelet> pairs;
  for (int e = 0; e < ne2(); e += 2) {
    int k = counts[static_cast<size_t>(e / 2)];
    if (k <= 1) {
      pairs.push_back(ed_[static_cast<size_t>(e)]);
      continue;
    }
    int cur = src(e);
    for (int j = 0; j < k; ++j) {
      int nxt = dst(e);
      if (j + 1 < k) {
        nxt = static_cast<int>(groups.size());
        groups.push_back(SubgroupAutomaton(rank_));
      }
      pairs.push_back({cur, nxt, j + 1 == k ? twist(e) : Word{}});
      cur = nxt;
    }
  }
  return make(rank_, std::move(groups), std::move(pairs));
}

std::string FreeSplitting::dot() const {
  std::ostringstream os;
  os << "graph S {\n";
  for (int v = 0; v < nv(); ++v)
    os << "  v" << v << " [label=\"" << v << ":r" << grp_[static_cast<size_t>(v)].rank()
       << "\"];\n";
  for (int e = 0; e < ne2(); e += 2)
    os << "  v" << src(e) << " -- v" << dst(e) << " [label=\"" << twist(e).str() << "\"];\n";
  os << "}\n";
  return os.str();
}

// ---------- path helpers ----------

bool path_ok(const FreeSplitting& S, const TreePath& p) {
  TreeVertex cur = p.start;
  for (const auto& s : p.steps) {
    if (S.step_start(s) != cur) return false;
    cur = S.step_end(s);
  }
  // reduced: no immediate backtrack
  for (size_t i = 0; i + 1 < p.steps.size(); ++i)
    if (S.step_rev(p.steps[i]) == p.steps[i + 1]) return false;
  return true;
}

TreePath tighten(const FreeSplitting& S, TreePath p) {
  std::vector<TreeStep> out;
  for (auto& s : p.steps) {
    if (!out.empty() && S.step_rev(out.back()) == s)
      out.pop_back();
    else
      out.push_back(s);
  }
  p.steps = std::move(out);
  return p;
}

TreePath translate(const FreeSplitting& S, const Word& g, const TreePath& p) {
  TreePath r;
  r.start = S.tv(p.start.v, g * p.start.loc);
  for (auto& s : p.steps) r.steps.push_back(TreeStep{s.e, g * s.g});
  return r;
}

TreePath concat(const FreeSplitting& S, const TreePath& a, const TreePath& b) {
  TreePath r = a;
  r.steps.insert(r.steps.end(), b.steps.begin(), b.steps.end());
  return tighten(S, r);
}

}  // namespace fsplit
