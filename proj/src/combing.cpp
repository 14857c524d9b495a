#include "fsplit/combing.hpp"

#include <stdexcept>

namespace fsplit {

EqMap FoldableSequence::composite(int i, int j) const {
  EqMap f = identity_map(splittings[static_cast<size_t>(i)]);
  for (int k = i; k < j; ++k) f = compose(f, maps[static_cast<size_t>(k)]);
  return f;
}

FoldableSequence FoldableSequence::sub(int i, int j) const {
  FoldableSequence s;
  for (int k = i; k <= j; ++k) s.splittings.push_back(splittings[static_cast<size_t>(k)]);
  for (int k = i; k < j; ++k) s.maps.push_back(maps[static_cast<size_t>(k)]);
  return s;
}

FoldableSequence as_foldable(const FoldSequence& seq) {
  FoldableSequence s;
  s.splittings = seq.splittings;
  s.maps = seq.folds;
  return s;
}

std::vector<std::string> validate_foldable_sequence(const FoldableSequence& seq) {
  std::vector<std::string> bad;
  int K = seq.length();
  for (int i = 0; i <= K; ++i)
    if (!seq.splittings[static_cast<size_t>(i)]->validate().empty())
      bad.push_back("SPLITTING: column " + std::to_string(i));
  for (int i = 0; i < K; ++i)
    if (!validate_map(seq.maps[static_cast<size_t>(i)]).empty())
      bad.push_back("MAP: " + std::to_string(i + 1));
  // foldability of f^i_K implies it for every f^i_j (gates refine)
  for (int i = 0; i < K && bad.empty(); ++i)
    if (!is_foldable(seq.composite(i, K)).ok)
      bad.push_back("FOLDABLE: composite " + std::to_string(i) + ".." + std::to_string(K));
  return bad;
}

CombingRectangle CombingRectangle::sub(int i, int j) const {
  CombingRectangle r;
  r.upper = upper.sub(i, j);
  r.lower = lower.sub(i, j);
  for (int k = i; k <= j; ++k) {
    r.collapses.push_back(collapses[static_cast<size_t>(k)]);
    r.sigma.push_back(sigma[static_cast<size_t>(k)]);
  }
  return r;
}

std::vector<std::string> validate_rectangle(const CombingRectangle& R) {
  std::vector<std::string> bad;
  int K = R.length();
  if (R.lower.length() != K || static_cast<int>(R.collapses.size()) != K + 1 ||
      static_cast<int>(R.sigma.size()) != K + 1) {
    bad.push_back("SHAPE: row lengths");
    return bad;
  }
  auto bu = validate_foldable_sequence(R.upper);
  for (auto& b : bu) bad.push_back("UPPER " + b);
  auto bl = validate_foldable_sequence(R.lower);
  for (auto& b : bl) bad.push_back("LOWER " + b);
  for (int i = 0; i <= K; ++i) {
    const EqMap& pi = R.collapses[static_cast<size_t>(i)];
    if (!validate_map(pi).empty()) {
      bad.push_back("COLLAPSE: column " + std::to_string(i));
      continue;
    }
    auto c = is_collapse(pi);
    if (!c) {
      bad.push_back("COLLAPSE: column " + std::to_string(i) + " not a collapse map");
      continue;
    }
    if (!(*c == R.sigma[static_cast<size_t>(i)]))
      bad.push_back("SIGMA: column " + std::to_string(i));
  }
  for (int i = 1; i <= K && bad.empty(); ++i) {
    // sigma_{i-1} = f_i^{-1}(sigma_i)
    auto pre = preimage(R.upper.maps[static_cast<size_t>(i - 1)], R.sigma[static_cast<size_t>(i)]);
    if (!(pre == R.sigma[static_cast<size_t>(i - 1)]))
      bad.push_back("PREIMAGE: column " + std::to_string(i));
    // square commutes
    EqMap a = compose(R.upper.maps[static_cast<size_t>(i - 1)], R.collapses[static_cast<size_t>(i)]);
    EqMap b = compose(R.collapses[static_cast<size_t>(i - 1)], R.lower.maps[static_cast<size_t>(i - 1)]);
    if (!maps_equal(a, b)) bad.push_back("SQUARE: column " + std::to_string(i));
  }
  return bad;
}

EqMap induced_on_collapse(const EqMap& piDom, const EqMap& f, const EqMap& piCod) {
  const FreeSplitting& T = *piDom.cod;
  EqMap g;
  g.dom = piDom.cod;
  g.cod = piCod.cod;
  g.vbase.assign(static_cast<size_t>(T.nv()), -1);
  g.vwit.assign(static_cast<size_t>(T.nv()), Word{});
  g.eimg.assign(static_cast<size_t>(T.ne2()), std::nullopt);
  const FreeSplitting& S = *piDom.dom;
  for (int v = 0; v < S.nv(); ++v) {
    int z = piDom.vbase[static_cast<size_t>(v)];
    if (g.vbase[static_cast<size_t>(z)] != -1) continue;
    // g(z-lift) = piDom.vwit[v]^-1 * piCod(f(v-lift))
    int fv = f.vbase[static_cast<size_t>(v)];
    g.vbase[static_cast<size_t>(z)] = piCod.vbase[static_cast<size_t>(fv)];
    g.vwit[static_cast<size_t>(z)] = piDom.vwit[static_cast<size_t>(v)].inverse() *
                                     f.vwit[static_cast<size_t>(v)] *
                                     piCod.vwit[static_cast<size_t>(fv)];
  }
  for (int e = 0; e < S.ne2(); ++e) {
    const auto& pe = piDom.eimg[static_cast<size_t>(e)];
    if (!pe) continue;
    if (g.eimg[static_cast<size_t>(pe->e)]) continue;
    const auto& fe = f.eimg[static_cast<size_t>(e)];
    if (!fe) {
      // f collapses it: the induced image is the vertex image; leave the
      // edgelet collapsed only if piCod also collapses the image
      g.eimg[static_cast<size_t>(pe->e)] = std::nullopt;
      continue;
    }
    const auto& ce = piCod.eimg[static_cast<size_t>(fe->e)];
    if (!ce) {
      g.eimg[static_cast<size_t>(pe->e)] = std::nullopt;
      continue;
    }
    g.eimg[static_cast<size_t>(pe->e)] =
        TreeStep{ce->e, pe->g.inverse() * fe->g * ce->g};
  }
  if (!validate_map(g).empty()) throw std::logic_error("induced_on_collapse: invalid result");
  if (!maps_equal(compose(piDom, g), compose(f, piCod)))
    throw std::logic_error("induced_on_collapse: square does not commute");
  return g;
}

CombingRectangle comb_by_collapse(const FoldableSequence& seq, const InvariantSubgraph& sigmaK) {
  if (sigmaK.full()) throw std::invalid_argument("PROPERNESS");
  int K = seq.length();
  CombingRectangle R;
  R.upper = seq;
  R.sigma.assign(static_cast<size_t>(K) + 1, InvariantSubgraph{});
  R.sigma[static_cast<size_t>(K)] = sigmaK;
  for (int i = K; i-- > 0;)
    R.sigma[static_cast<size_t>(i)] =
        preimage(seq.maps[static_cast<size_t>(i)], R.sigma[static_cast<size_t>(i + 1)]);
  R.collapses.resize(static_cast<size_t>(K) + 1);
  R.lower.splittings.resize(static_cast<size_t>(K) + 1);
  for (int i = 0; i <= K; ++i) {
    CollapseResult c = collapse(seq.splittings[static_cast<size_t>(i)],
                                R.sigma[static_cast<size_t>(i)]);
    R.collapses[static_cast<size_t>(i)] = c.map;
    R.lower.splittings[static_cast<size_t>(i)] = c.to;
  }
  for (int i = 1; i <= K; ++i)
    R.lower.maps.push_back(induced_on_collapse(R.collapses[static_cast<size_t>(i - 1)],
                                               seq.maps[static_cast<size_t>(i - 1)],
                                               R.collapses[static_cast<size_t>(i)]));
  return R;
}

namespace {
bool same_presentation(const FreeSplitting& a, const FreeSplitting& b) {
  if (a.nv() != b.nv() || a.ne2() != b.ne2() || a.rank() != b.rank()) return false;
  for (int e = 0; e < a.ne2(); ++e)
    if (a.src(e) != b.src(e) || a.dst(e) != b.dst(e) || !(a.twist(e) == b.twist(e))) return false;
  for (int v = 0; v < a.nv(); ++v)
    if (!a.group(v).equals(b.group(v))) return false;
  return true;
}
}  // namespace

CombingRectangle compose_rectangles(const CombingRectangle& upper, const CombingRectangle& lower) {
  if (upper.length() != lower.length()) throw std::invalid_argument("ROW-MISMATCH");
  for (int i = 0; i <= upper.length(); ++i) {
    const auto &a = upper.lower.splittings[static_cast<size_t>(i)],
               &b = lower.upper.splittings[static_cast<size_t>(i)];
    if (a.get() != b.get() && !same_presentation(*a, *b))
      throw std::invalid_argument("ROW-MISMATCH");
  }
  CombingRectangle R;
  R.upper = upper.upper;
  R.lower = lower.lower;
  for (int i = 0; i <= upper.length(); ++i) {
    EqMap pi = upper.collapses[static_cast<size_t>(i)];
    pi.cod = lower.upper.splittings[static_cast<size_t>(i)];  // align shared row
    EqMap comp = compose(pi, lower.collapses[static_cast<size_t>(i)]);
    R.collapses.push_back(comp);
    auto c = is_collapse(R.collapses.back());
    if (!c) throw std::logic_error("compose_rectangles: composite not a collapse");
    R.sigma.push_back(*c);
    // collapsed graph formula: sigma_upper united with preimage of sigma_lower
    auto expect = upper.sigma[static_cast<size_t>(i)].united(
        preimage(upper.collapses[static_cast<size_t>(i)], lower.sigma[static_cast<size_t>(i)]));
    if (!(expect == *c)) throw std::logic_error("compose_rectangles: collapsed-graph formula");
  }
  return R;
}

std::pair<CombingRectangle, CombingRectangle> decompose_rectangle(
    const CombingRectangle& R, const std::vector<InvariantSubgraph>& sigmaPrime) {
  int K = R.length();
  // containment and invariance checks
  for (int i = 0; i <= K; ++i) {
    auto inter = sigmaPrime[static_cast<size_t>(i)].intersect(R.sigma[static_cast<size_t>(i)]);
    if (!(inter == sigmaPrime[static_cast<size_t>(i)]))
      throw std::invalid_argument("INVARIANCE");
  }
  for (int i = 1; i <= K; ++i) {
    auto pre = preimage(R.upper.maps[static_cast<size_t>(i - 1)], sigmaPrime[static_cast<size_t>(i)]);
    if (!(pre == sigmaPrime[static_cast<size_t>(i - 1)])) throw std::invalid_argument("INVARIANCE");
  }
  CombingRectangle top = comb_by_collapse(R.upper, sigmaPrime[static_cast<size_t>(K)]);
  // bottom rectangle: collapse tau_i = image of sigma_i in the middle row;
  // its lower row reproduces R.lower up to column conjugacies
  CombingRectangle bot;
  bot.upper = top.lower;
  for (int i = 0; i <= K; ++i) {
    auto tau = image_subgraph(top.collapses[static_cast<size_t>(i)], R.sigma[static_cast<size_t>(i)]);
    CollapseResult c = collapse(top.lower.splittings[static_cast<size_t>(i)], tau);
    bot.collapses.push_back(c.map);
    bot.sigma.push_back(tau);
    bot.lower.splittings.push_back(c.to);
  }
  for (int i = 1; i <= K; ++i)
    bot.lower.maps.push_back(induced_on_collapse(bot.collapses[static_cast<size_t>(i - 1)],
                                                 bot.upper.maps[static_cast<size_t>(i - 1)],
                                                 bot.collapses[static_cast<size_t>(i)]));
  return {top, bot};
}

CombingRectangle improper_rectangle(const FoldableSequence& seq) {
  CombingRectangle R;
  R.upper = seq;
  R.lower = seq;
  for (int i = 0; i <= seq.length(); ++i) {
    R.collapses.push_back(identity_map(seq.splittings[static_cast<size_t>(i)]));
    R.sigma.push_back(InvariantSubgraph::none(seq.splittings[static_cast<size_t>(i)]->npairs()));
  }
  return R;
}

}  // namespace fsplit
