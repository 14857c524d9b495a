#include "fsplit/gen.hpp"

#include <algorithm>

namespace fsplit {

Word random_word(Rng& rng, int rank, int len) {
  std::vector<int> ls;
  std::uniform_int_distribution<int> d(1, 2 * rank);
  while (static_cast<int>(ls.size()) < len) {
    int r = d(rng);
    int letter = r <= rank ? r : -(r - rank);
    if (!ls.empty() && ls.back() == -letter) continue;
    ls.push_back(letter);
  }
  return Word(std::move(ls));
}

std::vector<Word> random_automorphism(Rng& rng, int rank, int moves) {
  std::vector<Word> img;
  for (int i = 1; i <= rank; ++i) img.push_back(Word::letter(i));
  std::uniform_int_distribution<int> pick(0, rank - 1), coin(0, 1);
  for (int m = 0; m < moves; ++m) {
    int i = pick(rng), j = pick(rng);
    if (i == j) {
      img[static_cast<size_t>(i)] = img[static_cast<size_t>(i)].inverse();
      continue;
    }
    // x_i -> x_i x_j^{+-1}
    Word t = coin(rng) ? img[static_cast<size_t>(j)] : img[static_cast<size_t>(j)].inverse();
    Word next = img[static_cast<size_t>(i)] * t;
    if (next.empty() || next.size() > 7) continue;  // keep words short
    img[static_cast<size_t>(i)] = next;
  }
  return img;
}

Sp marked_rose(int rank, const std::vector<Word>& twists) {
  std::vector<SubgroupAutomaton> groups{SubgroupAutomaton(rank)};
  std::vector<FreeSplitting::Edgelet> pairs;
  for (const Word& w : twists) pairs.push_back({0, 0, w});
  return FreeSplitting::make(rank, groups, pairs);
}

Sp random_splitting(Rng& rng, int rank, int ops) {
  Sp S = marked_rose(rank, random_automorphism(rng, rank, 3));
  std::uniform_int_distribution<int> op(0, 3);
  for (int k = 0; k < ops; ++k) {
    switch (op(rng)) {
      case 0: {  // subdivide a random pair
        std::vector<int> counts(static_cast<size_t>(S->npairs()), 1);
        std::uniform_int_distribution<int> pp(0, S->npairs() - 1);
        counts[static_cast<size_t>(pp(rng))] = 2;
        S = S->subdivided(counts);
        break;
      }
      case 1: {  // collapse a random proper natural subgraph
        if (S->natural_orbit_count() < 2) break;
        std::vector<int> chains;
        for (size_t c = 0; c < S->natural_chains().size(); ++c)
          if (static_cast<int>(c) <= S->natural_rev(static_cast<int>(c)))
            chains.push_back(static_cast<int>(c));
        std::uniform_int_distribution<int> pc(0, static_cast<int>(chains.size()) - 1);
        auto sigma = S->chain_support(chains[static_cast<size_t>(pc(rng))]);
        S = collapse(S, sigma).to;
        break;
      }
      case 2: {  // random legal fold
        std::vector<std::pair<int, int>> cands;
        for (int v = 0; v < S->nv(); ++v) {
          const auto& out = S->halfedges(v);
          for (size_t i = 0; i < out.size(); ++i)
            for (size_t j = 0; j < out.size(); ++j) {
              if (out[i] / 2 == out[j] / 2) continue;
              if (!S->natural(v)) continue;
              // directions must start natural edges
              int c1 = S->chain_of(out[i]), c2 = S->chain_of(out[j]);
              if (S->natural_chains()[static_cast<size_t>(c1)].front() != out[i]) continue;
              if (S->natural_chains()[static_cast<size_t>(c2)].front() != out[j]) continue;
              cands.push_back({out[i], out[j]});
            }
        }
        if (cands.empty()) break;
        std::uniform_int_distribution<int> pc(0, static_cast<int>(cands.size()) - 1);
        auto [e1, e2] = cands[static_cast<size_t>(pc(rng))];
        try {
          S = fold(S, FoldSpec{S->src(e1), e1, e2, Word{}, 1}).to;
        } catch (const std::exception&) {
        }
        break;
      }
      default:
        if (!vertex_group_system(*S).empty()) S = pd_expansion(S).to;
        break;
    }
  }
  return S;
}

EqMap random_foldable_map(Rng& rng, int rank) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    Sp S = random_splitting(rng, rank);
    Sp T = random_splitting(rng, rank);
    try {
      return make_foldable(S, T).map;
    } catch (const std::exception&) {
    }
  }
  // deterministic fallback: rose onto itself twisted by an automorphism
  Sp T = marked_rose(rank, random_automorphism(rng, rank, 5));
  return make_foldable(FreeSplitting::rose(rank), T).map;
}

FoldSequence random_fold_sequence(Rng& rng, int rank, int autoMoves) {
  for (int attempt = 0; attempt < 12; ++attempt) {
    Sp T = marked_rose(rank, random_automorphism(rng, rank, autoMoves));
    try {
      EqMap f = make_foldable(FreeSplitting::rose(rank), T).map;
      auto ff = fold_factorize(f);
      if (ff.seq.length() >= 1) return ff.seq;
    } catch (const std::exception&) {
    }
  }
  // guaranteed nontrivial instance
  Sp T = marked_rose(rank, [&] {
    std::vector<Word> ws{Word::parse("ab")};
    for (int i = 2; i <= rank; ++i) ws.push_back(Word::letter(i));
    return ws;
  }());
  return fold_factorize(make_foldable(FreeSplitting::rose(rank), T).map).seq;
}

}  // namespace fsplit
