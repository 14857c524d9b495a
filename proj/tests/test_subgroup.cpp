#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "fsplit/subgroup.hpp"

using namespace fsplit;

namespace {

// brute-force oracle: all products of gens^{+-1} of length <= depth
std::set<std::string> ball(const std::vector<Word>& gens, int depth) {
  std::set<std::string> seen{Word{}.str()};
  std::vector<Word> frontier{Word{}};
  for (int d = 0; d < depth; ++d) {
    std::vector<Word> next;
    for (const Word& w : frontier)
      for (const Word& g : gens)
        for (const Word& s : {w * g, w * g.inverse()})
          if (seen.insert(s.str()).second) next.push_back(s);
    frontier = std::move(next);
  }
  return seen;
}

}  // namespace

TEST_CASE("whole group automaton") {
  auto A = SubgroupAutomaton::from_generators(2, {Word::parse("a"), Word::parse("b")});
  CHECK(A.rank() == 2);
  CHECK(A.num_states() == 1);
  CHECK(A.member(Word::parse("abAB")));
}

TEST_CASE("cyclic subgroup") {
  auto A = SubgroupAutomaton::from_generators(2, {Word::parse("abA")});
  CHECK(A.rank() == 1);
  CHECK(A.member(Word::parse("abbA")));
  CHECK(!A.member(Word::parse("b")));
}

TEST_CASE("membership against enumeration oracle") {
  std::vector<Word> gens{Word::parse("aa"), Word::parse("b")};
  auto A = SubgroupAutomaton::from_generators(2, gens);
  CHECK(A.rank() == 2);
  CHECK(!A.member(Word::parse("a")));
  auto in = ball(gens, 6);
  // every enumerated member accepted
  for (const auto& s : in) CHECK(A.member(Word::parse(s)));
  // short words not in the ball of ample depth are non-members
  std::vector<Word> all;
  for (const char* s : {"a", "ab", "ba", "aab", "A", "aba"}) {
    Word w = Word::parse(s);
    CHECK(A.member(w) == (in.count(w.str()) > 0));
  }
}

TEST_CASE("coset representatives") {
  auto H = SubgroupAutomaton::from_generators(2, {Word::parse("a")});
  // a^3 b * <a>: shortlex-min element
  Word rep = H.coset_rep(Word::parse("aaab"));
  // oracle: enumerate coset elements aaab * a^k, k in [-6,6]
  Word best;
  bool first = true;
  for (int k = -6; k <= 6; ++k) {
    Word x = Word::parse("aaab");
    for (int i = 0; i < std::abs(k); ++i) x = x * (k > 0 ? Word::parse("a") : Word::parse("A"));
    if (first || shortlex_less(x, best)) {
      best = x;
      first = false;
    }
  }
  CHECK(rep == best);
  // member of H -> empty word
  CHECK(H.coset_rep(Word::parse("aaa")).empty());
  // idempotence
  CHECK(H.coset_rep(rep) == rep);
  // trivial subgroup: singleton cosets
  SubgroupAutomaton T(2);
  CHECK(T.coset_rep(Word::parse("bA")) == Word::parse("bA"));
}

TEST_CASE("coset reps biject with cosets up to length 5") {
  std::vector<Word> gens{Word::parse("aa"), Word::parse("b")};
  auto H = SubgroupAutomaton::from_generators(2, gens);
  // two words get the same rep iff they lie in the same left coset;
  // sample all reduced words of length <= 5 in rank 2
  std::vector<Word> words{Word{}};
  for (size_t i = 0; i < words.size(); ++i) {
    if (words[i].size() >= 5) continue;
    for (int l : {1, -1, 2, -2}) {
      Word w = words[i].push(l);
      if (w.size() > words[i].size()) words.push_back(w);
    }
  }
  for (size_t i = 0; i < words.size(); i += 7)
    for (size_t j = 0; j < words.size(); j += 11) {
      bool same_coset = H.member(words[i].inverse() * words[j]);
      bool same_rep = H.coset_rep(words[i]) == H.coset_rep(words[j]);
      CHECK(same_coset == same_rep);
    }
}

TEST_CASE("free basis") {
  auto H = SubgroupAutomaton::from_generators(2, {Word::parse("aa"), Word::parse("b"), Word::parse("aba")});
  auto basis = H.free_basis();
  CHECK(static_cast<int>(basis.size()) == H.rank());
  auto H2 = SubgroupAutomaton::from_generators(2, basis);
  CHECK(H.equals(H2));
}

TEST_CASE("intersection") {
  auto A = SubgroupAutomaton::from_generators(2, {Word::parse("a")});
  auto B = SubgroupAutomaton::from_generators(2, {Word::parse("aa"), Word::parse("b")});
  auto I = SubgroupAutomaton::intersection(A, B);
  CHECK(I.member(Word::parse("aa")));
  CHECK(!I.member(Word::parse("a")));
  CHECK(I.rank() == 1);
}

TEST_CASE("conjugator between subgroups") {
  auto A = SubgroupAutomaton::from_generators(2, {Word::parse("ab")});
  auto B = SubgroupAutomaton::from_generators(2, {Word::parse("ba")});
  auto c = SubgroupAutomaton::conjugator(A, B);
  REQUIRE(c.has_value());
  CHECK(A.equals(B.conjugated(*c)));
  auto C = SubgroupAutomaton::from_generators(2, {Word::parse("a")});
  CHECK(!SubgroupAutomaton::conjugator(A, C).has_value());
}

TEST_CASE("coset intersection") {
  auto A = SubgroupAutomaton::from_generators(2, {Word::parse("a")});
  auto B = SubgroupAutomaton::from_generators(2, {Word::parse("b")});
  // a^2 * <a>  and  a^2 * <b>: contains a^2
  auto w = SubgroupAutomaton::coset_intersection(Word::parse("aa"), A, Word::parse("aa"), B);
  REQUIRE(w.has_value());
  CHECK(A.member(Word::parse("aa").inverse() * *w));
  CHECK(B.member(Word::parse("aa").inverse() * *w));
  auto none = SubgroupAutomaton::coset_intersection(Word::parse("a"), B, Word::parse("b"), A);
  CHECK(!none.has_value());
}

TEST_CASE("expression in generators") {
  std::vector<Word> gens{Word::parse("aa"), Word::parse("b"), Word::parse("aba")};
  Word u = Word::parse("aabaa") * Word::parse("aba").inverse() * Word::parse("b");
  auto expr = express_in(2, gens, u);
  REQUIRE(expr.has_value());
  Word check;
  for (auto [i, s] : *expr) check = check * (s > 0 ? gens[i] : gens[i].inverse());
  CHECK(check == u);
  CHECK(!express_in(2, gens, Word::parse("a")).has_value());
}

TEST_CASE("inner witness") {
  // identity
  auto w0 = inner_witness(2, {Word::parse("a"), Word::parse("b")});
  REQUIRE(w0.has_value());
  CHECK(w0->empty());
  // conjugation by g = ab
  auto w1 = inner_witness(2, {Word::parse("a").conjugate(Word::parse("ab")),
                              Word::parse("b").conjugate(Word::parse("ab"))});
  REQUIRE(w1.has_value());
  CHECK(*w1 == Word::parse("ab"));
  // swap is not inner
  CHECK(!inner_witness(2, {Word::parse("b"), Word::parse("a")}).has_value());
  // longer conjugator
  Word g = Word::parse("bAAb");
  auto w2 = inner_witness(2, {Word::parse("a").conjugate(g), Word::parse("b").conjugate(g)});
  REQUIRE(w2.has_value());
  CHECK(*w2 == g);
}
