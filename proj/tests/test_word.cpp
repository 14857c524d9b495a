#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsplit/word.hpp"

using namespace fsplit;

TEST_CASE("free reduction") {
  CHECK(Word::parse("aA").empty());
  CHECK(Word::parse("aAb") == Word::parse("b"));
  CHECK(Word::parse("abBa") == Word::parse("aa"));
  CHECK(Word::parse("1").empty());
}

TEST_CASE("product and inverse") {
  Word u = Word::parse("ab"), v = Word::parse("Ba");
  CHECK(u * v == Word::parse("aa"));
  CHECK((u * u.inverse()).empty());
  CHECK(u.inverse() == Word::parse("BA"));
  CHECK(u.conjugate(Word::parse("c")) == Word::parse("cabC"));
}

TEST_CASE("shortlex") {
  CHECK(shortlex_less(Word::parse("a"), Word::parse("A")));
  CHECK(shortlex_less(Word::parse("A"), Word::parse("b")));
  CHECK(shortlex_less(Word::parse("b"), Word::parse("aa")));
  CHECK(!shortlex_less(Word::parse("aa"), Word::parse("aa")));
}

TEST_CASE("serialization round trip") {
  for (const char* s : {"ab", "aBc", "A", "1"}) {
    Word w = Word::parse(s);
    CHECK(Word::parse(w.str()) == w);
  }
}
