#include <doctest.h>

#include "lenspec/errors.hpp"
#include "lenspec/word.hpp"

using lenspec::Word;

TEST_CASE("words parse and print in letter notation") {
  CHECK(Word::parse("aBa").str() == "aBa");
  CHECK_THROWS_AS(Word::parse("aBb"), lenspec::DataError);
  CHECK(Word::parse("").empty());
  CHECK_THROWS_AS(Word::parse("a1"), lenspec::DataError);
}

TEST_CASE("products freely reduce") {
  const Word w = Word::parse("ab");
  CHECK((w * w.inverse()).empty());
  CHECK((Word::parse("abA") * Word::parse("aB")).str() == "a");
  CHECK(Word::parse("ab").power(3).str() == "ababab");
  CHECK(Word::parse("ab").inverse().str() == "BA");
}

TEST_CASE("cyclic reduction and primitivity") {
  CHECK_FALSE(Word::parse("abA").is_cyclically_reduced());
  CHECK(Word::parse("abA").cyclically_reduced().str() == "b");
  CHECK(Word::parse("ab").is_primitive());
  CHECK_FALSE(Word::parse("abab").is_primitive());
  CHECK_FALSE(Word::parse("aa").is_primitive());
}

TEST_CASE("canonical representative over rotations and inversion") {
  CHECK(Word::parse("ba").canonical(false).str() == "ab");
  // a < A < b < B, so the inverse rotation "Ab" loses to "aB"
  CHECK(Word::parse("bA").canonical(true) == Word::parse("aB"));
  CHECK(Word::parse("BA").canonical(true) == Word::parse("ab"));
  CHECK(Word::parse("BA").canonical(false) == Word::parse("AB"));
}
