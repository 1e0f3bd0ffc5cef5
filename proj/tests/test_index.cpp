#include <doctest.h>

#include "polarcorr/errors.hpp"
#include "polarcorr/index.hpp"

using namespace polarcorr;

TEST_SUITE("index") {
  TEST_CASE("to_index follows the '+' = 1, first sign most significant convention") {
    CHECK(to_index(SignSequence::parse("--")) == 0);
    CHECK(to_index(SignSequence::parse("-+")) == 1);
    CHECK(to_index(SignSequence::parse("+-")) == 2);
    CHECK(to_index(SignSequence::parse("++")) == 3);
    CHECK(to_index(SignSequence::parse("")) == 0);
    CHECK(to_index(SignSequence::parse("+--")) == 4);
  }

  TEST_CASE("round trip is a bijection for every length up to 12") {
    for (int n = 0; n <= 12; ++n) {
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
        const SignSequence s = from_index(i, n);
        REQUIRE(s.size() == n);
        REQUIRE(to_index(s) == i);
        REQUIRE(SignSequence::parse(s.to_string()) == s);
      }
    }
  }

  TEST_CASE("sign access, prefixes and negation") {
    const SignSequence s = SignSequence::parse("+-+");
    CHECK(s.at(0) == Sign::Plus);
    CHECK(s.at(1) == Sign::Minus);
    CHECK(s.back() == Sign::Plus);
    CHECK(s.prefix(2).to_string() == "+-");
    CHECK(s.prefix(0).empty());
    CHECK(s.negated().to_string() == "-+-");
    CHECK(s.prefix(2).extended(Sign::Plus) == s);
    CHECK(sign_at(s.index(), 3, 1) == Sign::Plus);
    CHECK(sign_at(s.index(), 3, 2) == Sign::Minus);
    CHECK_THROWS_AS(s.at(3), DomainError);
  }

  TEST_CASE("common prefix length") {
    CHECK(common_prefix_len(SignSequence::parse("+-+"), SignSequence::parse("+--")) == 2);
    CHECK(common_prefix_len(SignSequence::parse("-+"), SignSequence::parse("++")) == 0);
    const SignSequence s = SignSequence::parse("-++-+");
    CHECK(common_prefix_len(s, s) == 5);
    CHECK_THROWS_AS(common_prefix_len(SignSequence::parse("-+"), SignSequence::parse("-+-")), LengthMismatchError);
  }

  TEST_CASE("common prefix is symmetric and equals n only on the diagonal") {
    const int n = 6;
    for (std::uint64_t a = 0; a < 64; ++a) {
      for (std::uint64_t b = 0; b < 64; ++b) {
        const int ab = common_prefix_len(from_index(a, n), from_index(b, n));
        REQUIRE(ab == common_prefix_len(from_index(b, n), from_index(a, n)));
        REQUIRE((ab == n) == (a == b));
        int expected = 0;
        while (expected < n && from_index(a, n).at(expected) == from_index(b, n).at(expected)) ++expected;
        REQUIRE(ab == expected);
      }
    }
  }

  TEST_CASE("rejects malformed input") {
    CHECK_THROWS_AS(SignSequence::parse("+x-"), DomainError);
    CHECK_THROWS_AS(SignSequence::parse(std::string(31, '+')), DomainError);
    CHECK_THROWS_AS(from_index(4, 2), DomainError);
    CHECK_NOTHROW(from_index((std::uint64_t{1} << 30) - 1, 30));
  }
}
