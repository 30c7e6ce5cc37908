#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairscreen/rational.hpp"
#include "fairscreen/rng.hpp"

using fairscreen::Rational;

TEST_CASE("construction normalizes sign and gcd") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-2, -4) == Rational(1, 2));
  CHECK(Rational(2, -4) == Rational(-1, 2));
  CHECK(Rational(0, 5) == Rational(0));
  CHECK(Rational(49, 64).numerator() == 49);
  CHECK(Rational(49, 64).denominator() == 64);
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("arithmetic") {
  CHECK(Rational(1, 4) + Rational(1, 6) == Rational(5, 12));
  CHECK(Rational(1, 2) - Rational(3, 4) == Rational(-1, 4));
  CHECK(Rational(3, 4) * Rational(2, 3) == Rational(1, 2));
  CHECK(Rational(3, 4) / Rational(3, 2) == Rational(1, 2));
  CHECK(Rational(7, 8) > Rational(11, 16));
  CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
}

TEST_CASE("parsing") {
  CHECK(Rational::parse("3/4") == Rational(3, 4));
  CHECK(Rational::parse("-3/4") == Rational(-3, 4));
  CHECK(Rational::parse("0.765625") == Rational(49, 64));
  CHECK(Rational::parse("-0.5") == Rational(-1, 2));
  CHECK(Rational::parse("2") == Rational(2));
  CHECK(Rational::parse("0.99") == Rational(99, 100));
  CHECK(Rational::parse("1e-3") == Rational(1, 1000));
  CHECK(Rational::parse("2.5e2") == Rational(250));
  CHECK_THROWS(Rational::parse(""));
  CHECK_THROWS(Rational::parse("1/x"));
  CHECK_THROWS(Rational::parse("0.12a"));
}

TEST_CASE("string round-trip is canonical") {
  CHECK(Rational(49, 64).str() == "49/64");
  CHECK(Rational(-3, 1).str() == "-3");
  CHECK(Rational::parse(Rational(7, 8).str()) == Rational(7, 8));
}

TEST_CASE("overflow throws instead of wrapping") {
  Rational big(INT64_MAX / 2, 1);
  CHECK_THROWS_AS(big * Rational(3), std::overflow_error);
}

TEST_CASE("field axioms on random small fractions") {
  fairscreen::Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    Rational a(rng.uniform_int(-40, 40), rng.uniform_int(1, 24));
    Rational b(rng.uniform_int(-40, 40), rng.uniform_int(1, 24));
    Rational c(rng.uniform_int(-40, 40), rng.uniform_int(1, 24));
    CHECK(a + b == b + a);
    CHECK((a + b) + c == a + (b + c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK((a + b) - b == a);
    if (b != Rational(0)) CHECK((a / b) * b == a);
  }
}
