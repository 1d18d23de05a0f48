#include <gtest/gtest.h>

#include "opmachine/numeric.hpp"
#include "opmachine/random.hpp"

using namespace opm;

TEST(Numeric, ParseRational) {
  EXPECT_EQ(parse_rational("-3/4"), Rational(-3, 4));
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("abc"), Error);
}

TEST(Numeric, ExactRationalRoundTrips) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(2.0, rng.uniform(-40, 40));
    EXPECT_EQ(to_double(exact_rational(x)), x);
  }
  EXPECT_EQ(exact_rational(0.5), Rational(1, 2));
}

TEST(Numeric, Strings) {
  EXPECT_EQ(exact_string(Rational(-6, 4)), "-3/2");
  EXPECT_EQ(exact_string(Rational(5)), "5");
  EXPECT_EQ(decimal_string(Rational(1, 3), 5), "0.33333");
  // Far outside double range.
  const BigInt huge = pow_int(BigInt(10), 400);
  EXPECT_EQ(decimal_string(Rational(BigInt(1), huge), 3).substr(0, 3), "1e-");
}

TEST(Numeric, NormParsing) {
  EXPECT_EQ(parse_norm("1"), NormKind::One);
  EXPECT_EQ(parse_norm("2"), NormKind::Two);
  EXPECT_EQ(parse_norm("inf"), NormKind::Inf);
  EXPECT_THROW(parse_norm("3"), Error);
  EXPECT_EQ(to_string(NormKind::Inf), "inf");
}

TEST(Numeric, SquarefreeDecompose) {
  const auto r = squarefree_decompose(BigInt(72));
  EXPECT_EQ(r.factor, 6);
  EXPECT_EQ(r.squarefree, 2);
  EXPECT_TRUE(r.certain);
  // Property: factor^2 * squarefree reproduces the radicand.
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const BigInt n(static_cast<std::int64_t>(rng.below(1000000) + 1));
    const auto d = squarefree_decompose(n);
    EXPECT_EQ(d.factor * d.factor * d.squarefree, n);
  }
}

TEST(Numeric, SurdSumIsCanonical) {
  SurdSum a;
  a.add_root(Rational(1), squarefree_decompose(BigInt(8)));   // 2 sqrt 2
  a.add_root(Rational(-1), squarefree_decompose(BigInt(2)));  // - sqrt 2
  SurdSum b;
  b.add_root(Rational(1, 2), squarefree_decompose(BigInt(8)));  // sqrt 2
  EXPECT_EQ(a, b);
  a -= b;
  EXPECT_TRUE(a.is_zero());
  SurdSum c(Rational(3));
  c.add_root(Rational(1), squarefree_decompose(BigInt(9)));
  EXPECT_TRUE(c.is_rational());
  EXPECT_EQ(c.rational_part(), 6);
  EXPECT_NEAR(b.to_double(), std::sqrt(2.0), 1e-15);
}

TEST(Numeric, RngIsDeterministic) {
  Rng a(11), b(11);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
  Rng c(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
