#include <gtest/gtest.h>

#include "opmachine/carousel.hpp"
#include "opmachine/random.hpp"
#include "unit/oracles.hpp"

using namespace opm;
using namespace opm::carousel;

namespace {

std::vector<Rational> ints(std::initializer_list<int> v) {
  std::vector<Rational> out;
  for (int x : v) out.emplace_back(x);
  return out;
}

CarouselParams p8() { return CarouselParams::make(BigInt(8), BigInt(2), Rational(1), NormKind::Inf); }

}  // namespace

TEST(Carousel, ParamsValidation) {
  EXPECT_THROW(CarouselParams::make(BigInt(7), BigInt(2), Rational(1), NormKind::Two), Error);
  EXPECT_THROW(CarouselParams::make(BigInt(8), BigInt(0), Rational(1), NormKind::Two), Error);
  EXPECT_THROW(CarouselParams::make(BigInt(8), BigInt(2), Rational(0), NormKind::Two), Error);
  EXPECT_NO_THROW(CarouselParams::make(BigInt(8), BigInt(2), Rational(1), NormKind::Two));
}

TEST(Carousel, FeedVector) {
  EXPECT_EQ(feed_vector(p8(), Rational(1)).dense_values(), ints({1, 1, -1, -1, 0, 0, 0, 0}));
  EXPECT_EQ(feed_vector(p8(), Rational(0)).support_size(), 0u);
  const auto q = CarouselParams::make(BigInt(4), BigInt(1), Rational(1), NormKind::Two);
  EXPECT_EQ(feed_vector(q, Rational(2)).dense_values(), ints({2, -2, 0, 0}));
}

TEST(Carousel, ShiftApply) {
  const std::vector<int> v{1, 2, 3, 4};
  EXPECT_EQ(shift_apply<int>(v), (std::vector<int>{4, 1, 2, 3}));
  const std::vector<int> z(5, 0);
  EXPECT_EQ(shift_apply<int>(z), z);
  std::vector<int> w{3, -1, 4, 1, -5, 9};
  std::vector<int> cur = w;
  for (std::size_t i = 0; i < w.size(); ++i) cur = shift_apply<int>(cur);
  EXPECT_EQ(cur, w);
}

TEST(Carousel, StepExamples) {
  const auto s1 = feed_vector(p8(), Rational(1));
  EXPECT_EQ(step(s1).dense_values(), ints({1, 2, 0, -2, -1, 0, 0, 0}));
  auto z = state_at(p8(), Rational(0), BigInt(3));
  EXPECT_EQ(step(z).support_size(), 0u);
  const auto last = state_at(p8(), Rational(1), BigInt(7));
  EXPECT_EQ(step(last).support_size(), 0u);
}

TEST(Carousel, StateAtExamples) {
  const auto s = state_at(p8(), Rational(1), BigInt(4));
  EXPECT_EQ(s.dense_values(), ints({1, 2, 1, 0, -1, -2, -1, 0}));
  EXPECT_EQ(profile_norm(s, NormKind::Inf).pth_power, 2);
  EXPECT_EQ(profile_norm(s, NormKind::One).pth_power, 8);
  EXPECT_EQ(profile_norm(state_at(p8(), Rational(1), BigInt(8)), NormKind::Two).pth_power, 0);
  EXPECT_EQ(state_at(p8(), Rational(3, 2), BigInt(1)).dense_values(),
            feed_vector(p8(), Rational(3, 2)).dense_values());
}

TEST(Carousel, ConstantL) {
  EXPECT_EQ(estimate_constant_L(NormKind::One).pth_power, 8);
  EXPECT_EQ(estimate_constant_L(NormKind::Inf).pth_power, 1);
  EXPECT_EQ(estimate_constant_L(NormKind::Two).pth_power, Rational(32, 3));
  EXPECT_NEAR(estimate_constant_L(NormKind::Two).value(), std::sqrt(32.0 / 3.0), 1e-15);
}

TEST(Carousel, VerifyEstimatesExamples) {
  const auto inf = verify_estimates(p8(), Rational(1));
  EXPECT_TRUE(inf.all_satisfied());
  bool found = false;
  for (const auto& r : inf.records) {
    if (r.t == 4 && r.kind == BoundKind::Lower) {
      found = true;
      EXPECT_EQ(r.norm.pth_power, 2);
      EXPECT_EQ(r.bound_pth, 2);
    }
  }
  EXPECT_TRUE(found);
  const auto one = verify_estimates(CarouselParams::make(BigInt(8), BigInt(2), Rational(1), NormKind::One), Rational(1));
  for (const auto& r : one.records) {
    if (r.t != 4) continue;
    if (r.kind == BoundKind::Lower) EXPECT_EQ(r.bound_pth, 4);
    if (r.kind == BoundKind::Uniform) EXPECT_EQ(r.bound_pth, 32);
    EXPECT_EQ(r.norm.pth_power, 8);
  }
}

// Property: closed form equals the dense stepper, the support is at most 4m,
// the total mass is zero and the state vanishes at multiples of T.
TEST(Carousel, PropertyClosedFormMatchesStepper) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.below(6));
    const std::int64_t T = 4 * m + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(5 * m)));
    const Rational a(static_cast<std::int64_t>(rng.below(11)) - 5, 1 + static_cast<std::int64_t>(rng.below(4)));
    const Rational eps(1 + static_cast<std::int64_t>(rng.below(3)), 1 + static_cast<std::int64_t>(rng.below(3)));
    const auto params = CarouselParams::make(BigInt(T), BigInt(m), eps, NormKind::Two);
    oracle::CarouselStepper ref(T, m);
    for (std::int64_t t = 1; t <= 3 * T; ++t) {
      ref.step();
      const auto s = state_at(params, a, BigInt(t));
      ASSERT_LE(s.support_size(), static_cast<std::size_t>(4 * m));
      Rational mass = 0;
      const auto dense = s.dense_values();
      for (std::int64_t i = 0; i < T; ++i) {
        ASSERT_EQ(dense[static_cast<std::size_t>(i)], eps * a * ref.pattern()[static_cast<std::size_t>(i)]);
        mass += dense[static_cast<std::size_t>(i)];
      }
      ASSERT_EQ(mass, 0);
      if (t % T == 0) ASSERT_EQ(s.support_size(), 0u);
    }
  }
}

TEST(Carousel, PropertyBumpPowerSumMatchesDense) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.below(9));
    const std::int64_t T = 4 * m + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(4 * m + 1)));
    const std::int64_t t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * T)));
    const auto c = oracle::carousel_pattern(T, m, t);
    for (NormKind p : {NormKind::One, NormKind::Two, NormKind::Inf}) {
      ASSERT_EQ(bump_power_sum(BigInt(T), BigInt(m), BigInt(t), p), oracle::power_sum(c, p));
    }
  }
}

TEST(Carousel, HugeTimesStayCheap) {
  const BigInt T = pow_int(BigInt(5), 200);
  const BigInt m = T / 5 - 7;
  EXPECT_EQ(bump_power_sum(T, m, T * 7, NormKind::Two), 0);
  // Inside the window the lower estimate holds: sum c^2 >= 2 m^3 / 3.
  EXPECT_GE(3 * bump_power_sum(T, m, m + 11, NormKind::Two), 2 * m * m * m);
  EXPECT_EQ(bump_power_sum(T, m, T / 2, NormKind::Inf), m);
}
