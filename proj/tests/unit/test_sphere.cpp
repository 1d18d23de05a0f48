#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "opmachine/random.hpp"
#include "opmachine/sphere.hpp"

using namespace opm;
using namespace opm::sphere;

namespace {

UnitVector e(std::size_t d, std::size_t i) { return UnitVector::basis(d, i); }

UnitVector random_unit(Rng& rng, std::size_t d) {
  for (;;) {
    auto v = rng.normal_vector(d);
    double n = 0;
    for (double x : v) n += x * x;
    if (n > 1e-12) return UnitVector(v);
  }
}

}  // namespace

TEST(Sphere, UnitVectorValidation) {
  EXPECT_THROW(UnitVector({0.0, 0.0}), Error);
  EXPECT_THROW(UnitVector({NAN, 1.0}), Error);
  const UnitVector v({3.0, 4.0});
  EXPECT_NEAR(v[0], 0.6, 1e-15);
}

TEST(Sphere, RhoExamples) {
  EXPECT_NEAR(rho(e(2, 0), e(2, 0)), 0.0, 1e-12);
  EXPECT_EQ(rho(e(2, 0), e(2, 1)), 1.0);
  EXPECT_NEAR(rho(e(2, 0), UnitVector({1.0, 1.0})), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(rho(e(3, 1), e(3, 1).negated()), 0.0, 1e-12);
}

TEST(Sphere, RhoToSetExamples) {
  const auto E = SymmetricSet::pair(e(2, 0));
  EXPECT_NEAR(rho_to_set(e(2, 0), E), 0.0, 1e-12);
  EXPECT_EQ(rho_to_set(e(2, 1), E), 1.0);
  for (double th = 0.05; th < 3.1; th += 0.3) {
    EXPECT_NEAR(rho_to_set(UnitVector({std::cos(th), std::sin(th)}), E), std::abs(std::sin(th)), 1e-12);
  }
  const auto cap = SymmetricSet::cap(e(3, 2), 0.3);
  EXPECT_EQ(rho_to_set(UnitVector({0.1, 0.0, 1.0}), cap), 0.0);
  EXPECT_NEAR(rho_to_set(e(3, 0), cap), std::sin(std::asin(1.0) - std::asin(0.3)), 1e-12);
}

// Property: rho is symmetric, sign-invariant and obeys the triangle inequality.
TEST(Sphere, PropertyRhoIsPseudometric) {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t d = 2 + rng.below(4);
    const auto a = random_unit(rng, d), b = random_unit(rng, d), c = random_unit(rng, d);
    EXPECT_NEAR(rho(a, b), rho(b, a), 1e-15);
    EXPECT_NEAR(rho(a, b), rho(a.negated(), b), 1e-15);
    EXPECT_LE(rho(a, c), rho(a, b) + rho(b, c) + 1e-12);
  }
}

TEST(Sphere, PerpBasisExamples) {
  const auto b = perp_basis(e(3, 0));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(b[1], (std::vector<double>{0, 0, 1}));
  const auto c = perp_basis(UnitVector({1.0, 1.0, 0.0}));
  EXPECT_NEAR(c[0][2], 0.0, 1e-15);
  EXPECT_NEAR(dot(c[0], UnitVector({1.0, 1.0, 0.0}).coords()), 0.0, 1e-15);
  const double th = 0.7;
  const auto d2 = perp_basis(UnitVector({std::cos(th), std::sin(th)}));
  EXPECT_NEAR(std::abs(d2[0][0]), std::sin(th), 1e-15);
  EXPECT_NEAR(std::abs(d2[0][1]), std::cos(th), 1e-15);
}

TEST(Sphere, PropertyPerpBasisOrthonormal) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const std::size_t d = 2 + rng.below(5);
    const auto v = random_unit(rng, d);
    const auto b = perp_basis(v);
    ASSERT_EQ(b.size(), d - 1);
    for (std::size_t x = 0; x < b.size(); ++x) {
      EXPECT_NEAR(dot(b[x], v.coords()), 0.0, 1e-13);
      for (std::size_t y = 0; y < b.size(); ++y) EXPECT_NEAR(dot(b[x], b[y]), x == y ? 1.0 : 0.0, 1e-13);
    }
  }
}

TEST(Sphere, DeltaExamples) {
  const auto E = SymmetricSet::pair(e(2, 0));
  const UnitVector v({1.0, 1.0});
  for (double x : delta(v, E, v)) EXPECT_NEAR(x, 0.0, 1e-15);
  EXPECT_THROW(delta(e(2, 0), E, v), Error);
  // u in E gives norm >= 1; v in W_n gives norm <= 2^(n+1).
  Rng rng(8);
  const auto net = build_net(2, 3, E);
  for (const auto& w : net.points) {
    double sq = 0;
    for (double c : delta(w, E, e(2, 0))) sq += c * c;
    EXPECT_GE(std::sqrt(sq), 1.0 - 1e-12);
    const auto u = random_unit(rng, 2);
    sq = 0;
    for (double c : delta(w, E, u)) sq += c * c;
    EXPECT_LE(std::sqrt(sq), std::ldexp(1.0, 4) + 1e-12);
  }
}

TEST(Sphere, NetStageOne) {
  const auto E = SymmetricSet::pair(e(2, 0));
  const auto net = build_net(2, 1, E);
  ASSERT_FALSE(net.points.empty());
  for (const auto& p : net.points) EXPECT_GE(std::abs(p[1]), 0.25 - 1e-12);
  // Adjacent points are one cell apart: twice the covering radius 2^-(n+1).
  std::vector<double> angles;
  for (const auto& p : net.points) {
    double a = std::atan2(p[1], p[0]);
    if (a < 0) a += std::numbers::pi;
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  for (std::size_t i = 1; i < angles.size(); ++i) EXPECT_LE(std::sin(angles[i] - angles[i - 1]), 0.5 + 1e-12);
}

TEST(Sphere, PropertyNetCovers) {
  Rng rng(42);
  for (std::size_t d : {2u, 3u}) {
    const auto E = SymmetricSet::cap(e(d, 0), 0.3);
    for (int n = 1; n <= 4; ++n) {
      const auto net = build_net(d, n, E);
      const double r = std::ldexp(1.0, -n);
      int tested = 0;
      while (tested < 500) {
        const auto u = random_unit(rng, d);
        if (rho_to_set(u, E) < r) continue;
        ++tested;
        double best = 2.0;
        for (const auto& p : net.points) best = std::min(best, rho(u, p));
        ASSERT_LE(best, r) << "d=" << d << " n=" << n;
      }
    }
  }
}

TEST(Sphere, WholeSphereCapGivesEmptyNet) {
  const auto E = SymmetricSet::cap(e(2, 0), 1.0);
  EXPECT_TRUE(build_net(2, 2, E).points.empty());
  std::vector<Net> nets{build_net(2, 1, E)};
  EXPECT_THROW(enumerate_feeds(nets, 2), Error);
}

TEST(Sphere, FeedEnumerationExamples) {
  Net single{1, 0.5, {e(2, 1)}};
  std::vector<Net> nets{single};
  const auto f = enumerate_feeds(nets, 2);  // budget 2 * 2^1 = 4
  EXPECT_EQ(f.horizon(), 4u);
  for (std::uint64_t k = 1; k <= 4; ++k) EXPECT_EQ(f.feed(k), e(2, 1));
  EXPECT_EQ(f.boundary(1), 1u);
  EXPECT_EQ(f.boundary(2), 1u + 2 * 2);

  const auto E = SymmetricSet::pair(e(2, 0));
  const std::uint64_t K = default_K(2, 4);
  std::vector<Net> four;
  for (int n = 1; n <= 4; ++n) four.push_back(build_net(2, n, E));
  const auto g = enumerate_feeds(four, K);
  EXPECT_EQ(g.boundary(1), 1u);
  EXPECT_EQ(g.boundary(2), 1 + 2 * K);
  for (std::uint64_t k = 2; k <= g.horizon(); ++k) EXPECT_LE(g.stage_of(k - 1), g.stage_of(k));
  // w_k = v^n_{k+1-C_n} with cyclic repetition.
  for (int n = 1; n <= 4; ++n) {
    const auto& pts = four[static_cast<std::size_t>(n - 1)].points;
    for (std::uint64_t k = g.boundary(n); k < g.boundary(n + 1); ++k) {
      EXPECT_EQ(g.feed(k), pts[(k - g.boundary(n)) % pts.size()]);
    }
  }
  EXPECT_EQ(stage_map(K, 2, 4).size(), g.horizon());
}
