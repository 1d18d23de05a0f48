#include <gtest/gtest.h>

#include <cmath>

#include "opmachine/jordan.hpp"
#include "opmachine/random.hpp"

using namespace opm;
using namespace opm::jordan;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

namespace {

VectorXcd unit(Eigen::Index n, Eigen::Index i) { return VectorXcd::Unit(n, i); }

// Distance of x from the column span of an orthonormal basis.
double dist(const Eigen::MatrixXcd& B, const VectorXcd& x) {
  if (B.cols() == 0) return x.norm();
  return (x - B * (B.adjoint() * x)).norm();
}

}  // namespace

TEST(Jordan, DiagonalCase) {
  MatrixXd a = MatrixXd::Zero(3, 3);
  a.diagonal() << 2, 1, 0.5;
  const auto T = MatrixOperator::real(a);
  const auto dec = decompose(T);
  EXPECT_EQ(dec.Z.cols(), 1);
  EXPECT_EQ(dec.Y.cols(), 2);
  EXPECT_LT(dist(dec.Z, unit(3, 2)), 1e-12);
  EXPECT_LT(dist(dec.Y, unit(3, 1)), 1e-12);
  EXPECT_NEAR(dist(dec.Y, unit(3, 0)), 1.0, 1e-12);
  EXPECT_NEAR(dec.alpha, 0.5, 1e-12);
  EXPECT_EQ(classify(T, unit(3, 0), dec).cls, OrbitClass::Diverges);
  EXPECT_EQ(classify(T, unit(3, 1), dec).cls, OrbitClass::BoundedAway);
  EXPECT_EQ(classify(T, unit(3, 2), dec).cls, OrbitClass::Decays);
  EXPECT_EQ(orbit_oracle(T, unit(3, 0), 60).cls, OrbitClass::Diverges);
}

TEST(Jordan, UnitJordanBlock) {
  MatrixXd a(2, 2);
  a << 1, 1, 0, 1;
  const auto T = MatrixOperator::real(a);
  const auto dec = decompose(T);
  ASSERT_EQ(dec.clusters.size(), 1u);
  EXPECT_EQ(dec.clusters[0].multiplicity, 2u);
  ASSERT_EQ(dec.clusters[0].chains.size(), 1u);
  EXPECT_EQ(dec.clusters[0].chains[0].vectors.size(), 2u);
  EXPECT_EQ(dec.Z.cols(), 0);
  EXPECT_EQ(dec.Y.cols(), 1);
  EXPECT_LT(dist(dec.Y, unit(2, 0)), 1e-10);
  EXPECT_LT(dec.chain_residual, 1e-8);
  EXPECT_EQ(classify(T, unit(2, 1), dec).cls, OrbitClass::Diverges);
  EXPECT_EQ(classify(T, unit(2, 0), dec).cls, OrbitClass::BoundedAway);
  EXPECT_EQ(orbit_oracle(T, unit(2, 1), 400).cls, OrbitClass::Diverges);
  EXPECT_EQ(orbit_oracle(T, unit(2, 0), 400).cls, OrbitClass::BoundedAway);
}

TEST(Jordan, NilpotentIsAllZ) {
  MatrixXd a = MatrixXd::Zero(4, 4);
  a(0, 1) = 1;
  a(1, 2) = 1;
  a(2, 3) = 1;
  const auto dec = decompose(MatrixOperator::real(a));
  EXPECT_EQ(dec.Z.cols(), 4);
  EXPECT_EQ(dec.Y.cols(), 4);
}

TEST(Jordan, TransientGrowthStillDecays) {
  MatrixXd a(2, 2);
  a << 0.5, 100, 0, 0.5;
  const auto T = MatrixOperator::real(a);
  const auto dec = decompose(T);
  EXPECT_EQ(classify(T, unit(2, 1), dec).cls, OrbitClass::Decays);
  const auto emp = orbit_oracle(T, unit(2, 1), 400);
  EXPECT_EQ(emp.cls, OrbitClass::Decays);
  EXPECT_GT(emp.max_log_ratio, std::log(10.0));
}

TEST(Jordan, RotationIsBounded) {
  const double th = 0.9;
  MatrixXd a(2, 2);
  a << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const auto T = MatrixOperator::real(a);
  const auto dec = decompose(T);
  const VectorXcd x = VectorXcd::Ones(2);
  EXPECT_EQ(classify(T, x, dec).cls, OrbitClass::BoundedAway);
  EXPECT_EQ(orbit_oracle(T, x, 200).cls, OrbitClass::BoundedAway);
}

TEST(Jordan, NearCircleIsIllConditioned) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a.diagonal() << 1.0000001, 0.5;
  EXPECT_THROW(decompose(MatrixOperator::real(a)), IllConditioned);
}

TEST(Jordan, InputValidation) {
  EXPECT_THROW(MatrixOperator(Eigen::MatrixXcd(2, 3)), Error);
  EXPECT_THROW(MatrixOperator(Eigen::MatrixXcd::Zero(65, 65)), Error);
  MatrixXd a = MatrixXd::Identity(2, 2);
  a(0, 0) = NAN;
  EXPECT_THROW(MatrixOperator::real(a), Error);
  const auto T = MatrixOperator::real(MatrixXd::Identity(2, 2));
  EXPECT_THROW(orbit_oracle(T, unit(2, 0), 10), Error);
  EXPECT_THROW(classify(T, VectorXcd::Zero(2), decompose(T)), Error);
}

// Property: Y contains Z, both are invariant, and alpha < 1, on random
// similarity transforms of spectra kept away from the unit circle.
TEST(Jordan, PropertyInvariantSubspaces) {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const auto N = static_cast<Eigen::Index>(2 + rng.below(6));
    MatrixXd D = MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const int kind = static_cast<int>(rng.below(3));
      const double sign = rng.below(2) ? 1.0 : -1.0;
      D(i, i) = sign * (kind == 0 ? rng.uniform(0.05, 0.7) : kind == 1 ? 1.0 : rng.uniform(1.4, 2.5));
    }
    MatrixXd P = MatrixXd::Identity(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < N; ++j) P(i, j) += 0.3 * rng.normal() / std::sqrt(static_cast<double>(N));
    }
    const auto T = MatrixOperator::real(P * D * P.inverse());
    const auto dec = decompose(T);
    EXPECT_LT(dec.invariance_residual_Y, 1e-8);
    EXPECT_LT(dec.invariance_residual_Z, 1e-8);
    EXPECT_LT(dec.alpha, 1.0);
    for (Eigen::Index c = 0; c < dec.Z.cols(); ++c) EXPECT_LT(dist(dec.Y, dec.Z.col(c)), 1e-8);
  }
}
