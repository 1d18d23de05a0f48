#pragma once

// Orbit trichotomy for a finite matrix T: split the space into generalized
// eigenspaces, collect Z (|lambda| < 1) and Y = Z + span of the Jordan chain
// heads with |lambda| = 1, then
//   x outside Y       -> ||T^n x|| -> infinity
//   x in Y, not in Z  -> bounded away from 0 and infinity
//   x in Z            -> ||T^n x|| -> 0

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opmachine/numeric.hpp"

namespace opm::jordan {

using Complex = std::complex<double>;

/// Raised for input on the discontinuity of the trichotomy: eigenvalues
/// within 1e-6 of the unit circle without lying on it, or vectors whose
/// membership in Y or Z is not resolved by the tolerances.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

struct Tolerances {
  double cluster = 1e-4;     // eigenvalues closer than this form one cluster
  double on_circle = 1e-9;   // ||lambda| - 1| <= on_circle counts as |lambda| = 1
  double band = 1e-6;        // on_circle < ||lambda| - 1| <= band is rejected
  double rank = 1e-8;        // relative singular-value cutoff for ranks
  double member = 1e-8;      // relative distance <= member means x in subspace
  double non_member = 1e-6;  // relative distance >= non_member means x outside
};

class MatrixOperator {
 public:
  explicit MatrixOperator(Eigen::MatrixXcd a);
  static MatrixOperator real(const Eigen::MatrixXd& a);

  const Eigen::MatrixXcd& matrix() const { return a_; }
  Eigen::Index size() const { return a_.rows(); }

 private:
  Eigen::MatrixXcd a_;
};

enum class Region { Inside, OnCircle, Outside };
const char* to_string(Region r);

/// T e_k = lambda e_k + e_{k-1}, e_0 = 0; vectors[0] is the head e_1.
struct JordanChain {
  Complex lambda;
  std::vector<Eigen::VectorXcd> vectors;
};

struct EigenCluster {
  Complex lambda;  // cluster mean
  std::size_t multiplicity = 0;
  Region region = Region::Inside;
  Eigen::MatrixXcd basis;  // orthonormal basis of the generalized eigenspace
  std::vector<JordanChain> chains;
};

struct TrichotomyDecomposition {
  Eigen::Index dim = 0;
  std::vector<EigenCluster> clusters;
  Eigen::MatrixXcd Z;  // orthonormal columns
  Eigen::MatrixXcd Y;  // orthonormal columns, contains Z
  /// Spectral radius of T restricted to Z (0 when Z = {0}).
  double alpha = 0.0;
  /// ||T B - B (B* T B)|| / max(1, ||T||) for B = Y and B = Z.
  double invariance_residual_Y = 0.0;
  double invariance_residual_Z = 0.0;
  /// Largest ||T e_k - lambda e_k - e_{k-1}|| / max(1, ||e_k||) over all chains.
  double chain_residual = 0.0;
};

TrichotomyDecomposition decompose(const MatrixOperator& T, const Tolerances& tol = {});

enum class OrbitClass { Diverges, BoundedAway, Decays, Undecided };
const char* to_string(OrbitClass c);

struct Classification {
  OrbitClass cls = OrbitClass::Undecided;
  double distance_Y = 0.0;  // relative to ||x||
  double distance_Z = 0.0;
};

Classification classify(const MatrixOperator& T, const Eigen::VectorXcd& x, const TrichotomyDecomposition& dec,
                        const Tolerances& tol = {});

struct OracleThresholds {
  double grow = 1e2;    // final / initial above this (and still rising) -> diverges
  double decay = 1e-6;  // final / initial below this -> decays
  double trend = 1.5;   // required growth factor across the last half
};

struct EmpiricalResult {
  OrbitClass cls = OrbitClass::Undecided;
  std::size_t steps = 0;
  double final_log_ratio = 0.0;  // ln(||T^N x|| / ||x||)
  double max_log_ratio = 0.0;
  double min_log_ratio = 0.0;
  /// max(sup ||T^n x|| / ||x||, sup ||x|| / ||T^n x||) over the run.
  double empirical_M = 0.0;
};

/// Power iteration with renormalization; needs at least 50 steps.
EmpiricalResult orbit_oracle(const MatrixOperator& T, const Eigen::VectorXcd& x, std::size_t steps,
                             const OracleThresholds& thresholds = {});

}  // namespace opm::jordan
