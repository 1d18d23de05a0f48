#pragma once

// Vector systems in spaces with a symmetric basis: block families F_n,
// the z-vectors z_{l,n} of the three Tzafriri-style cases and of the plain
// unit-vector system, their slot permutations pi_n, and empirical
// equivalence constants against l^p coefficient norms.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "opmachine/numeric.hpp"

namespace opm::symbasis {

/// Norm on finitely supported coefficient vectors, invariant under
/// permutations and sign changes, normalized so that ||e_1|| = 1.
class SymmetricNorm {
 public:
  virtual ~SymmetricNorm() = default;
  virtual double operator()(std::span<const double> x) const = 0;
  virtual std::string name() const = 0;
};

/// l^p for real p >= 1; p = infinity gives the c_0 / l^inf norm.
class LpNorm final : public SymmetricNorm {
 public:
  explicit LpNorm(double p);
  static LpNorm of(NormKind kind);
  double operator()(std::span<const double> x) const override;
  std::string name() const override;
  double p() const { return p_; }

 private:
  double p_;
};

/// Lorentz space d(w, 1) with w_i = i^(1/q) - (i-1)^(1/q), q > 1, so that
/// lambda(n) = n^(1/q).
class LorentzNorm final : public SymmetricNorm {
 public:
  explicit LorentzNorm(double q);
  double operator()(std::span<const double> x) const override;
  std::string name() const override;

 private:
  double q_;
};

std::unique_ptr<SymmetricNorm> parse_norm_spec(const std::string& spec);

struct LambdaMu {
  double lambda = 0.0;
  double mu = 0.0;
};

/// lambda(n) = ||e_1 + ... + e_n||, mu(n) = ||e*_1 + ... + e*_n||. For a
/// symmetric norm the supremum of sum x_i over the unit ball is attained at
/// a constant vector, so mu(n) = n / lambda(n).
LambdaMu lambda_mu(const SymmetricNorm& norm, std::size_t n);

struct Block {
  std::uint64_t start = 0;  // first slot, 1-based
  std::uint64_t length = 0;
};

struct BlockFamily {
  std::vector<Block> blocks;  // blocks[n-1] = F_n
  bool pairwise_disjoint() const;

  /// k_1 = 0, k_{n+1} = k_n + n m_n, F_n = {k_n+1, ..., k_n + n m_n}.
  static BlockFamily cases_one_two(std::span<const std::size_t> m);
  /// F_n = {2^n + 1, ..., 2^(n+1)}.
  static BlockFamily case_three(std::size_t n_max);
};

enum class SystemCase { I, II, III, Unit };
const char* to_string(SystemCase c);

struct ZSystem {
  SystemCase kind = SystemCase::Unit;
  std::size_t n = 0;
  /// Absolute 1-based slots of F_n, ascending.
  std::vector<std::uint64_t> slots;
  /// z_{l,n} = scale * pattern[l-1], indexed by local slot.
  std::vector<std::vector<std::int64_t>> pattern;
  double scale = 1.0;
  /// pi_n on local slot indices: S e_{slots[i]} = e_{slots[pi[i]]}.
  std::vector<std::size_t> pi;
  /// Coefficient norm the system is compared to (inf, 1, 2 or the ambient p).
  double target_p = 2.0;
  std::size_t block_width = 1;  // m_n for Cases I and II
  /// lambda(m_n) for Case I, mu(m_n) for Case II, 1 otherwise.
  double scaling = 1.0;

  std::vector<double> z(std::size_t l) const;
  /// sum_l a_l z_l over the local slots.
  std::vector<double> combine(std::span<const double> a) const;
};

/// Case I: requires lambda(n m_n) / lambda(m_n) < 2.
ZSystem case1_system(std::size_t n, std::size_t m_n, const SymmetricNorm& norm, std::uint64_t k_n = 0);

/// Case II for l^1 only: z_{1,n} is the normalized first block and
/// z_{l,n} = S^(l-1) z_{1,n}.
ZSystem case2_system(std::size_t n, std::size_t m_n, const SymmetricNorm& norm, std::uint64_t k_n = 0);

/// Walsh system on F_n = {2^n+1, ..., 2^(n+1)}. Local slot s carries the
/// sign function sigma with sigma(l) = +1 iff bit (n - l) of s is set, so
/// sigma(1) is the most significant bit.
ZSystem case3_system(std::size_t n);

/// Same construction with an arbitrary slot -> sign-code map f (values in
/// [0, 2^n)). A non-bijective f yields a system that fails the shift check.
ZSystem case3_system_with(std::size_t n, std::span<const std::uint64_t> f);

/// z_{l,n} = e_{F[l-1]}, pi_n the n-cycle on F.
ZSystem unit_system(std::size_t n, std::span<const std::uint64_t> block, double ambient_p = 2.0);

/// True iff pi is a permutation and moving every slot i to pi(i) maps the
/// integer pattern of z_l onto that of z_{tau(l)} for all l.
bool shift_simulation_check(const ZSystem& system);

/// Order of pi_n as a permutation (lcm of cycle lengths).
std::uint64_t permutation_order(std::span<const std::size_t> pi);

/// Exact integer Euclidean pairing of two patterns.
std::int64_t pattern_dot(const ZSystem& system, std::size_t l1, std::size_t l2);

struct EquivalenceEstimate {
  std::size_t n = 0;
  std::string description;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t directions = 0;
};

/// Extremes of ||sum a_l z_l|| / ||a||_target over spikes, the constant and
/// the alternating pattern plus `trials` seeded Gaussian directions. These
/// are inner estimates of the true constants.
EquivalenceEstimate equivalence_estimate(const ZSystem& system, const SymmetricNorm& norm, std::size_t trials,
                                         std::uint64_t seed = 1);

enum class DetectedCase { I, II, III, Inconclusive };
const char* to_string(DetectedCase c);

struct CaseDetection {
  DetectedCase kind = DetectedCase::Inconclusive;
  std::size_t n_max = 0;
  std::size_t m_max = 0;
  /// Witnesses m_n for n = 1..n_max of the detected case (empty for III).
  std::vector<std::size_t> witnesses;
  /// For III and Inconclusive: the first n where I fails and where II fails.
  std::size_t case1_fails_at = 0;
  std::size_t case2_fails_at = 0;
  std::string note;
};

/// Finite-horizon test of the Case I and Case II hypotheses for n <= n_max
/// with m_n searched in 1..m_max. When both fail but the best ratio at the
/// failing n is still improving at m = m_max, the result is Inconclusive.
CaseDetection detect_case(const SymmetricNorm& norm, std::size_t n_max, std::size_t m_max);

}  // namespace opm::symbasis
