#pragma once

// The assembled operator R on l^2_d (+) X^(d-1)_2, X = c_0 or l^p with the
// unit-vector system. Block k of every copy of X is a cycle of length T_k
// laid out contiguously at offset T_1 + ... + T_(k-1); its coordinates are
// the shifted x-part plus the closed-form carousel state driven by
// a_{k,j} = <u, e_{w_k,j}> / rho(w_k, E).
//
// All norms are exact: for p = 1 and p = inf every coordinate is rational;
// for p = 2, eps_k = (n / m_k^2) sqrt(m_k), so squared norms are sums of
// square roots (SurdSum).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opmachine/numeric.hpp"
#include "opmachine/schedule.hpp"
#include "opmachine/sphere.hpp"

namespace opm::machine {

struct MachineConfig {
  sphere::SymmetricSet E;
  std::size_t d = 2;
  NormKind p = NormKind::Two;
  /// 0 selects sphere::default_K(d, stages).
  std::uint64_t K = 0;
  int stages = 3;
  std::uint64_t k_max = 6;
  schedule::Variant variant = schedule::Variant::toy(5);
};

struct BlockInfo {
  std::uint64_t k = 0;
  int stage = 0;
  std::size_t feed = 0;  // index into Machine::feeds()
  double rho_to_E = 0.0;
  std::vector<std::vector<double>> basis;  // e_{w_k,1..d-1}
  SquarefreeRoot root_m;                   // sqrt(m_k), used for p = 2
};

/// Finitely supported coordinates of one copy of X: (1-based slot, value),
/// sorted by slot.
using SparseCopy = std::vector<std::pair<std::int64_t, Rational>>;

class Machine {
 public:
  const MachineConfig& config() const { return config_; }
  std::size_t d() const { return config_.d; }
  std::size_t copies() const { return config_.d - 1; }
  NormKind p() const { return config_.p; }
  std::uint64_t k_max() const { return config_.k_max; }
  /// Number of enumerated feeds; blocks k_max+1..horizon enter only through
  /// tail bounds and lazily evaluated representative blocks.
  std::uint64_t horizon() const { return feeds_.horizon(); }

  const std::vector<sphere::Net>& nets() const { return nets_; }
  const sphere::FeedEnumeration& feeds() const { return feeds_; }
  const schedule::Schedule& schedule() const { return schedule_; }
  const BlockInfo& block(std::uint64_t k) const { return blocks_.at(k - 1); }
  const sphere::UnitVector& w(std::uint64_t k) const { return feeds_.feed(k); }

  /// First slot of block k (1-based) and the truncated copy length
  /// T_1 + ... + T_k_max; both must fit in 64 bits.
  std::int64_t block_start(std::uint64_t k) const;
  std::int64_t truncated_length() const;
  /// Block containing a 1-based slot of the truncated range.
  std::uint64_t block_of_slot(std::int64_t slot) const;

  /// L as a double ((2^(p+3)/(p+1))^(1/p), 1 for p = inf).
  double constant_L() const { return L_; }

  friend Machine build_machine(const MachineConfig& config);

 private:
  explicit Machine(MachineConfig config) : config_(std::move(config)), feeds_(0, {}, {}, {}) {}

  MachineConfig config_;
  std::vector<sphere::Net> nets_;
  sphere::FeedEnumeration feeds_;
  schedule::Schedule schedule_;
  std::vector<BlockInfo> blocks_;
  std::vector<std::int64_t> starts_;  // starts_[k-1], k = 1..k_max+1
  bool layout_fits_ = true;
  double L_ = 1.0;
};

/// Rejects an empty net at any stage (E covers W_n), k_max outside
/// 1..horizon, and dimension mismatches.
Machine build_machine(const MachineConfig& config);

/// (u, x) with cached exact amplitudes; u may be any vector of l^2_d.
class PointState {
 public:
  PointState(const Machine& machine, std::vector<double> u, std::vector<SparseCopy> x = {});

  const Machine& machine() const { return *machine_; }
  std::span<const double> u() const { return u_; }
  const Rational& u_norm_sq() const { return u_sq_; }
  const std::vector<SparseCopy>& x() const { return x_; }
  /// a_{k,j} exactly (the double amplitude converted without rounding).
  const Rational& amplitude(std::uint64_t k, std::size_t j) const { return amps_.at(k - 1).at(j); }
  double amplitude_value(std::uint64_t k, std::size_t j) const;
  bool x_is_zero() const;

  /// x entries of copy j grouped by block: (block k, 0-based local position, value).
  struct Entry {
    std::uint64_t k;
    std::int64_t local;
    Rational value;
  };
  const std::vector<Entry>& x_entries(std::size_t j) const { return by_block_.at(j); }

 private:
  const Machine* machine_;
  std::vector<double> u_;
  Rational u_sq_;
  std::vector<SparseCopy> x_;
  std::vector<std::vector<Rational>> amps_;  // [k-1][j]
  std::vector<std::vector<Entry>> by_block_;
};

struct OrbitRecord {
  BigInt t;
  int stage = 0;
  /// ||R^t(u,x)||^2 over the evaluated blocks, exactly.
  SurdSum total_sq;
  double total = 0.0;
  /// ||(0, S^t x)|| = ||(0, x)||.
  double shift_part = 0.0;
  /// ||R^t(u,0) - (u,0)||, the carousel part alone.
  double perturb_part = 0.0;
  /// sqrt(sum_j ||P_k Q_j R^t(u,0)||^2) for k = 1..k_max.
  std::vector<double> block_contribution;
  /// Bound on the change of the total from blocks outside the evaluated set.
  double tail_bound = 0.0;
};

/// Evaluates blocks 1..k_max plus any `extra_blocks` (which must lie beyond
/// k_max and carry no x).
OrbitRecord orbit_norm(const PointState& state, const BigInt& t, std::span<const std::uint64_t> extra_blocks = {});
OrbitRecord orbit_norm(const Machine& machine, std::span<const double> u, const std::vector<SparseCopy>& x,
                       const BigInt& t);

/// Coordinates of copy j of R^t(u,x) at the given 1-based truncated slots.
std::vector<SurdSum> copy_values(const PointState& state, const BigInt& t, std::size_t j,
                                 std::span<const std::int64_t> slots);

/// sum over j of (sum over blocks k in (k_cut, horizon] not in `skip` of
/// L n_k min(r, T_k - r, m_k) / m_k |a_{k,j}|)^2, square-rooted; r = t mod T_k.
double tail_bound_at(const PointState& state, std::uint64_t k_cut, const BigInt& t,
                     std::span<const std::uint64_t> skip = {});

/// The one-step form (t = 1): the feed part of R beyond block k_cut.
double tail_bound(const Machine& machine, std::span<const double> u, std::uint64_t k_cut);

/// Brute force: materializes blocks 1..k_max of every copy and applies R by
/// its definition `steps` times. Records hold t, stage and the exact total
/// (records[t] for t = 0..steps). Rejects runs above 10^7 coordinate updates.
std::vector<OrbitRecord> dense_oracle(const PointState& state, std::uint64_t steps);

constexpr double kDenseBudget = 1e7;

struct DivergenceStage {
  int stage = 0;
  std::uint64_t k = 0;  // representative block C_n
  BigInt window_lo;     // m_k
  BigInt window_hi;     // T_k - m_k (exclusive)
  std::size_t samples = 0;
  double min_total = 0.0;
  BigInt argmin_t;
  /// (2/(p+1))^(1/p) n sqrt(sum_j a_{k,j}^2).
  double certified = 0.0;
  /// (2/(p+1))^(1/p) n.
  double generic_bound = 0.0;
  /// min over samples of total - (generic_bound - tail).
  double min_slack = 0.0;
  double max_tail = 0.0;
  /// Exact check that block k alone meets the lower estimate at every sample.
  bool block_lower_exact = false;
};

/// Sampled times: every t of the window when it has at most `dense_limit`
/// elements, otherwise `sparse_samples` evenly spaced times including both ends.
struct Sampling {
  std::size_t dense_limit = 2048;
  std::size_t sparse_samples = 257;
};

std::vector<BigInt> window_samples(const BigInt& lo, const BigInt& hi, const Sampling& rule);

/// u must lie in E. Stages 1..stages (at most N).
std::vector<DivergenceStage> divergence_trace(const Machine& machine, const sphere::UnitVector& u, int stages,
                                              const Sampling& rule = {});

struct NearReturn {
  int stage = 0;
  int n0 = 0;
  std::uint64_t k_n = 0;
  BigInt t;  // T_{k_n - 1}
  double delta_norm = 0.0;
  SurdSum deficit_sq;
  double deficit = 0.0;
  double bound = 0.0;
  /// Exact: every block r < k_n contributes zero at t.
  bool earlier_blocks_zero = false;
};

/// Smallest n >= 1 with rho(u,E) >= 2^-n; rejects u in E.
int near_return_n0(const Machine& machine, const sphere::UnitVector& u);

NearReturn near_return(const Machine& machine, const sphere::UnitVector& u, int stage);

struct Functional {
  std::vector<double> u_coeffs;  // may be empty
  /// (copy j, 1-based truncated slot, coefficient)
  std::vector<std::tuple<std::size_t, std::int64_t, Rational>> x_coeffs;
};

struct WeakProbe {
  SurdSum difference;  // f(R^{T_k}(u,x)) - f(u,x)
  double magnitude = 0.0;
};

WeakProbe weak_probe(const PointState& state, const Functional& f, std::uint64_t k);

}  // namespace opm::machine
