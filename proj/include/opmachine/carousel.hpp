#pragma once

// Single-block shift-and-feed machine on a cycle of length T.
//
// The machine acts on (a, y) with y in l^p_T by (a, y) -> (a, S(y) + F(a)),
// where S rotates the cycle one step and F(a) deposits +eps*a on positions
// 1..m and -eps*a on positions m+1..2m. Starting from (a, 0), the state after
// t steps is eps*a times an integer pattern: a standing tent of height m on
// positions 1..2m-1 minus a copy of the same tent rotated by t mod T.
//
// Positions are 1-based everywhere in this interface.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "opmachine/numeric.hpp"

namespace opm::carousel {

struct CarouselParams {
  BigInt period;  // T
  BigInt width;   // m
  Rational eps;
  NormKind norm = NormKind::Two;

  /// Validates 1 <= m, 4m <= T and eps > 0.
  static CarouselParams make(BigInt period, BigInt width, Rational eps, NormKind norm);
};

/// Sparse exact state of the block at `time`, started from (amplitude, 0).
struct CarouselProfile {
  CarouselParams params;
  Rational amplitude;
  BigInt time;
  /// (position, value) for nonzero values only, sorted by position.
  std::vector<std::pair<std::int64_t, Rational>> values;

  Rational value(std::int64_t position) const;
  /// All T coordinates; only sensible for small T.
  std::vector<Rational> dense_values() const;
  std::size_t support_size() const { return values.size(); }
};

/// Norm of a profile. For finite p the p-th power is kept exactly; for
/// p = inf `pth_power` holds the norm itself.
struct PNorm {
  NormKind norm = NormKind::Two;
  Rational pth_power;
  double value() const;
};

/// F(a) as a profile at time 1.
CarouselProfile feed_vector(const CarouselParams& params, const Rational& amplitude);

/// Cyclic right rotation: output[i] = input[i-1], output[0] = input[T-1].
template <typename T>
std::vector<T> shift_apply(std::span<const T> values) {
  std::vector<T> out(values.size());
  if (values.empty()) return out;
  out[0] = values.back();
  for (std::size_t i = 1; i < values.size(); ++i) out[i] = values[i - 1];
  return out;
}

/// One application of the machine; iterative reference for small T.
CarouselProfile step(const CarouselProfile& state);

/// Integer pattern c with state_at = eps*a*c, as (position, count) pairs.
/// Cost is O(m) regardless of t.
std::vector<std::pair<std::int64_t, std::int64_t>> bump_counts(const CarouselParams& params,
                                                               const BigInt& time);

/// Closed-form state after `time` steps from (amplitude, 0).
CarouselProfile state_at(const CarouselParams& params, const Rational& amplitude,
                         const BigInt& time);

PNorm profile_norm(const CarouselProfile& profile, NormKind p);

/// sum |c_i|^p of the integer pattern for p = 1, 2; max |c_i| for p = inf.
/// O(1) big-integer arithmetic, so T, m and t may be astronomically large.
BigInt bump_power_sum(const BigInt& period, const BigInt& width, const BigInt& time, NormKind p);

/// The constant L of the uniform and small-time upper estimates, as L^p
/// (L itself for p = inf, where L = 1).
PNorm estimate_constant_L(NormKind p);

enum class BoundKind { Lower, Uniform, SmallTime };
const char* to_string(BoundKind kind);

struct EstimateRecord {
  std::int64_t t = 0;
  PNorm norm;
  BoundKind kind = BoundKind::Uniform;
  /// Bound in the same scale as norm.pth_power.
  Rational bound_pth;
  bool satisfied = false;
};

struct EstimateReport {
  CarouselParams params;
  Rational amplitude;
  PNorm constant_L;
  std::vector<EstimateRecord> records;

  bool all_satisfied() const;
  std::optional<EstimateRecord> first_violation() const;
};

/// Checks, for every t in 1..T,
///   lower:      ||state||^p >= (2/(p+1)) eps^p m^(p+1) |a|^p   when m <= t <= T-m
///   uniform:    ||state||^p <= L^p eps^p m^(p+1) |a|^p
///   small time: ||state||^p <= L^p eps^p m t^p |a|^p           when t <= m
/// with the p = inf forms eps m |a|, eps m |a| and eps t |a|.
EstimateReport verify_estimates(const CarouselParams& params, const Rational& amplitude);

}  // namespace opm::carousel
