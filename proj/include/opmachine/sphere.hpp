#pragma once

// Geometry of the real unit sphere of l^2_d modulo sign: the projective
// pseudometric rho(u,v) = sqrt(1 - <u,v>^2), symmetric target sets, the
// Delta_v coordinate maps, dyadic nets and the global feed enumeration.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "opmachine/numeric.hpp"

namespace opm::sphere {

class UnitVector {
 public:
  /// Renormalizes; rejects the zero vector and non-finite input.
  explicit UnitVector(std::vector<double> coords);

  static UnitVector basis(std::size_t d, std::size_t index);

  std::size_t dim() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  UnitVector negated() const;

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  std::vector<double> coords_;
};

double dot(std::span<const double> a, std::span<const double> b);

/// sqrt(1 - <u,v>^2), clamped to [0, 1].
double rho(const UnitVector& u, const UnitVector& v);

struct AntipodalPair {
  UnitVector center;
};

/// { u : rho(u, center) <= radius }.
struct Cap {
  UnitVector center;
  double radius;
};

/// Finite union of antipodal pairs and rho-caps; closed and symmetric.
class SymmetricSet {
 public:
  SymmetricSet(std::vector<AntipodalPair> pairs, std::vector<Cap> caps);

  static SymmetricSet pair(UnitVector center);
  static SymmetricSet cap(UnitVector center, double radius);

  std::size_t dim() const { return dim_; }
  const std::vector<AntipodalPair>& pairs() const { return pairs_; }
  const std::vector<Cap>& caps() const { return caps_; }

 private:
  std::vector<AntipodalPair> pairs_;
  std::vector<Cap> caps_;
  std::size_t dim_ = 0;
};

double rho_to_set(const UnitVector& u, const SymmetricSet& set);

/// Orthonormal basis of v^perp: Gram-Schmidt over the canonical basis with
/// the coordinate of largest |v_i| left out (first index on ties).
std::vector<std::vector<double>> perp_basis(const UnitVector& v);

/// (<u,e_{v,1}>, ..., <u,e_{v,d-1}>) / rho(v, E). Rejects v in E.
std::vector<double> delta(const UnitVector& v, const SymmetricSet& set, const UnitVector& u);

struct Net {
  int stage = 0;
  /// Covering radius 2^-stage for the shell {rho(.,E) >= 2^-stage}.
  double mesh = 0.0;
  std::vector<UnitVector> points;
};

/// Size of the angular grid used by build_net before E filtering.
std::uint64_t grid_size(std::size_t d, int stage);

/// Deterministic angular grid with rho-covering radius 2^-(n+1), keeping the
/// points with rho(., E) >= 2^-(n+1).
Net build_net(std::size_t d, int stage, const SymmetricSet& set);

/// Smallest K such that every unfiltered grid of stages 1..max_stage fits
/// the stage budget K * 2^(n(d-1)).
std::uint64_t default_K(std::size_t d, int max_stage);

std::uint64_t stage_budget(std::uint64_t K, std::size_t d, int stage);

class FeedEnumeration {
 public:
  FeedEnumeration(std::uint64_t K, std::vector<std::uint64_t> boundaries, std::vector<int> stage_of,
                  std::vector<UnitVector> feeds);

  std::uint64_t K() const { return K_; }
  /// C_1, ..., C_{N+1} (C_1 = 1).
  const std::vector<std::uint64_t>& boundaries() const { return boundaries_; }
  std::uint64_t boundary(int stage) const { return boundaries_.at(static_cast<std::size_t>(stage - 1)); }
  int stages() const { return static_cast<int>(boundaries_.size()) - 1; }
  /// Number of enumerated feeds, C_{N+1} - 1.
  std::uint64_t horizon() const { return feeds_.size(); }
  /// 1-based k.
  int stage_of(std::uint64_t k) const { return stage_of_.at(k - 1); }
  const UnitVector& feed(std::uint64_t k) const { return feeds_.at(k - 1); }

 private:
  std::uint64_t K_;
  std::vector<std::uint64_t> boundaries_;
  std::vector<int> stage_of_;
  std::vector<UnitVector> feeds_;
};

/// Stage-n block has exactly K * 2^(n(d-1)) entries, the net points
/// repeated cyclically. Nets must be given for stages 1..N in order.
FeedEnumeration enumerate_feeds(std::span<const Net> nets, std::uint64_t K);

/// Pure stage map from budgets alone (independent of E).
std::vector<int> stage_map(std::uint64_t K, std::size_t d, int stages);

}  // namespace opm::sphere
