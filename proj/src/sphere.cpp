#include "opmachine/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace opm::sphere {

namespace {

constexpr double kMembershipTol = 1e-12;

// Walks the angular grid of stage n in a fixed order. Angles phi_1..phi_{d-2}
// range over [0, pi]; the last one over [0, pi), which suffices modulo sign.
// Moving phi_1, ..., phi_{d-1} to their cell centres one at a time shifts the
// point by at most R_i * |dphi_i| in Euclidean distance (R_i the product of
// the sines of the earlier centres), and rho(u,v) <= |u - v|. Every level
// gets an equal share of the covering budget 2^-(n+1).
void walk_grid(std::size_t d, int stage, const std::function<void(std::span<const double>)>& visit) {
  const std::size_t levels = d - 1;
  const double budget = std::ldexp(1.0, -(stage + 1)) * (1.0 - 1e-12) / static_cast<double>(levels);
  std::vector<double> angles(levels);

  std::function<void(std::size_t, double)> recurse = [&](std::size_t level, double radius) {
    if (level == levels) {
      visit(angles);
      return;
    }
    std::uint64_t cells = 1;
    if (radius > 0.0) {
      const double half = budget / radius;
      cells = static_cast<std::uint64_t>(std::ceil(std::numbers::pi / (2.0 * half)));
      cells = std::max<std::uint64_t>(cells, 1);
    }
    const double width = std::numbers::pi / static_cast<double>(cells);
    for (std::uint64_t c = 0; c < cells; ++c) {
      angles[level] = (static_cast<double>(c) + 0.5) * width;
      recurse(level + 1, radius * std::sin(angles[level]));
    }
  };
  recurse(0, 1.0);
}

std::vector<double> from_angles(std::span<const double> angles) {
  const std::size_t d = angles.size() + 1;
  std::vector<double> x(d);
  double radius = 1.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    x[i] = radius * std::cos(angles[i]);
    radius *= std::sin(angles[i]);
  }
  x[d - 1] = radius;
  return x;
}

}  // namespace

UnitVector::UnitVector(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw Error("unit vector must have at least one coordinate");
  double s = 0.0;
  for (double c : coords_) {
    if (!std::isfinite(c)) throw Error("unit vector has a non-finite coordinate");
    s += c * c;
  }
  if (s == 0.0) throw Error("cannot normalize the zero vector");
  const double n = std::sqrt(s);
  for (double& c : coords_) c /= n;
}

UnitVector UnitVector::basis(std::size_t d, std::size_t index) {
  if (index >= d) throw Error("basis index out of range");
  std::vector<double> e(d, 0.0);
  e[index] = 1.0;
  return UnitVector(std::move(e));
}

UnitVector UnitVector::negated() const {
  UnitVector out = *this;
  for (double& c : out.coords_) c = -c;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rho(const UnitVector& u, const UnitVector& v) {
  const double ip = dot(u.coords(), v.coords());
  return std::sqrt(std::clamp(1.0 - ip * ip, 0.0, 1.0));
}

SymmetricSet::SymmetricSet(std::vector<AntipodalPair> pairs, std::vector<Cap> caps)
    : pairs_(std::move(pairs)), caps_(std::move(caps)) {
  if (pairs_.empty() && caps_.empty()) throw Error("symmetric set must be nonempty");
  dim_ = pairs_.empty() ? caps_.front().center.dim() : pairs_.front().center.dim();
  for (const auto& p : pairs_) {
    if (p.center.dim() != dim_) throw Error("symmetric set components differ in dimension");
  }
  for (const auto& c : caps_) {
    if (c.center.dim() != dim_) throw Error("symmetric set components differ in dimension");
    if (!(c.radius > 0.0 && c.radius <= 1.0)) throw Error("cap radius must lie in (0, 1]");
  }
  if (dim_ < 2) throw Error("symmetric set needs d >= 2");
}

SymmetricSet SymmetricSet::pair(UnitVector center) { return SymmetricSet({AntipodalPair{std::move(center)}}, {}); }

SymmetricSet SymmetricSet::cap(UnitVector center, double radius) {
  return SymmetricSet({}, {Cap{std::move(center), radius}});
}

double rho_to_set(const UnitVector& u, const SymmetricSet& set) {
  if (u.dim() != set.dim()) throw Error("rho_to_set: dimension mismatch");
  double best = 1.0;
  for (const auto& p : set.pairs()) best = std::min(best, rho(u, p.center));
  for (const auto& c : set.caps()) {
    // Line-angle distance to a metric ball, mapped back through sin.
    const double to_center = std::asin(std::min(1.0, rho(u, c.center)));
    const double gap = to_center - std::asin(c.radius);
    best = std::min(best, gap > 0.0 ? std::sin(gap) : 0.0);
  }
  return best;
}

std::vector<std::vector<double>> perp_basis(const UnitVector& v) {
  const std::size_t d = v.dim();
  std::size_t skip = 0;
  for (std::size_t i = 1; i < d; ++i) {
    if (std::abs(v[i]) > std::abs(v[skip])) skip = i;
  }
  std::vector<std::vector<double>> basis;
  basis.reserve(d - 1);
  for (std::size_t i = 0; i < d; ++i) {
    if (i == skip) continue;
    std::vector<double> e(d, 0.0);
    e[i] = 1.0;
    // Two passes of modified Gram-Schmidt keep orthogonality near 1e-16.
    for (int pass = 0; pass < 2; ++pass) {
      const double pv = dot(e, v.coords());
      for (std::size_t k = 0; k < d; ++k) e[k] -= pv * v[k];
      for (const auto& b : basis) {
        const double pb = dot(e, b);
        for (std::size_t k = 0; k < d; ++k) e[k] -= pb * b[k];
      }
    }
    double n = std::sqrt(dot(e, e));
    for (double& c : e) c /= n;
    basis.push_back(std::move(e));
  }
  return basis;
}

std::vector<double> delta(const UnitVector& v, const SymmetricSet& set, const UnitVector& u) {
  const double dist = rho_to_set(v, set);
  if (dist <= kMembershipTol) throw Error("delta: base point lies in E (rho(v,E) = 0)");
  std::vector<double> out;
  for (const auto& e : perp_basis(v)) out.push_back(dot(u.coords(), e) / dist);
  return out;
}

std::uint64_t grid_size(std::size_t d, int stage) {
  if (d < 2 || stage < 1) throw Error("grid_size: requires d >= 2 and n >= 1");
  std::uint64_t count = 0;
  walk_grid(d, stage, [&](std::span<const double>) { ++count; });
  return count;
}

Net build_net(std::size_t d, int stage, const SymmetricSet& set) {
  if (d < 2 || stage < 1) throw Error("build_net: requires d >= 2 and n >= 1");
  if (set.dim() != d) throw Error("build_net: E lives in a different dimension");
  const double keep = std::ldexp(1.0, -(stage + 1));
  Net net{stage, std::ldexp(1.0, -stage), {}};
  walk_grid(d, stage, [&](std::span<const double> angles) {
    UnitVector v(from_angles(angles));
    if (rho_to_set(v, set) >= keep) net.points.push_back(std::move(v));
  });
  return net;
}

std::uint64_t stage_budget(std::uint64_t K, std::size_t d, int stage) {
  const auto shift = static_cast<unsigned>(stage) * static_cast<unsigned>(d - 1);
  if (shift >= 63 || K > (std::uint64_t{1} << (63 - shift))) throw Error("stage budget overflows 64 bits");
  return K << shift;
}

std::uint64_t default_K(std::size_t d, int max_stage) {
  std::uint64_t K = 1;
  for (int n = 1; n <= max_stage; ++n) {
    const std::uint64_t unit = stage_budget(1, d, n);
    K = std::max(K, (grid_size(d, n) + unit - 1) / unit);
  }
  return K;
}

std::vector<int> stage_map(std::uint64_t K, std::size_t d, int stages) {
  std::vector<int> out;
  for (int n = 1; n <= stages; ++n) {
    const std::uint64_t budget = stage_budget(K, d, n);
    out.insert(out.end(), budget, n);
  }
  return out;
}

FeedEnumeration::FeedEnumeration(std::uint64_t K, std::vector<std::uint64_t> boundaries,
                                 std::vector<int> stage_of, std::vector<UnitVector> feeds)
    : K_(K), boundaries_(std::move(boundaries)), stage_of_(std::move(stage_of)), feeds_(std::move(feeds)) {}

FeedEnumeration enumerate_feeds(std::span<const Net> nets, std::uint64_t K) {
  if (nets.empty()) throw Error("enumerate_feeds: no nets supplied");
  if (K == 0) throw Error("enumerate_feeds: K must be positive");
  const std::size_t d = nets.front().points.empty() ? 0 : nets.front().points.front().dim();
  std::vector<std::uint64_t> boundaries{1};
  std::vector<int> stages;
  std::vector<UnitVector> feeds;
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const Net& net = nets[i];
    const int n = static_cast<int>(i) + 1;
    if (net.stage != n) throw Error("enumerate_feeds: nets must be given for stages 1..N in order");
    if (net.points.empty()) {
      throw Error("enumerate_feeds: net of stage " + std::to_string(n) + " is empty (E covers W_n)");
    }
    const std::uint64_t budget = stage_budget(K, d, n);
    if (net.points.size() > budget) {
      throw Error("enumerate_feeds: stage " + std::to_string(n) + " net has " +
                  std::to_string(net.points.size()) + " points but the budget K*2^(n(d-1)) is " +
                  std::to_string(budget));
    }
    for (std::uint64_t s = 0; s < budget; ++s) {
      feeds.push_back(net.points[s % net.points.size()]);
      stages.push_back(n);
    }
    boundaries.push_back(boundaries.back() + budget);
  }
  return FeedEnumeration(K, std::move(boundaries), std::move(stages), std::move(feeds));
}

}  // namespace opm::sphere
