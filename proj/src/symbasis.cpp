#include "opmachine/symbasis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "opmachine/random.hpp"

namespace opm::symbasis {

namespace {

// Ratio hypotheses are strict inequalities against 2; anything within this
// margin of 2 is treated as failing so rounding cannot manufacture a witness.
constexpr double kRatioMargin = 1e-12;

std::string format_p(double p) {
  if (std::isinf(p)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

// Cases I and II share the layout and the block-translation permutation.
ZSystem block_system(SystemCase kind, std::size_t n, std::size_t m, std::uint64_t k_n) {
  if (n < 1 || m < 1) throw Error("block system: n and m_n must be positive");
  ZSystem s;
  s.kind = kind;
  s.n = n;
  s.block_width = m;
  const std::size_t size = n * m;
  for (std::size_t i = 0; i < size; ++i) s.slots.push_back(k_n + 1 + i);
  s.pattern.assign(n, std::vector<std::int64_t>(size, 0));
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t r = 0; r < m; ++r) s.pattern[l][l * m + r] = 1;
  }
  s.pi.resize(size);
  for (std::size_t i = 0; i < size; ++i) s.pi[i] = (i + m) % size;
  return s;
}

}  // namespace

LpNorm::LpNorm(double p) : p_(p) {
  if (!(p >= 1.0)) throw Error("l^p norm needs p >= 1");
}

LpNorm LpNorm::of(NormKind kind) {
  switch (kind) {
    case NormKind::One: return LpNorm(1.0);
    case NormKind::Two: return LpNorm(2.0);
    case NormKind::Inf: return LpNorm(std::numeric_limits<double>::infinity());
  }
  return LpNorm(2.0);
}

double LpNorm::operator()(std::span<const double> x) const {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (std::isinf(p_) || peak == 0.0) return peak;
  double sum = 0.0;
  if (p_ == 1.0) {
    for (double v : x) sum += std::abs(v);
    return sum;
  }
  if (p_ == 2.0) {
    for (double v : x) sum += (v / peak) * (v / peak);
    return peak * std::sqrt(sum);
  }
  for (double v : x) sum += std::pow(std::abs(v) / peak, p_);
  return peak * std::pow(sum, 1.0 / p_);
}

std::string LpNorm::name() const { return std::isinf(p_) ? "c0" : "l" + format_p(p_); }

LorentzNorm::LorentzNorm(double q) : q_(q) {
  if (!(q > 1.0) || std::isinf(q)) throw Error("Lorentz norm needs 1 < q < inf");
}

double LorentzNorm::operator()(std::span<const double> x) const {
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  std::sort(a.begin(), a.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = std::pow(static_cast<double>(i + 1), 1.0 / q_) - std::pow(static_cast<double>(i), 1.0 / q_);
    sum += w * a[i];
  }
  return sum;
}

std::string LorentzNorm::name() const { return "lorentz" + format_p(q_); }

std::unique_ptr<SymmetricNorm> parse_norm_spec(const std::string& spec) {
  if (spec == "l1") return std::make_unique<LpNorm>(1.0);
  if (spec == "l2") return std::make_unique<LpNorm>(2.0);
  if (spec == "linf" || spec == "c0") return std::make_unique<LpNorm>(LpNorm::of(NormKind::Inf));
  auto number = [&](std::size_t from) {
    try {
      std::size_t used = 0;
      const double v = std::stod(spec.substr(from), &used);
      if (used != spec.size() - from) throw Error("");
      return v;
    } catch (const std::exception&) {
      throw Error("bad norm specification '" + spec + "'");
    }
  };
  if (spec.rfind("lp:", 0) == 0) return std::make_unique<LpNorm>(number(3));
  if (spec.rfind("lorentz:", 0) == 0) return std::make_unique<LorentzNorm>(number(8));
  throw Error("unknown norm '" + spec + "' (expected l1, l2, linf, c0, lp:<p>, lorentz:<q>)");
}

LambdaMu lambda_mu(const SymmetricNorm& norm, std::size_t n) {
  if (n == 0) throw Error("lambda_mu: n must be positive");
  const double lambda = norm(ones(n));
  return {lambda, static_cast<double>(n) / lambda};
}

bool BlockFamily::pairwise_disjoint() const {
  std::vector<Block> sorted = blocks;
  std::sort(sorted.begin(), sorted.end(), [](const Block& a, const Block& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1].start + sorted[i - 1].length > sorted[i].start) return false;
  }
  return true;
}

BlockFamily BlockFamily::cases_one_two(std::span<const std::size_t> m) {
  BlockFamily f;
  std::uint64_t k = 0;
  for (std::size_t n = 1; n <= m.size(); ++n) {
    const std::uint64_t len = n * m[n - 1];
    f.blocks.push_back({k + 1, len});
    k += len;
  }
  return f;
}

BlockFamily BlockFamily::case_three(std::size_t n_max) {
  if (n_max >= 62) throw Error("case III family too large");
  BlockFamily f;
  for (std::size_t n = 1; n <= n_max; ++n) f.blocks.push_back({(std::uint64_t{1} << n) + 1, std::uint64_t{1} << n});
  return f;
}

const char* to_string(SystemCase c) {
  switch (c) {
    case SystemCase::I: return "I";
    case SystemCase::II: return "II";
    case SystemCase::III: return "III";
    case SystemCase::Unit: return "unit";
  }
  return "?";
}

std::vector<double> ZSystem::z(std::size_t l) const {
  if (l < 1 || l > n) throw Error("z index out of range");
  std::vector<double> out(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) out[i] = scale * static_cast<double>(pattern[l - 1][i]);
  return out;
}

std::vector<double> ZSystem::combine(std::span<const double> a) const {
  if (a.size() != n) throw Error("combine: expected " + std::to_string(n) + " coefficients");
  std::vector<double> out(slots.size(), 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    if (a[l] == 0.0) continue;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (pattern[l][i] != 0) out[i] += a[l] * scale * static_cast<double>(pattern[l][i]);
    }
  }
  return out;
}

ZSystem case1_system(std::size_t n, std::size_t m_n, const SymmetricNorm& norm, std::uint64_t k_n) {
  if (n < 1 || m_n < 1) throw Error("case I: n and m_n must be positive");
  const double lam_m = norm(ones(m_n));
  const double ratio = norm(ones(n * m_n)) / lam_m;
  if (!(ratio < 2.0 - kRatioMargin)) {
    throw Error("case I hypothesis fails: lambda(n m)/lambda(m) = " + std::to_string(ratio) + " for n = " +
                std::to_string(n) + ", m = " + std::to_string(m_n));
  }
  ZSystem s = block_system(SystemCase::I, n, m_n, k_n);
  s.scale = 1.0 / lam_m;
  s.scaling = lam_m;
  s.target_p = std::numeric_limits<double>::infinity();
  return s;
}

ZSystem case2_system(std::size_t n, std::size_t m_n, const SymmetricNorm& norm, std::uint64_t k_n) {
  const auto* lp = dynamic_cast<const LpNorm*>(&norm);
  if (lp == nullptr || lp->p() != 1.0) {
    throw Error("case II is only constructed for l^1 (got " + norm.name() + ")");
  }
  const double mu_m = lambda_mu(norm, m_n).mu;
  const double ratio = lambda_mu(norm, n * m_n).mu / mu_m;
  if (!(ratio < 2.0 - kRatioMargin)) throw Error("case II hypothesis fails: ratio " + std::to_string(ratio));
  // z_{1,n} is the first block normalized in l^1; S^(l-1) carries it onto
  // block l, which is exactly the block pattern.
  ZSystem s = block_system(SystemCase::II, n, m_n, k_n);
  s.scale = 1.0 / static_cast<double>(m_n);
  s.scaling = mu_m;
  s.target_p = 1.0;
  return s;
}

ZSystem case3_system_with(std::size_t n, std::span<const std::uint64_t> f) {
  if (n < 1 || n > 20) throw Error("case III: n must lie in 1..20");
  const std::uint64_t size = std::uint64_t{1} << n;
  if (f.size() != size) throw Error("case III: bijection must have 2^n entries");
  ZSystem s;
  s.kind = SystemCase::III;
  s.n = n;
  s.target_p = 2.0;
  for (std::uint64_t i = 0; i < size; ++i) s.slots.push_back(size + 1 + i);

  std::vector<std::optional<std::size_t>> f_inv(size);
  for (std::size_t slot = 0; slot < size; ++slot) {
    if (f[slot] >= size) throw Error("case III: sign code out of range");
    if (!f_inv[f[slot]]) f_inv[f[slot]] = slot;
  }
  s.pattern.assign(n, std::vector<std::int64_t>(size));
  for (std::size_t l = 1; l <= n; ++l) {
    for (std::size_t slot = 0; slot < size; ++slot) {
      s.pattern[l - 1][slot] = ((f[slot] >> (n - l)) & 1U) != 0 ? 1 : -1;
    }
  }
  // hat-pi(sigma)(l) = sigma(l-1) cyclically: a right rotation of the code.
  s.pi.resize(size);
  for (std::size_t slot = 0; slot < size; ++slot) {
    const std::uint64_t c = f[slot];
    const std::uint64_t rotated = (c >> 1) | ((c & 1U) << (n - 1));
    s.pi[slot] = f_inv[rotated].value_or(slot);
  }
  return s;
}

ZSystem case3_system(std::size_t n) {
  if (n < 1 || n > 20) throw Error("case III: n must lie in 1..20");
  std::vector<std::uint64_t> f(std::size_t{1} << n);
  std::iota(f.begin(), f.end(), std::uint64_t{0});
  return case3_system_with(n, f);
}

ZSystem unit_system(std::size_t n, std::span<const std::uint64_t> block, double ambient_p) {
  if (n < 1) throw Error("unit system: n must be positive");
  if (block.size() != n) throw Error("unit system: |F| must equal n");
  ZSystem s;
  s.kind = SystemCase::Unit;
  s.n = n;
  s.slots.assign(block.begin(), block.end());
  s.pattern.assign(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t l = 0; l < n; ++l) s.pattern[l][l] = 1;
  s.pi.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.pi[i] = (i + 1) % n;
  s.target_p = ambient_p;
  return s;
}

bool shift_simulation_check(const ZSystem& system) {
  const std::size_t size = system.slots.size();
  if (system.pi.size() != size || system.pattern.size() != system.n) return false;
  std::vector<bool> hit(size, false);
  for (std::size_t i : system.pi) {
    if (i >= size || hit[i]) return false;
    hit[i] = true;
  }
  std::vector<std::int64_t> moved(size);
  for (std::size_t l = 0; l < system.n; ++l) {
    for (std::size_t i = 0; i < size; ++i) moved[system.pi[i]] = system.pattern[l][i];
    if (moved != system.pattern[(l + 1) % system.n]) return false;
  }
  return true;
}

std::uint64_t permutation_order(std::span<const std::size_t> pi) {
  std::vector<bool> seen(pi.size(), false);
  std::uint64_t order = 1;
  for (std::size_t start = 0; start < pi.size(); ++start) {
    if (seen[start]) continue;
    std::uint64_t len = 0;
    for (std::size_t i = start; !seen[i]; i = pi[i]) {
      if (i >= pi.size()) throw Error("permutation_order: not a permutation");
      seen[i] = true;
      ++len;
    }
    order = std::lcm(order, len);
  }
  return order;
}

std::int64_t pattern_dot(const ZSystem& system, std::size_t l1, std::size_t l2) {
  const auto& a = system.pattern.at(l1 - 1);
  const auto& b = system.pattern.at(l2 - 1);
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

EquivalenceEstimate equivalence_estimate(const ZSystem& system, const SymmetricNorm& norm, std::size_t trials,
                                         std::uint64_t seed) {
  if (trials < 1) throw Error("equivalence_estimate: trials must be at least 1");
  const LpNorm coef(system.target_p);
  EquivalenceEstimate est;
  est.n = system.n;
  est.description = std::string("case ") + to_string(system.kind) + " in " + norm.name() + " vs l" +
                    format_p(system.target_p) + "^" + std::to_string(system.n);
  est.lower = std::numeric_limits<double>::infinity();
  est.upper = 0.0;

  auto probe = [&](const std::vector<double>& a) {
    const double denom = coef(a);
    if (denom == 0.0) return;
    const double ratio = norm(system.combine(a)) / denom;
    est.lower = std::min(est.lower, ratio);
    est.upper = std::max(est.upper, ratio);
    ++est.directions;
  };

  const std::size_t n = system.n;
  for (std::size_t l = 0; l < n; ++l) {
    std::vector<double> a(n, 0.0);
    a[l] = 1.0;
    probe(a);
  }
  probe(ones(n));
  std::vector<double> alt(n);
  for (std::size_t l = 0; l < n; ++l) alt[l] = l % 2 == 0 ? 1.0 : -1.0;
  probe(alt);
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) probe(rng.normal_vector(n));
  return est;
}

const char* to_string(DetectedCase c) {
  switch (c) {
    case DetectedCase::I: return "I";
    case DetectedCase::II: return "II";
    case DetectedCase::III: return "III";
    case DetectedCase::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

struct RatioSearch {
  std::vector<std::size_t> witnesses;
  std::size_t fails_at = 0;
  bool improving_at_edge = false;
};

// For each n, the first m in 1..m_max with ratio(n, m) < 2.
template <typename Ratio>
RatioSearch search_ratio(std::size_t n_max, std::size_t m_max, Ratio ratio) {
  RatioSearch out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::size_t best_m = 1;
    double best = std::numeric_limits<double>::infinity();
    std::size_t witness = 0;
    for (std::size_t m = 1; m <= m_max; ++m) {
      const double r = ratio(n, m);
      if (r < best) {
        best = r;
        best_m = m;
      }
      if (r < 2.0 - kRatioMargin) {
        witness = m;
        break;
      }
    }
    if (witness == 0) {
      out.fails_at = n;
      out.improving_at_edge = m_max > 1 && best_m == m_max;
      return out;
    }
    out.witnesses.push_back(witness);
  }
  return out;
}

}  // namespace

CaseDetection detect_case(const SymmetricNorm& norm, std::size_t n_max, std::size_t m_max) {
  if (n_max < 1 || m_max < 1) throw Error("detect_case: n_max and m_max must be positive");
  std::map<std::size_t, double> cache;
  auto lambda = [&](std::size_t k) {
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, norm(ones(k))).first;
    return it->second;
  };
  auto mu = [&](std::size_t k) { return static_cast<double>(k) / lambda(k); };

  CaseDetection out;
  out.n_max = n_max;
  out.m_max = m_max;
  const RatioSearch one = search_ratio(n_max, m_max, [&](std::size_t n, std::size_t m) {
    return lambda(n * m) / lambda(m);
  });
  if (one.fails_at == 0) {
    out.kind = DetectedCase::I;
    out.witnesses = one.witnesses;
    out.note = "case I hypothesis holds for n <= " + std::to_string(n_max);
    return out;
  }
  const RatioSearch two = search_ratio(n_max, m_max, [&](std::size_t n, std::size_t m) { return mu(n * m) / mu(m); });
  out.case1_fails_at = one.fails_at;
  if (two.fails_at == 0) {
    out.kind = DetectedCase::II;
    out.witnesses = two.witnesses;
    out.note = "case II hypothesis holds for n <= " + std::to_string(n_max);
    return out;
  }
  out.case2_fails_at = two.fails_at;
  if (one.improving_at_edge || two.improving_at_edge) {
    out.kind = DetectedCase::Inconclusive;
    out.note = "ratio still decreasing at m = m_max; a larger search bound may find a witness";
    return out;
  }
  out.kind = DetectedCase::III;
  out.note = "cases I and II fail within the search bound";
  return out;
}

}  // namespace opm::symbasis
