#include "opmachine/machine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "opmachine/carousel.hpp"

namespace opm::machine {

namespace {

constexpr std::uint64_t kMaxHorizon = 16384;
// Upper limit on the summed bit lengths of T_1..T_horizon.
constexpr double kMaxScheduleBits = 2e8;
constexpr double kMembershipTol = 1e-12;

BigInt floor_mod(const BigInt& a, const BigInt& n) {
  BigInt r = a % n;
  if (r < 0) r += n;
  return r;
}

std::int64_t tent(std::int64_t y, std::int64_t m) {
  if (y < m) return y + 1;
  if (y < 2 * m - 1) return 2 * m - 1 - y;
  return 0;
}

// Integer carousel pattern at 0-based position y of a block with period T,
// width m, at phase r = t mod T.
std::int64_t count_at(std::int64_t T, std::int64_t m, std::int64_t r, std::int64_t y) {
  return tent(y, m) - tent(((y - r) % T + T) % T, m);
}

double L_value(NormKind p) {
  const carousel::PNorm L = carousel::estimate_constant_L(p);
  return L.value();
}

double lower_constant(NormKind p) {
  switch (p) {
    case NormKind::One: return 1.0;
    case NormKind::Two: return std::sqrt(2.0 / 3.0);
    case NormKind::Inf: return 1.0;
  }
  return 1.0;
}

// Per-copy norm accumulator. For p = 1 `lin` is the sum of |v|, for p = inf
// the maximum of |v|; for p = 2 `sq` is the sum of squares.
struct CopyAcc {
  explicit CopyAcc(NormKind kind) : p(kind) {}

  NormKind p;
  Rational lin{0};
  SurdSum sq;

  void add_pth(const Rational& v) {
    switch (p) {
      case NormKind::One: lin += v; break;
      case NormKind::Inf:
        if (v > lin) lin = v;
        break;
      case NormKind::Two: sq.add_rational(v); break;
    }
  }
  SurdSum norm_sq() const { return p == NormKind::Two ? sq : SurdSum(Rational(lin * lin)); }
};

// |a|^p eps^p S_p (p = 1, 2) or |a| eps max|c| (p = inf) for one block.
Rational block_pth(const schedule::Entry& e, NormKind p, const Rational& a, const BigInt& t) {
  if (a == 0) return 0;
  const BigInt s = carousel::bump_power_sum(e.T, e.m, t, p);
  if (s == 0) return 0;
  const Rational eps_p = e.eps_pth(p);
  if (p == NormKind::Two) return a * a * eps_p * Rational(s);
  return abs(a) * eps_p * Rational(s);
}

double pth_to_norm(const Rational& v, NormKind p) {
  return p == NormKind::Two ? std::sqrt(to_double(v)) : to_double(v);
}

double surd_sqrt(const SurdSum& s) {
  const long double v = s.to_long_double();
  return v <= 0 ? 0.0 : static_cast<double>(std::sqrt(v));
}

}  // namespace

// ---------------------------------------------------------------- building

Machine build_machine(const MachineConfig& config) {
  if (config.d < 2) throw Error("machine: d must be at least 2");
  if (config.E.dim() != config.d) throw Error("machine: E lives in dimension " + std::to_string(config.E.dim()));
  if (config.stages < 1) throw Error("machine: stage count N must be positive");
  if (config.k_max < 1) throw Error("machine: k_max must be positive");

  Machine m(config);
  m.config_.K = config.K == 0 ? sphere::default_K(config.d, config.stages) : config.K;
  for (int n = 1; n <= config.stages; ++n) m.nets_.push_back(sphere::build_net(config.d, n, config.E));
  m.feeds_ = sphere::enumerate_feeds(m.nets_, m.config_.K);

  const std::uint64_t horizon = m.feeds_.horizon();
  if (horizon > kMaxHorizon) {
    throw Error("machine: " + std::to_string(horizon) + " feeds exceed the supported horizon of " +
                std::to_string(kMaxHorizon) + " blocks; lower N or K");
  }
  if (config.k_max > horizon) {
    throw Error("machine: k_max = " + std::to_string(config.k_max) + " exceeds the " + std::to_string(horizon) +
                " enumerated feeds (C_{N+1} - 1)");
  }

  std::vector<int> stage_of(horizon);
  for (std::uint64_t k = 1; k <= horizon; ++k) stage_of[k - 1] = m.feeds_.stage_of(k);
  {
    double bits = 0.0, total = 0.0;
    for (int n : stage_of) {
      bits += config.variant.kind == schedule::Variant::Kind::Toy
                  ? std::log2(static_cast<double>(config.variant.factor))
                  : static_cast<double>(config.d) * n * std::log2(5.0);
      total += bits;
    }
    if (total > kMaxScheduleBits) throw Error("machine: schedule too large to materialize; lower N or K");
  }
  m.schedule_ = schedule::build_schedule(config.d, config.p, stage_of, horizon, config.variant);

  m.blocks_.reserve(horizon);
  for (std::uint64_t k = 1; k <= horizon; ++k) {
    BlockInfo b;
    b.k = k;
    b.stage = stage_of[k - 1];
    b.feed = k - 1;
    const sphere::UnitVector& w = m.feeds_.feed(k);
    b.rho_to_E = sphere::rho_to_set(w, config.E);
    if (!(b.rho_to_E > kMembershipTol)) throw Error("machine: feed w_" + std::to_string(k) + " lies in E");
    b.basis = sphere::perp_basis(w);
    // Only materialized blocks ever need sqrt(m_k) symbolically.
    if (k <= config.k_max) b.root_m = squarefree_decompose(m.schedule_.at(k).m);
    m.blocks_.push_back(std::move(b));
  }

  m.starts_.push_back(1);
  for (std::uint64_t k = 1; k <= config.k_max && m.layout_fits_; ++k) {
    const BigInt next = BigInt(m.starts_.back()) + m.schedule_.at(k).T;
    if (next > BigInt(INT64_MAX / 2)) {
      m.layout_fits_ = false;
      break;
    }
    m.starts_.push_back(next.convert_to<std::int64_t>());
  }
  m.L_ = L_value(config.p);
  return m;
}

std::int64_t Machine::block_start(std::uint64_t k) const {
  if (!layout_fits_) throw Error("machine: truncated slot layout exceeds 64-bit indices");
  if (k < 1 || k > config_.k_max) throw Error("machine: block " + std::to_string(k) + " is not materialized");
  return starts_[k - 1];
}

std::int64_t Machine::truncated_length() const {
  if (!layout_fits_) throw Error("machine: truncated slot layout exceeds 64-bit indices");
  return starts_.back() - 1;
}

std::uint64_t Machine::block_of_slot(std::int64_t slot) const {
  if (slot < 1 || slot > truncated_length()) {
    throw Error("machine: slot " + std::to_string(slot) + " lies outside blocks 1..k_max");
  }
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), slot);
  return static_cast<std::uint64_t>(it - starts_.begin());
}

// ------------------------------------------------------------------ state

PointState::PointState(const Machine& machine, std::vector<double> u, std::vector<SparseCopy> x)
    : machine_(&machine), u_(std::move(u)), x_(std::move(x)) {
  const std::size_t d = machine.d();
  if (u_.size() != d) throw Error("point state: u must have " + std::to_string(d) + " coordinates");
  if (x_.empty()) x_.resize(d - 1);
  if (x_.size() != d - 1) throw Error("point state: x must have d - 1 = " + std::to_string(d - 1) + " copies");
  u_sq_ = 0;
  for (double c : u_) {
    if (!std::isfinite(c)) throw Error("point state: u has a non-finite coordinate");
    const Rational q = exact_rational(c);
    u_sq_ += q * q;
  }
  amps_.resize(machine.horizon());
  for (std::uint64_t k = 1; k <= machine.horizon(); ++k) {
    const BlockInfo& b = machine.block(k);
    for (const auto& e : b.basis) amps_[k - 1].push_back(exact_rational(sphere::dot(u_, e) / b.rho_to_E));
  }
  by_block_.resize(d - 1);
  for (std::size_t j = 0; j < x_.size(); ++j) {
    std::sort(x_[j].begin(), x_[j].end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < x_[j].size(); ++i) {
      const auto& [slot, v] = x_[j][i];
      if (i > 0 && x_[j][i - 1].first == slot) throw Error("point state: duplicate slot in x");
      if (v == 0) continue;
      const std::uint64_t k = machine.block_of_slot(slot);
      by_block_[j].push_back({k, slot - machine.block_start(k), v});
    }
  }
}

double PointState::amplitude_value(std::uint64_t k, std::size_t j) const { return to_double(amplitude(k, j)); }

bool PointState::x_is_zero() const {
  return std::all_of(by_block_.begin(), by_block_.end(), [](const auto& v) { return v.empty(); });
}

// ------------------------------------------------------------- evaluation

namespace {

int stage_at_time(const Machine& machine, const BigInt& t) {
  const auto& entries = machine.schedule().entries;
  auto it = std::upper_bound(entries.begin(), entries.end(), t,
                             [](const BigInt& tt, const schedule::Entry& e) { return tt < e.m; });
  if (it == entries.begin()) return 0;
  return std::prev(it)->stage;
}

// Adds block k of copy j (with its x entries) to `acc`, coordinate-exactly.
void add_block_with_x(const Machine& machine, const PointState& state, std::uint64_t k, std::size_t j,
                      std::span<const PointState::Entry> entries, const BigInt& t, CopyAcc& acc) {
  const schedule::Entry& e = machine.schedule().at(k);
  const NormKind p = machine.p();
  const std::int64_t T = e.T.convert_to<std::int64_t>();
  const std::int64_t m = e.m.convert_to<std::int64_t>();
  const std::int64_t r = floor_mod(t, e.T).convert_to<std::int64_t>();
  const Rational& a = state.amplitude(k, j);

  std::vector<std::pair<std::int64_t, Rational>> shifted;
  shifted.reserve(entries.size());
  for (const auto& x : entries) shifted.emplace_back((x.local + r) % T, x.value);

  if (p == NormKind::Inf) {
    const Rational delta = a * e.eps_pth(p);
    std::set<std::int64_t> occupied;
    for (const auto& [y, v] : shifted) {
      occupied.insert(y);
      acc.add_pth(abs(Rational(v + delta * count_at(T, m, r, y))));
    }
    if (delta != 0) {
      const auto params = carousel::CarouselParams::make(e.T, e.m, Rational(1), p);
      for (const auto& [pos, c] : carousel::bump_counts(params, t)) {
        if (!occupied.count(pos - 1)) acc.add_pth(abs(Rational(delta * c)));
      }
    }
    return;
  }

  acc.add_pth(block_pth(e, p, a, t));
  if (p == NormKind::One) {
    const Rational delta = a * e.eps_pth(p);
    for (const auto& [y, v] : shifted) {
      const Rational carousel_v = delta * count_at(T, m, r, y);
      acc.lin += abs(Rational(v + carousel_v)) - abs(carousel_v);
    }
    return;
  }
  // p = 2: value = v + gamma c sqrt(m) with gamma = a n / m^2.
  const Rational gamma = a * Rational(BigInt(e.stage), e.m * e.m);
  for (const auto& [y, v] : shifted) {
    acc.sq.add_rational(v * v);
    acc.sq.add_root(2 * v * gamma * count_at(T, m, r, y), machine.block(k).root_m);
  }
}

Rational x_copy_pth(const std::vector<PointState::Entry>& entries, NormKind p) {
  Rational s = 0;
  for (const auto& x : entries) {
    const Rational a = abs(x.value);
    if (p == NormKind::One) s += a;
    if (p == NormKind::Two) s += a * a;
    if (p == NormKind::Inf && a > s) s = a;
  }
  return s;
}

}  // namespace

OrbitRecord orbit_norm(const PointState& state, const BigInt& t, std::span<const std::uint64_t> extra_blocks) {
  if (t < 0) throw Error("orbit_norm: t must be non-negative");
  const Machine& machine = state.machine();
  const NormKind p = machine.p();
  const std::size_t copies = machine.copies();
  for (std::uint64_t k : extra_blocks) {
    if (k <= machine.k_max() || k > machine.horizon()) throw Error("orbit_norm: extra block out of range");
  }

  OrbitRecord rec;
  rec.t = t;
  rec.stage = stage_at_time(machine, t);
  rec.block_contribution.assign(machine.k_max(), 0.0);

  SurdSum total_sq(state.u_norm_sq());
  Rational perturb_sq = 0;
  Rational shift_sq = 0;
  for (std::size_t j = 0; j < copies; ++j) {
    CopyAcc full(p);
    CopyAcc pert(p);
    const auto& xs = state.x_entries(j);
    std::size_t cursor = 0;
    auto visit = [&](std::uint64_t k) {
      const Rational pth = block_pth(machine.schedule().at(k), p, state.amplitude(k, j), t);
      pert.add_pth(pth);
      if (k <= machine.k_max()) {
        const double v = pth_to_norm(pth, p);
        rec.block_contribution[k - 1] = std::hypot(rec.block_contribution[k - 1], v);
      }
      std::size_t end = cursor;
      while (end < xs.size() && xs[end].k == k) ++end;
      if (end == cursor) {
        full.add_pth(pth);
      } else {
        add_block_with_x(machine, state, k, j, std::span(xs).subspan(cursor, end - cursor), t, full);
      }
      cursor = end;
    };
    for (std::uint64_t k = 1; k <= machine.k_max(); ++k) visit(k);
    for (std::uint64_t k : extra_blocks) visit(k);
    total_sq += full.norm_sq();
    const SurdSum pq = pert.norm_sq();
    perturb_sq += pq.rational_part();  // rational: no x means no surds
    const Rational xs_pth = x_copy_pth(xs, p);
    shift_sq += p == NormKind::Two ? xs_pth : xs_pth * xs_pth;
  }
  rec.total_sq = std::move(total_sq);
  rec.total = surd_sqrt(rec.total_sq);
  rec.perturb_part = std::sqrt(to_double(perturb_sq));
  rec.shift_part = std::sqrt(to_double(shift_sq));
  rec.tail_bound = tail_bound_at(state, machine.k_max(), t, extra_blocks);
  return rec;
}

OrbitRecord orbit_norm(const Machine& machine, std::span<const double> u, const std::vector<SparseCopy>& x,
                       const BigInt& t) {
  const PointState state(machine, std::vector<double>(u.begin(), u.end()), x);
  return orbit_norm(state, t);
}

std::vector<SurdSum> copy_values(const PointState& state, const BigInt& t, std::size_t j,
                                 std::span<const std::int64_t> slots) {
  const Machine& machine = state.machine();
  if (j >= machine.copies()) throw Error("copy_values: copy index out of range");
  const NormKind p = machine.p();
  std::map<std::int64_t, Rational> x_at;
  for (const auto& [slot, v] : state.x()[j]) x_at.emplace(slot, v);

  std::vector<SurdSum> out;
  out.reserve(slots.size());
  for (std::int64_t slot : slots) {
    const std::uint64_t k = machine.block_of_slot(slot);
    const schedule::Entry& e = machine.schedule().at(k);
    const std::int64_t T = e.T.convert_to<std::int64_t>();
    const std::int64_t m = e.m.convert_to<std::int64_t>();
    const std::int64_t r = floor_mod(t, e.T).convert_to<std::int64_t>();
    const std::int64_t start = machine.block_start(k);
    const std::int64_t local = slot - start;
    SurdSum v;
    if (auto it = x_at.find(start + ((local - r) % T + T) % T); it != x_at.end()) v.add_rational(it->second);
    const std::int64_t c = count_at(T, m, r, local);
    const Rational& a = state.amplitude(k, j);
    if (c != 0 && a != 0) {
      if (p == NormKind::Two) {
        v.add_root(a * Rational(BigInt(e.stage), e.m * e.m) * c, machine.block(k).root_m);
      } else {
        v.add_rational(a * e.eps_pth(p) * c);
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

double tail_bound_at(const PointState& state, std::uint64_t k_cut, const BigInt& t,
                     std::span<const std::uint64_t> skip) {
  const Machine& machine = state.machine();
  const std::size_t copies = machine.copies();
  std::vector<double> sums(copies, 0.0);
  for (std::uint64_t k = k_cut + 1; k <= machine.horizon(); ++k) {
    if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
    const schedule::Entry& e = machine.schedule().at(k);
    const BigInt r = floor_mod(t, e.T);
    const BigInt phase = std::min({r, BigInt(e.T - r), e.m});
    if (phase == 0) continue;
    const double factor = machine.constant_L() * e.stage * to_double(Rational(phase, e.m));
    for (std::size_t j = 0; j < copies; ++j) sums[j] += factor * std::abs(state.amplitude_value(k, j));
  }
  double sq = 0.0;
  for (double s : sums) sq += s * s;
  return std::sqrt(sq);
}

double tail_bound(const Machine& machine, std::span<const double> u, std::uint64_t k_cut) {
  const PointState state(machine, std::vector<double>(u.begin(), u.end()));
  return tail_bound_at(state, k_cut, BigInt(1));
}

// ----------------------------------------------------------- dense oracle

std::vector<OrbitRecord> dense_oracle(const PointState& state, std::uint64_t steps) {
  const Machine& machine = state.machine();
  const NormKind p = machine.p();
  const std::size_t copies = machine.copies();
  const std::uint64_t kmax = machine.k_max();
  const double updates = static_cast<double>(steps + 1) * static_cast<double>(machine.truncated_length()) *
                         static_cast<double>(copies);
  if (updates > kDenseBudget) {
    throw Error("dense_oracle: " + std::to_string(updates) + " coordinate updates exceed the budget of 1e7");
  }

  // Coordinates alpha + beta sqrt(m_k) per block; beta stays 0 unless p = 2.
  struct Block {
    std::vector<Rational> alpha, beta;
  };
  std::vector<std::vector<Block>> coords(copies, std::vector<Block>(kmax));
  for (std::size_t j = 0; j < copies; ++j) {
    for (std::uint64_t k = 1; k <= kmax; ++k) {
      const auto T = static_cast<std::size_t>(machine.schedule().at(k).T.convert_to<std::int64_t>());
      coords[j][k - 1].alpha.assign(T, Rational(0));
      coords[j][k - 1].beta.assign(T, Rational(0));
    }
    for (const auto& [slot, v] : state.x()[j]) {
      const std::uint64_t k = machine.block_of_slot(slot);
      coords[j][k - 1].alpha[static_cast<std::size_t>(slot - machine.block_start(k))] = v;
    }
  }

  auto record = [&](std::uint64_t t) {
    OrbitRecord rec;
    rec.t = t;
    rec.stage = stage_at_time(machine, BigInt(t));
    SurdSum total(state.u_norm_sq());
    for (std::size_t j = 0; j < copies; ++j) {
      Rational lin = 0;
      SurdSum sq;
      for (std::uint64_t k = 1; k <= kmax; ++k) {
        const Block& b = coords[j][k - 1];
        const BigInt& m = machine.schedule().at(k).m;
        for (std::size_t i = 0; i < b.alpha.size(); ++i) {
          if (p == NormKind::Two) {
            sq.add_rational(b.alpha[i] * b.alpha[i] + b.beta[i] * b.beta[i] * m);
            sq.add_root(2 * b.alpha[i] * b.beta[i], machine.block(k).root_m);
          } else if (p == NormKind::One) {
            lin += abs(b.alpha[i]);
          } else {
            lin = std::max(lin, abs(b.alpha[i]));
          }
        }
      }
      total += p == NormKind::Two ? sq : SurdSum(Rational(lin * lin));
    }
    rec.total_sq = std::move(total);
    rec.total = surd_sqrt(rec.total_sq);
    return rec;
  };

  std::vector<OrbitRecord> out;
  out.reserve(steps + 1);
  out.push_back(record(0));
  for (std::uint64_t t = 1; t <= steps; ++t) {
    for (std::size_t j = 0; j < copies; ++j) {
      for (std::uint64_t k = 1; k <= kmax; ++k) {
        Block& b = coords[j][k - 1];
        // S: position i receives position i - 1 cyclically.
        std::rotate(b.alpha.rbegin(), b.alpha.rbegin() + 1, b.alpha.rend());
        std::rotate(b.beta.rbegin(), b.beta.rbegin() + 1, b.beta.rend());
        const schedule::Entry& e = machine.schedule().at(k);
        const Rational& a = state.amplitude(k, j);
        if (a == 0) continue;
        const auto m = static_cast<std::size_t>(e.m.convert_to<std::int64_t>());
        auto& target = p == NormKind::Two ? b.beta : b.alpha;
        const Rational deposit =
            p == NormKind::Two ? Rational(a * Rational(BigInt(e.stage), e.m * e.m)) : Rational(a * e.eps_pth(p));
        for (std::size_t i = 0; i < m; ++i) target[i] += deposit;
        for (std::size_t i = m; i < 2 * m; ++i) target[i] -= deposit;
      }
    }
    out.push_back(record(t));
  }
  return out;
}

// ------------------------------------------------------------- divergence

std::vector<BigInt> window_samples(const BigInt& lo, const BigInt& hi, const Sampling& rule) {
  std::vector<BigInt> out;
  if (hi <= lo) return out;
  const BigInt count = hi - lo;
  if (count <= rule.dense_limit) {
    for (BigInt t = lo; t < hi; ++t) out.push_back(t);
    return out;
  }
  const std::size_t s = std::max<std::size_t>(rule.sparse_samples, 2);
  for (std::size_t i = 0; i < s; ++i) {
    out.push_back(lo + (count - 1) * BigInt(i) / BigInt(s - 1));
  }
  return out;
}

std::vector<DivergenceStage> divergence_trace(const Machine& machine, const sphere::UnitVector& u, int stages,
                                              const Sampling& rule) {
  if (u.dim() != machine.d()) throw Error("divergence_trace: dimension mismatch");
  const double dist = sphere::rho_to_set(u, machine.config().E);
  if (dist > kMembershipTol) {
    throw Error("divergence_trace: u is not in E (rho(u,E) = " + decimal_string(dist) + "); use near_return");
  }
  if (stages < 1 || stages > machine.feeds().stages()) {
    throw Error("divergence_trace: stages must lie in 1.." + std::to_string(machine.feeds().stages()));
  }
  const NormKind p = machine.p();
  const PointState state(machine, std::vector<double>(u.coords().begin(), u.coords().end()));

  std::vector<DivergenceStage> out;
  for (int n = 1; n <= stages; ++n) {
    DivergenceStage st;
    st.stage = n;
    st.k = machine.feeds().boundary(n);
    const schedule::Entry& e = machine.schedule().at(st.k);
    st.window_lo = e.m;
    st.window_hi = e.T - e.m;
    double amp_sq = 0.0;
    for (std::size_t j = 0; j < machine.copies(); ++j) amp_sq += std::pow(state.amplitude_value(st.k, j), 2);
    st.generic_bound = lower_constant(p) * n;
    st.certified = st.generic_bound * std::sqrt(amp_sq);

    std::vector<std::uint64_t> extra;
    if (st.k > machine.k_max()) extra.push_back(st.k);
    st.block_lower_exact = true;
    st.min_total = INFINITY;
    st.min_slack = INFINITY;
    for (const BigInt& t : window_samples(st.window_lo, st.window_hi, rule)) {
      const OrbitRecord rec = orbit_norm(state, t, extra);
      ++st.samples;
      if (rec.total < st.min_total) {
        st.min_total = rec.total;
        st.argmin_t = t;
      }
      st.max_tail = std::max(st.max_tail, rec.tail_bound);
      st.min_slack = std::min(st.min_slack, rec.total - (st.generic_bound - rec.tail_bound));
      const BigInt s = carousel::bump_power_sum(e.T, e.m, t, p);
      bool ok = false;
      switch (p) {
        case NormKind::One: ok = s >= e.m * e.m; break;
        case NormKind::Two: ok = 3 * s >= 2 * e.m * e.m * e.m; break;
        case NormKind::Inf: ok = s >= e.m; break;
      }
      st.block_lower_exact = st.block_lower_exact && ok;
    }
    out.push_back(std::move(st));
  }
  return out;
}

// ------------------------------------------------------------ near return

int near_return_n0(const Machine& machine, const sphere::UnitVector& u) {
  const double dist = sphere::rho_to_set(u, machine.config().E);
  if (dist <= kMembershipTol) throw Error("near_return: u lies in E (rho(u,E) = 0); use divergence_trace");
  int n0 = 1;
  while (dist < std::ldexp(1.0, -n0)) ++n0;
  return n0;
}

NearReturn near_return(const Machine& machine, const sphere::UnitVector& u, int stage) {
  if (u.dim() != machine.d()) throw Error("near_return: dimension mismatch");
  NearReturn out;
  out.n0 = near_return_n0(machine, u);
  out.stage = stage;
  if (stage <= out.n0 || stage > machine.feeds().stages()) {
    throw Error("near_return: stage must satisfy n0 < n <= N (n0 = " + std::to_string(out.n0) +
                ", N = " + std::to_string(machine.feeds().stages()) + ", n = " + std::to_string(stage) + ")");
  }
  const PointState state(machine, std::vector<double>(u.coords().begin(), u.coords().end()));
  const std::uint64_t first = machine.feeds().boundary(stage);
  const std::uint64_t last = machine.feeds().boundary(stage + 1);
  double best = INFINITY;
  for (std::uint64_t k = first; k < last; ++k) {
    const auto delta = sphere::delta(machine.w(k), machine.config().E, u);
    double sq = 0.0;
    for (double c : delta) sq += c * c;
    const double norm = std::sqrt(sq);
    if (norm < best) {
      best = norm;
      out.k_n = k;
    }
  }
  out.delta_norm = best;
  out.t = machine.schedule().period(out.k_n - 1);

  const NormKind p = machine.p();
  out.earlier_blocks_zero = true;
  Rational total = 0;
  for (std::size_t j = 0; j < machine.copies(); ++j) {
    CopyAcc acc(p);
    for (std::uint64_t k = 1; k <= machine.horizon(); ++k) {
      const Rational pth = block_pth(machine.schedule().at(k), p, state.amplitude(k, j), out.t);
      if (k < out.k_n && pth != 0) out.earlier_blocks_zero = false;
      acc.add_pth(pth);
    }
    total += acc.norm_sq().rational_part();
  }
  // Blocks before k_n vanish identically: T_r divides T_{k_n - 1}.
  for (std::uint64_t k = 1; k < out.k_n; ++k) {
    if (out.t % machine.schedule().at(k).T != 0) out.earlier_blocks_zero = false;
  }
  out.deficit_sq = SurdSum(total);
  out.deficit = std::sqrt(to_double(total));
  out.bound = tail_bound_at(state, out.k_n - 1, out.t);
  return out;
}

// ------------------------------------------------------------- weak probe

WeakProbe weak_probe(const PointState& state, const Functional& f, std::uint64_t k) {
  const Machine& machine = state.machine();
  if (k < 1 || k > machine.horizon()) throw Error("weak_probe: block index out of range");
  if (!f.u_coeffs.empty() && f.u_coeffs.size() != machine.d()) throw Error("weak_probe: u functional has wrong size");
  const BigInt t = machine.schedule().period(k);
  WeakProbe out;
  // The u-part is invariant under R, so its terms cancel exactly.
  for (const auto& [j, slot, coef] : f.x_coeffs) {
    const std::int64_t s[1] = {slot};
    SurdSum now = copy_values(state, t, j, s).front();
    now -= copy_values(state, BigInt(0), j, s).front();
    now *= coef;
    out.difference += now;
  }
  out.magnitude = std::abs(static_cast<double>(out.difference.to_long_double()));
  return out;
}

}  // namespace opm::machine
