#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "internal.hpp"
#include "opmachine/carousel.hpp"
#include "opmachine/cli.hpp"
#include "opmachine/jordan.hpp"
#include "opmachine/symbasis.hpp"

#ifndef OPMACHINE_VERSION
#define OPMACHINE_VERSION "unknown"
#endif

namespace opm::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Result {
  std::string csv;
  ordered_json metadata = ordered_json::object();
  int exit_code = kExitOk;
  std::string message;
};

using Handler = std::function<Result(ConfigReader&, std::uint64_t seed)>;

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::vector<std::string> string_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_number_integer()) {
      out.push_back(std::to_string(e.get<std::int64_t>()));
    } else {
      throw ConfigError(where + ": expected strings or integers");
    }
  }
  return out;
}

std::pair<std::int64_t, std::int64_t> int_range(const json& v, const std::string& where, std::int64_t lo,
                                                std::int64_t hi) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ConfigError(where + ": expected [min, max] integers");
  }
  const auto a = v[0].get<std::int64_t>();
  const auto b = v[1].get<std::int64_t>();
  if (a > b || a < lo || b > hi) {
    throw ConfigError(where + ": range must satisfy " + std::to_string(lo) + " <= min <= max <= " +
                      std::to_string(hi));
  }
  return {a, b};
}

machine::Sampling read_sampling(ConfigReader& root) {
  ConfigReader s = root.child("sampling");
  machine::Sampling rule;
  rule.dense_limit = static_cast<std::size_t>(s.integer("dense_limit", 2048, 1, 1 << 20));
  rule.sparse_samples = static_cast<std::size_t>(s.integer("sparse_samples", 257, 2, 1 << 16));
  root.adopt("sampling", s);
  return rule;
}

machine::Machine build_or_config_error(const machine::MachineConfig& cfg) {
  try {
    return machine::build_machine(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("machine: ") + e.what());
  }
}

ordered_json machine_metadata(const machine::Machine& m) {
  ordered_json out = ordered_json::object();
  out["K"] = m.feeds().K();
  out["N"] = m.feeds().stages();
  out["horizon"] = m.horizon();
  out["k_max"] = m.k_max();
  out["constant_L"] = fmt(m.constant_L());
  out["boundaries"] = m.feeds().boundaries();
  ordered_json nets = ordered_json::array();
  for (const auto& net : m.nets()) {
    nets.push_back({{"stage", net.stage}, {"mesh", fmt(net.mesh)}, {"points", net.points.size()}});
  }
  out["nets"] = nets;
  ordered_json sched = ordered_json::array();
  for (std::uint64_t k = 1; k <= m.k_max(); ++k) {
    const auto& e = m.schedule().at(k);
    sched.push_back({{"k", k},
                     {"stage", e.stage},
                     {"m", fmt(e.m)},
                     {"T", fmt(e.T)},
                     {"eps", fmt(e.eps_value(m.p()))},
                     {"eps_pth", exact_string(e.eps_pth(m.p()))}});
  }
  out["schedule"] = sched;
  return out;
}

std::vector<double> read_vector_or(ConfigReader& r, const std::string& key, std::vector<double> fallback,
                                   std::size_t d) {
  const json v = r.raw_or(key, fallback);
  std::vector<double> out = json_vector(v, key);
  if (out.size() != d) throw ConfigError(key + ": expected " + std::to_string(d) + " coordinates");
  return out;
}

// ---------------------------------------------------------------- carousel

struct CarouselCase {
  NormKind p;
  BigInt m, T;
  Rational eps, a;
};

Result cmd_verify_carousel(ConfigReader& root, std::uint64_t) {
  std::vector<CarouselCase> cases;
  if (root.has("cases")) {
    const json* raw = root.raw("cases");
    if (!raw->is_array() || raw->empty()) throw ConfigError("cases: expected a non-empty array");
    for (std::size_t i = 0; i < raw->size(); ++i) {
      ConfigReader c((*raw)[i], "cases[" + std::to_string(i) + "]");
      CarouselCase cc;
      cc.p = parse_norm_kind(c.text("p", "2"), "cases.p");
      cc.m = BigInt(c.integer("m", 1, 1, 1 << 20));
      cc.T = BigInt(c.integer("T", 4, 1, 1 << 24));
      cc.eps = c.rational("eps", "1");
      cc.a = c.rational("a", "1");
      c.finish();
      cases.push_back(std::move(cc));
    }
  } else {
    const auto ps = string_list(root.raw_or("p", json::array({"1", "2", "inf"})), "p");
    const auto [m_lo, m_hi] = int_range(root.raw_or("m", json::array({1, 4})), "m", 1, 64);
    const auto [f_lo, f_hi] = int_range(root.raw_or("T_factor", json::array({4, 8})), "T_factor", 1, 64);
    const auto as = string_list(root.raw_or("a", json::array({"1", "-3", "1/2"})), "a");
    const Rational eps = root.rational("eps", "1");
    std::vector<Rational> amps;
    for (const auto& s : as) amps.push_back(json_rational(json(s), "a"));
    for (const auto& ps_i : ps) {
      const NormKind p = parse_norm_kind(ps_i, "p");
      for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        for (std::int64_t T = f_lo * m; T <= f_hi * m; ++T) {
          for (const auto& a : amps) cases.push_back({p, BigInt(m), BigInt(T), eps, a});
        }
      }
    }
  }
  root.finish();
  for (const auto& c : cases) {
    if (4 * c.m > c.T) {
      throw ConfigError("carousel case m=" + fmt(c.m) + ", T=" + fmt(c.T) + " violates 4m <= T");
    }
    if (c.eps <= 0) throw ConfigError("carousel eps must be positive");
  }

  CsvWriter csv({"p", "m", "T", "eps", "a", "t", "kind", "norm", "norm_pth", "norm_pth_exact", "bound", "bound_pth",
                 "bound_pth_exact", "satisfied"});
  Result res;
  std::size_t violations = 0;
  for (const auto& c : cases) {
    const auto params = carousel::CarouselParams::make(c.T, c.m, c.eps, c.p);
    const auto report = carousel::verify_estimates(params, c.a);
    for (const auto& r : report.records) {
      double bound = to_double(r.bound_pth);
      if (c.p == NormKind::Two) bound = std::sqrt(bound);
      csv.row({to_string(c.p), fmt(c.m), fmt(c.T), exact_string(c.eps), exact_string(c.a), std::to_string(r.t),
               carousel::to_string(r.kind), fmt(r.norm.value()), fmt(r.norm.pth_power),
               exact_string(r.norm.pth_power), fmt(bound), fmt(r.bound_pth), exact_string(r.bound_pth),
               bool_str(r.satisfied)});
      if (!r.satisfied) {
        if (violations == 0) {
          res.message = std::string("violation: p=") + to_string(c.p) + " m=" + fmt(c.m) + " T=" + fmt(c.T) +
                        " a=" + exact_string(c.a) + " t=" + std::to_string(r.t) + " " + carousel::to_string(r.kind) +
                        " estimate";
        }
        ++violations;
      }
    }
  }
  res.csv = csv.str();
  res.metadata["cases"] = cases.size();
  res.metadata["rows"] = csv.rows();
  res.metadata["violations"] = violations;
  res.exit_code = violations == 0 ? kExitOk : kExitViolation;
  return res;
}

// ---------------------------------------------------------------- nets

Result cmd_build_net(ConfigReader& root, std::uint64_t) {
  const auto d = static_cast<std::size_t>(root.integer("d", 2, 2, 8));
  const int N = static_cast<int>(root.integer("N", 3, 1, 12));
  std::vector<double> e1(d, 0.0);
  e1[0] = 1.0;
  const sphere::SymmetricSet E =
      parse_symmetric_set(root.raw_or("E", json::array({{{"type", "pair"}, {"center", e1}}})), d);
  root.finish();

  CsvWriter csv({"stage", "index", "mesh", "rho_to_E", "coords"});
  Result res;
  ordered_json stages = ordered_json::array();
  for (int n = 1; n <= N; ++n) {
    const std::uint64_t grid = sphere::grid_size(d, n);
    if (static_cast<double>(grid) > 4e6) throw ConfigError("build-net: stage " + std::to_string(n) + " grid too large");
    const sphere::Net net = sphere::build_net(d, n, E);
    for (std::size_t i = 0; i < net.points.size(); ++i) {
      std::string coords;
      for (std::size_t c = 0; c < d; ++c) coords += (c ? " " : "") + fmt(net.points[i][c]);
      csv.row({std::to_string(n), std::to_string(i + 1), fmt(net.mesh), fmt(sphere::rho_to_set(net.points[i], E)),
               coords});
    }
    stages.push_back({{"stage", n}, {"mesh", fmt(net.mesh)}, {"grid_size", grid}, {"points", net.points.size()}});
  }
  res.csv = csv.str();
  res.metadata["nets"] = stages;
  res.metadata["default_K"] = sphere::default_K(d, N);
  return res;
}

// ---------------------------------------------------------------- schedule

Result cmd_build_schedule(ConfigReader& root, std::uint64_t) {
  const auto d = static_cast<std::size_t>(root.integer("d", 2, 2, 8));
  const NormKind p = parse_norm_kind(root.text("p", "2"), "p");
  const std::string variant = root.text("variant", "toy");
  const int N = static_cast<int>(root.integer("N", 3, 1, 12));
  const auto K_in = static_cast<std::uint64_t>(root.integer("K", 0, 0, 1 << 20));
  std::uint64_t k_max = 0;
  unsigned factor = 0;
  unsigned bits = 0;
  if (variant == "toy") {
    factor = static_cast<unsigned>(root.integer("factor", 5, 1, 1 << 20));
    k_max = static_cast<std::uint64_t>(root.integer("k_max", 10, 1, 4096));
  } else if (variant == "paper") {
    if (root.has("paper_bits")) {
      bits = static_cast<unsigned>(root.integer("paper_bits", 256, 2, 1 << 20));
    } else {
      k_max = static_cast<std::uint64_t>(root.integer("k_max", 6, 1, 4096));
    }
  } else {
    throw ConfigError("variant: expected \"toy\" or \"paper\"");
  }
  root.finish();

  const std::uint64_t K = K_in == 0 ? sphere::default_K(d, N) : K_in;
  const std::vector<int> stage_of = sphere::stage_map(K, d, N);
  schedule::Schedule s;
  try {
    if (bits > 0) {
      s = schedule::build_paper_schedule_below(d, p, stage_of, bits);
    } else {
      s = schedule::build_schedule(d, p, stage_of, k_max,
                                   variant == "toy" ? schedule::Variant::toy(factor) : schedule::Variant::paper());
    }
  } catch (const Error& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }

  CsvWriter csv({"k", "stage", "m", "T", "eps", "eps_pth_exact", "four_m_le_T"});
  for (const auto& e : s.entries) {
    csv.row({std::to_string(e.k), std::to_string(e.stage), fmt(e.m), fmt(e.T), fmt(e.eps_value(p)),
             exact_string(e.eps_pth(p)), bool_str(4 * e.m <= e.T)});
  }
  const auto report = schedule::check_invariants(s);
  Result res;
  res.csv = csv.str();
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"status", schedule::to_string(c.status)}, {"witness", c.witness}});
    if (c.status == schedule::CheckStatus::Fail && res.message.empty()) {
      res.message = "invariant failed: " + c.name + " at " + c.witness;
    }
  }
  res.metadata["K"] = K;
  res.metadata["variant"] = s.variant.str();
  res.metadata["entries"] = s.size();
  res.metadata["invariants"] = checks;
  res.exit_code = report.passed() ? kExitOk : kExitViolation;
  return res;
}

// ---------------------------------------------------------------- machine

Result cmd_run_orbit(ConfigReader& root, std::uint64_t) {
  ConfigReader mr = root.child("machine");
  const machine::MachineConfig cfg = read_machine_config(mr);
  root.adopt("machine", mr);
  std::vector<double> e1(cfg.d, 0.0);
  e1[0] = 1.0;
  const std::vector<double> u = read_vector_or(root, "u", e1, cfg.d);
  for (double c : u) {
    if (!std::isfinite(c)) throw ConfigError("u: entries must be finite");
  }
  const std::vector<machine::SparseCopy> x = read_x(root, cfg.d - 1);
  const machine::Sampling rule = read_sampling(root);
  root.finish();

  const machine::Machine m = build_or_config_error(cfg);
  std::vector<machine::SparseCopy> xs = x;
  for (auto& copy : xs) {
    std::sort(copy.begin(), copy.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < copy.size(); ++i) {
      if (copy[i].first == copy[i - 1].first) throw ConfigError("x: duplicate slot " + std::to_string(copy[i].first));
    }
    for (const auto& [slot, v] : copy) {
      if (slot > m.truncated_length()) {
        throw ConfigError("x: slot " + std::to_string(slot) + " beyond the evaluated blocks (length " +
                          std::to_string(m.truncated_length()) + ")");
      }
    }
  }
  const machine::PointState state(m, u, xs);

  std::set<BigInt> times{BigInt(0)};
  for (std::uint64_t k = 1; k <= m.k_max(); ++k) {
    const auto& e = m.schedule().at(k);
    for (const BigInt& t : machine::window_samples(e.m, e.T - e.m, rule)) times.insert(t);
    times.insert(e.T - 1);
    times.insert(e.T);
  }

  CsvWriter csv({"t", "stage", "total", "shift_part", "perturb_part", "tail_bound", "total_sq_exact"});
  Result res;
  bool u_zero = std::all_of(u.begin(), u.end(), [](double c) { return c == 0.0; });
  std::optional<SurdSum> first;
  bool isometry_ok = true;
  for (const BigInt& t : times) {
    const machine::OrbitRecord r = machine::orbit_norm(state, t);
    csv.row({fmt(t), std::to_string(r.stage), fmt(r.total), fmt(r.shift_part), fmt(r.perturb_part),
             fmt(r.tail_bound), r.total_sq.str()});
    if (!first) first = r.total_sq;
    if (u_zero && !(r.total_sq == *first)) {
      if (isometry_ok) res.message = "violation: ||R^t(0,x)|| changed at t=" + fmt(t);
      isometry_ok = false;
    }
  }
  res.csv = csv.str();
  res.metadata["machine"] = machine_metadata(m);
  res.metadata["samples"] = times.size();
  res.metadata["x_only"] = u_zero;
  res.exit_code = isometry_ok ? kExitOk : kExitViolation;
  return res;
}

Result cmd_near_return(ConfigReader& root, std::uint64_t) {
  ConfigReader mr = root.child("machine");
  const machine::MachineConfig cfg = read_machine_config(mr);
  root.adopt("machine", mr);
  std::vector<double> e2(cfg.d, 0.0);
  e2[1] = 1.0;
  const std::vector<double> u_raw = read_vector_or(root, "u", e2, cfg.d);
  root.finish();

  const machine::Machine m = build_or_config_error(cfg);
  std::optional<sphere::UnitVector> u;
  int n0 = 0;
  try {
    u.emplace(u_raw);
    n0 = machine::near_return_n0(m, *u);
  } catch (const Error& e) {
    throw ConfigError(std::string("u: ") + e.what());
  }

  CsvWriter csv({"stage", "n0", "k_n", "t", "delta_norm", "deficit", "bound", "deficit_sq_exact",
                 "earlier_blocks_zero", "within_bound"});
  Result res;
  bool ok = true;
  for (int n = n0 + 1; n <= m.feeds().stages(); ++n) {
    const machine::NearReturn r = machine::near_return(m, *u, n);
    const bool within = r.deficit <= r.bound * (1.0 + 1e-12) + 1e-300;
    csv.row({std::to_string(n), std::to_string(r.n0), std::to_string(r.k_n), fmt(r.t), fmt(r.delta_norm),
             fmt(r.deficit), fmt(r.bound), r.deficit_sq.str(), bool_str(r.earlier_blocks_zero), bool_str(within)});
    if ((!within || !r.earlier_blocks_zero) && ok) {
      res.message = "violation at stage " + std::to_string(n);
      ok = false;
    }
  }
  res.csv = csv.str();
  res.metadata["machine"] = machine_metadata(m);
  res.metadata["n0"] = n0;
  res.exit_code = ok ? kExitOk : kExitViolation;
  return res;
}

// ---------------------------------------------------------------- jordan

jordan::Complex json_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(where + ": expected a number or [re, im]");
}

Result cmd_classify(ConfigReader& root, std::uint64_t) {
  const json* mat = root.raw("matrix");
  if (mat == nullptr) throw ConfigError("matrix: required");
  if (!mat->is_array() || mat->empty()) throw ConfigError("matrix: expected a non-empty array of rows");
  const auto N = static_cast<Eigen::Index>(mat->size());
  Eigen::MatrixXcd A(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const json& row = (*mat)[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != N) throw ConfigError("matrix: must be square");
    for (Eigen::Index j = 0; j < N; ++j) A(i, j) = json_complex(row[static_cast<std::size_t>(j)], "matrix");
  }
  std::vector<Eigen::VectorXcd> vectors;
  if (const json* vs = root.raw("vectors")) {
    if (!vs->is_array() || vs->empty()) throw ConfigError("vectors: expected a non-empty array");
    for (const auto& v : *vs) {
      if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != N) {
        throw ConfigError("vectors: each vector needs " + std::to_string(N) + " entries");
      }
      Eigen::VectorXcd x(N);
      for (Eigen::Index i = 0; i < N; ++i) x(i) = json_complex(v[static_cast<std::size_t>(i)], "vectors");
      vectors.push_back(std::move(x));
    }
  } else {
    for (Eigen::Index i = 0; i < N; ++i) vectors.push_back(Eigen::VectorXcd::Unit(N, i));
    root.echo["vectors"] = "standard basis";
  }
  const auto steps = static_cast<std::size_t>(root.integer("steps", 400, 50, 100000));
  root.finish();

  std::optional<jordan::MatrixOperator> T;
  try {
    T.emplace(A);
  } catch (const Error& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }

  std::optional<jordan::TrichotomyDecomposition> dec;
  std::string dec_error;
  try {
    dec = jordan::decompose(*T);
  } catch (const jordan::IllConditioned& e) {
    dec_error = e.what();
  }

  CsvWriter csv({"index", "status", "class", "empirical_class", "agree", "empirical_M", "distance_Y", "distance_Z"});
  Result res;
  ordered_json verdicts = ordered_json::array();
  bool all_agree = true;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    ordered_json v;
    v["index"] = i + 1;
    if (vectors[i].norm() == 0.0) throw ConfigError("vectors: zero vector at index " + std::to_string(i + 1));
    const jordan::EmpiricalResult emp = jordan::orbit_oracle(*T, vectors[i], steps);
    std::string status = "OK";
    std::string cls;
    std::string dy, dz;
    bool agree = false;
    std::string err = dec_error;
    if (dec) {
      try {
        const auto c = jordan::classify(*T, vectors[i], *dec);
        cls = jordan::to_string(c.cls);
        dy = fmt(c.distance_Y);
        dz = fmt(c.distance_Z);
        agree = c.cls == emp.cls;
      } catch (const jordan::IllConditioned& e) {
        err = e.what();
      }
    }
    if (!err.empty()) status = "ILL_CONDITIONED";
    if (status == "OK" && !agree) all_agree = false;
    csv.row({std::to_string(i + 1), status, cls, jordan::to_string(emp.cls), status == "OK" ? bool_str(agree) : "",
             fmt(emp.empirical_M), dy, dz});
    v["status"] = status;
    if (status == "OK") {
      v["class"] = cls;
      v["agree"] = agree;
    } else {
      v["reason"] = err;
    }
    v["empirical_class"] = jordan::to_string(emp.cls);
    v["empirical_M"] = fmt(emp.empirical_M);
    verdicts.push_back(v);
  }
  res.csv = csv.str();
  res.metadata["verdicts"] = verdicts;
  if (dec) {
    ordered_json clusters = ordered_json::array();
    for (const auto& c : dec->clusters) {
      clusters.push_back({{"lambda", {fmt(c.lambda.real()), fmt(c.lambda.imag())}},
                          {"multiplicity", c.multiplicity},
                          {"region", jordan::to_string(c.region)},
                          {"chains", c.chains.size()}});
    }
    res.metadata["clusters"] = clusters;
    res.metadata["dim_Y"] = dec->Y.cols();
    res.metadata["dim_Z"] = dec->Z.cols();
  }
  if (!all_agree) {
    res.exit_code = kExitViolation;
    res.message = "classification disagrees with the empirical orbit";
  }
  return res;
}

// ---------------------------------------------------------------- symbasis

Result cmd_verify_symbasis(ConfigReader& root, std::uint64_t seed) {
  const std::string norm_spec = root.text("norm", "c0");
  const auto n_max = static_cast<std::size_t>(root.integer("n_max", 8, 1, 20));
  const auto m_max = static_cast<std::size_t>(root.integer("m_max", 64, 1, 4096));
  const auto unit_n_max = static_cast<std::size_t>(root.integer("unit_n_max", 16, 1, 256));
  const auto walsh_n_max = static_cast<std::size_t>(root.integer("walsh_n_max", 8, 1, 12));
  const auto trials = static_cast<std::size_t>(root.integer("trials", 32, 0, 100000));
  root.finish();

  std::unique_ptr<symbasis::SymmetricNorm> norm;
  try {
    norm = symbasis::parse_norm_spec(norm_spec);
  } catch (const Error& e) {
    throw ConfigError(std::string("norm: ") + e.what());
  }
  double ambient_p = 2.0;
  if (const auto* lp = dynamic_cast<const symbasis::LpNorm*>(norm.get())) ambient_p = lp->p();

  CsvWriter csv({"system", "n", "width", "slots", "shift_check", "order", "order_ok", "orthogonal", "target_p",
                 "lower", "upper", "directions"});
  Result res;
  bool ok = true;
  auto emit = [&](const symbasis::ZSystem& z) {
    const bool shift = symbasis::shift_simulation_check(z);
    const std::uint64_t order = symbasis::permutation_order(z.pi);
    bool orth = true;
    for (std::size_t a = 1; a <= z.n && orth; ++a) {
      for (std::size_t b = a + 1; b <= z.n && orth; ++b) orth = symbasis::pattern_dot(z, a, b) == 0;
    }
    const auto est = symbasis::equivalence_estimate(z, *norm, trials, seed);
    csv.row({symbasis::to_string(z.kind), std::to_string(z.n), std::to_string(z.block_width),
             std::to_string(z.slots.size()), bool_str(shift), std::to_string(order), bool_str(order == z.n),
             bool_str(orth), fmt(z.target_p), fmt(est.lower), fmt(est.upper), std::to_string(est.directions)});
    if ((!shift || order != z.n || !orth) && ok) {
      ok = false;
      res.message = std::string("violation: ") + symbasis::to_string(z.kind) + " system, n=" + std::to_string(z.n);
    }
  };

  for (std::size_t n = 1; n <= unit_n_max; ++n) {
    std::vector<std::uint64_t> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = i + 1;
    emit(symbasis::unit_system(n, block, ambient_p));
  }
  const auto detection = symbasis::detect_case(*norm, n_max, m_max);
  if (detection.kind == symbasis::DetectedCase::I || detection.kind == symbasis::DetectedCase::II) {
    for (std::size_t n = 1; n <= detection.witnesses.size(); ++n) {
      const std::size_t m_n = detection.witnesses[n - 1];
      emit(detection.kind == symbasis::DetectedCase::I ? symbasis::case1_system(n, m_n, *norm)
                                                         : symbasis::case2_system(n, m_n, *norm));
    }
  }
  for (std::size_t n = 1; n <= walsh_n_max; ++n) emit(symbasis::case3_system(n));

  res.csv = csv.str();
  ordered_json det;
  det["norm"] = norm->name();
  det["case"] = symbasis::to_string(detection.kind);
  det["witnesses"] = detection.witnesses;
  det["case1_fails_at"] = detection.case1_fails_at;
  det["case2_fails_at"] = detection.case2_fails_at;
  det["note"] = detection.note;
  res.metadata["detection"] = det;
  res.exit_code = ok ? kExitOk : kExitViolation;
  return res;
}

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"verify-carousel", cmd_verify_carousel}, {"build-net", cmd_build_net},
      {"build-schedule", cmd_build_schedule},   {"run-orbit", cmd_run_orbit},
      {"near-return", cmd_near_return},         {"classify", cmd_classify},
      {"verify-symbasis", cmd_verify_symbasis},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-carousel", "build-net",  "build-schedule", "run-orbit",
                                              "near-return",     "classify", "verify-symbasis"};
  return names;
}

Output execute(const std::string& command, const json& config, std::uint64_t seed) {
  Output out;
  out.command = command;
  out.sidecar["command"] = command;
  out.sidecar["version"] = OPMACHINE_VERSION;
  out.sidecar["seed"] = seed;
  const auto it = handlers().find(command);
  if (it == handlers().end()) {
    out.exit_code = kExitConfig;
    out.message = "unknown command '" + command + "'";
  } else {
    try {
      ConfigReader root(config, "");
      Result r = it->second(root, seed);
      out.csv = std::move(r.csv);
      out.exit_code = r.exit_code;
      out.message = std::move(r.message);
      out.sidecar["config"] = root.echo;
      out.sidecar["metadata"] = std::move(r.metadata);
    } catch (const ConfigError& e) {
      out.exit_code = kExitConfig;
      out.message = e.what();
    } catch (const Error& e) {
      out.exit_code = kExitConfig;
      out.message = e.what();
    }
  }
  out.sidecar["exit_code"] = out.exit_code;
  out.sidecar["message"] = out.message;
  out.sidecar["timestamp"] = utc_timestamp();
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Operator machine experiments"};
  app.set_version_flag("--version", std::string(OPMACHINE_VERSION));
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  static const std::map<std::string, std::string> help{
      {"verify-carousel", "Check carousel norm estimates on a grid or explicit cases"},
      {"build-net", "Build the per-stage nets of the sphere shell outside E"},
      {"build-schedule", "Build a block schedule and check its invariants"},
      {"run-orbit", "Sample orbit norms of a machine state"},
      {"near-return", "Measure how close the orbit comes back at stage return times"},
      {"classify", "Classify matrix orbits by the compact trichotomy"},
      {"verify-symbasis", "Build shift-simulating systems for a symmetric norm"},
  };
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "Random seed for sampled checks");
    sub->add_option("--out", out_dir, "Output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  json config = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read config " << config_path << "\n";
      return kExitConfig;
    }
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << "\n";
      return kExitConfig;
    }
  }

  const Output out = execute(command, config, seed);
  if (out.exit_code != kExitConfig) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::filesystem::path base = std::filesystem::path(out_dir) / command;
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    csv << out.csv;
    std::ofstream side(base.string() + ".json", std::ios::binary);
    side << out.sidecar.dump(2) << "\n";
    if (!csv || !side) {
      std::cerr << "error: cannot write to " << out_dir << "\n";
      return kExitConfig;
    }
  }
  if (!out.message.empty()) std::cerr << (out.exit_code == kExitOk ? "" : "error: ") << out.message << "\n";
  return out.exit_code;
}

}  // namespace opm::cli
