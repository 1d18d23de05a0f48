#include "opmachine/jordan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace opm::jordan {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

std::string format_complex(Complex z) {
  return decimal_string(z.real(), 12) + (z.imag() < 0 ? " - " : " + ") + decimal_string(std::abs(z.imag()), 12) +
         "i";
}

// Right singular vectors belonging to the `count` smallest singular values.
MatrixXcd null_space(const MatrixXcd& m, Index count) {
  Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(count);
}

Index numerical_rank(const MatrixXcd& m, double cutoff) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  return static_cast<Index>((s.array() > cutoff).count());
}

// Orthonormal basis of the column span.
MatrixXcd orth(const MatrixXcd& m, double rel_cutoff) {
  if (m.cols() == 0) return MatrixXcd(m.rows(), 0);
  Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  Index keep = 0;
  while (keep < s.size() && s(keep) > rel_cutoff * std::max(1.0, top)) ++keep;
  return svd.matrixU().leftCols(keep);
}

MatrixXcd hcat(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(std::max(a.rows(), b.rows()), a.cols() + b.cols());
  if (a.cols() > 0) out.leftCols(a.cols()) = a;
  if (b.cols() > 0) out.rightCols(b.cols()) = b;
  return out;
}

MatrixXcd from_vectors(Index rows, const std::vector<VectorXcd>& vs) {
  MatrixXcd out(rows, static_cast<Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) out.col(static_cast<Index>(i)) = vs[i];
  return out;
}

// Jordan chains of a nilpotent matrix by the kernel staircase. Returns
// chains of local vectors, heads first.
std::vector<std::vector<VectorXcd>> nilpotent_chains(const MatrixXcd& n, double cutoff) {
  const Index a = n.rows();
  std::vector<MatrixXcd> powers{MatrixXcd::Identity(a, a)};
  std::vector<Index> kernel_dim{0};
  while (kernel_dim.back() < a) {
    powers.push_back(powers.back() * n);
    const Index dim = a - numerical_rank(powers.back(), cutoff);
    if (dim <= kernel_dim.back()) throw IllConditioned("jordan: nilpotent part did not resolve within the rank tolerance");
    kernel_dim.push_back(dim);
  }
  const std::size_t s = kernel_dim.size() - 1;
  std::vector<MatrixXcd> kernels(s + 1);
  kernels[0] = MatrixXcd(a, 0);
  for (std::size_t k = 1; k <= s; ++k) kernels[k] = null_space(powers[k], kernel_dim[k]);

  std::vector<std::vector<VectorXcd>> pending(s + 1);
  std::vector<std::vector<VectorXcd>> chains;
  for (std::size_t k = s; k >= 1; --k) {
    const Index need = (kernel_dim[k] - kernel_dim[k - 1]) - static_cast<Index>(pending[k].size());
    if (need < 0) throw IllConditioned("jordan: inconsistent Jordan staircase");
    if (need > 0) {
      const MatrixXcd q = orth(hcat(kernels[k - 1], from_vectors(a, pending[k])), 1e-10);
      const MatrixXcd rest = kernels[k] - q * (q.adjoint() * kernels[k]);
      Eigen::JacobiSVD<MatrixXcd> svd(rest, Eigen::ComputeThinU);
      for (Index c = 0; c < need; ++c) {
        const VectorXcd v = svd.matrixU().col(c);
        std::vector<VectorXcd> chain(k);
        VectorXcd w = v;
        for (std::size_t level = k; level >= 1; --level) {
          chain[level - 1] = w;
          if (level < k) pending[level].push_back(w);
          w = n * w;
        }
        chains.push_back(std::move(chain));
      }
    }
  }
  return chains;
}

}  // namespace

MatrixOperator::MatrixOperator(Eigen::MatrixXcd a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw Error("matrix must be square");
  if (a_.rows() < 1 || a_.rows() > 64) throw Error("matrix dimension must lie in 1..64");
  if (!a_.allFinite()) throw Error("matrix has non-finite entries");
}

MatrixOperator MatrixOperator::real(const Eigen::MatrixXd& a) { return MatrixOperator(a.cast<Complex>()); }

const char* to_string(Region r) {
  switch (r) {
    case Region::Inside: return "inside";
    case Region::OnCircle: return "on_circle";
    case Region::Outside: return "outside";
  }
  return "?";
}

const char* to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Diverges: return "DIVERGES";
    case OrbitClass::BoundedAway: return "BOUNDED_AWAY";
    case OrbitClass::Decays: return "DECAYS";
    case OrbitClass::Undecided: return "UNDECIDED";
  }
  return "?";
}

TrichotomyDecomposition decompose(const MatrixOperator& T, const Tolerances& tol) {
  const MatrixXcd& A = T.matrix();
  const Index N = A.rows();
  const double scale = std::max(1.0, A.norm());

  Eigen::ComplexSchur<MatrixXcd> schur(A, false);
  if (schur.info() != Eigen::Success) throw IllConditioned("jordan: Schur decomposition failed");
  const VectorXcd eig = schur.matrixT().diagonal();

  // Single-linkage clustering of the eigenvalues.
  std::vector<Index> parent(static_cast<std::size_t>(N));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
    return i;
  };
  for (Index i = 0; i < N; ++i) {
    for (Index j = i + 1; j < N; ++j) {
      if (std::abs(eig(i) - eig(j)) <= tol.cluster * std::max(1.0, std::abs(eig(i)))) {
        parent[static_cast<std::size_t>(find(j))] = find(i);
      }
    }
  }
  std::vector<std::vector<Index>> groups;
  std::vector<Index> group_of(static_cast<std::size_t>(N), -1);
  for (Index i = 0; i < N; ++i) {
    const Index r = find(i);
    if (group_of[static_cast<std::size_t>(r)] < 0) {
      group_of[static_cast<std::size_t>(r)] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(r)])].push_back(i);
  }

  TrichotomyDecomposition dec;
  dec.dim = N;
  for (const auto& g : groups) {
    EigenCluster c;
    Complex sum = 0;
    for (Index i : g) sum += eig(i);
    c.lambda = sum / static_cast<double>(g.size());
    c.multiplicity = g.size();
    const double gap = std::abs(std::abs(c.lambda) - 1.0);
    if (gap <= tol.on_circle) {
      c.region = Region::OnCircle;
    } else if (gap <= tol.band) {
      throw IllConditioned("jordan: eigenvalue " + format_complex(c.lambda) + " lies within " +
                           decimal_string(tol.band, 3) + " of the unit circle");
    } else {
      c.region = std::abs(c.lambda) < 1.0 ? Region::Inside : Region::Outside;
    }
    dec.clusters.push_back(std::move(c));
  }
  std::sort(dec.clusters.begin(), dec.clusters.end(), [](const EigenCluster& a, const EigenCluster& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });

  std::vector<VectorXcd> z_vectors, heads;
  for (EigenCluster& c : dec.clusters) {
    const auto a = static_cast<Index>(c.multiplicity);
    const MatrixXcd shifted = A - c.lambda * MatrixXcd::Identity(N, N);
    MatrixXcd power = MatrixXcd::Identity(N, N);
    for (Index i = 0; i < a; ++i) power = power * shifted / scale;
    c.basis = null_space(power, a);
    const MatrixXcd restricted = c.basis.adjoint() * A * c.basis;
    const MatrixXcd nil = restricted - c.lambda * MatrixXcd::Identity(a, a);
    for (const auto& local : nilpotent_chains(nil, tol.rank * scale)) {
      JordanChain chain;
      chain.lambda = c.lambda;
      for (const VectorXcd& v : local) chain.vectors.push_back(c.basis * v);
      c.chains.push_back(std::move(chain));
    }
    for (const JordanChain& chain : c.chains) {
      for (std::size_t k = 0; k < chain.vectors.size(); ++k) {
        VectorXcd r = A * chain.vectors[k] - c.lambda * chain.vectors[k];
        if (k > 0) r -= chain.vectors[k - 1];
        dec.chain_residual = std::max(dec.chain_residual, r.norm() / std::max(1.0, chain.vectors[k].norm()));
      }
    }
    if (c.region == Region::Inside) {
      for (Index i = 0; i < a; ++i) z_vectors.push_back(c.basis.col(i));
      dec.alpha = std::max(dec.alpha, std::abs(c.lambda));
    } else if (c.region == Region::OnCircle) {
      for (const JordanChain& chain : c.chains) heads.push_back(chain.vectors.front());
    }
  }

  dec.Z = orth(from_vectors(N, z_vectors), 1e-10);
  dec.Y = orth(hcat(dec.Z, from_vectors(N, heads)), 1e-10);
  auto residual = [&](const MatrixXcd& B) {
    if (B.cols() == 0) return 0.0;
    return (A * B - B * (B.adjoint() * A * B)).norm() / scale;
  };
  dec.invariance_residual_Y = residual(dec.Y);
  dec.invariance_residual_Z = residual(dec.Z);
  return dec;
}

namespace {

double relative_distance(const Eigen::MatrixXcd& basis, const VectorXcd& x) {
  if (basis.cols() == 0) return 1.0;
  return (x - basis * (basis.adjoint() * x)).norm() / x.norm();
}

}  // namespace

Classification classify(const MatrixOperator& T, const VectorXcd& x, const TrichotomyDecomposition& dec,
                        const Tolerances& tol) {
  if (x.size() != T.size() || dec.dim != T.size()) throw Error("classify: dimension mismatch");
  if (!x.allFinite()) throw Error("classify: vector has non-finite entries");
  if (x.norm() == 0.0) throw Error("classify: x must be nonzero");
  Classification out;
  out.distance_Y = relative_distance(dec.Y, x);
  out.distance_Z = relative_distance(dec.Z, x);
  auto member = [&](double dist, const char* name) {
    if (dist <= tol.member) return true;
    if (dist >= tol.non_member) return false;
    throw IllConditioned(std::string("classify: membership in ") + name + " is unresolved (relative distance " +
                         decimal_string(dist, 3) + ")");
  };
  if (!member(out.distance_Y, "Y")) {
    out.cls = OrbitClass::Diverges;
  } else if (!member(out.distance_Z, "Z")) {
    out.cls = OrbitClass::BoundedAway;
  } else {
    out.cls = OrbitClass::Decays;
  }
  return out;
}

EmpiricalResult orbit_oracle(const MatrixOperator& T, const VectorXcd& x, std::size_t steps,
                             const OracleThresholds& thresholds) {
  if (steps < 50) throw Error("orbit_oracle: needs at least 50 steps");
  if (x.size() != T.size()) throw Error("orbit_oracle: dimension mismatch");
  const double x_norm = x.norm();
  if (x_norm == 0.0) throw Error("orbit_oracle: x must be nonzero");

  std::vector<double> log_ratio(steps + 1, 0.0);
  VectorXcd y = x / x_norm;
  double log_scale = 0.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    y = T.matrix() * y;
    const double norm = y.norm();
    if (norm == 0.0) {
      // Exactly nilpotent on x: the orbit reaches zero.
      std::fill(log_ratio.begin() + static_cast<std::ptrdiff_t>(n), log_ratio.end(), -INFINITY);
      break;
    }
    log_scale += std::log(norm);
    y /= norm;
    log_ratio[n] = log_scale;
  }

  EmpiricalResult out;
  out.steps = steps;
  out.final_log_ratio = log_ratio.back();
  out.max_log_ratio = *std::max_element(log_ratio.begin(), log_ratio.end());
  out.min_log_ratio = *std::min_element(log_ratio.begin(), log_ratio.end());
  out.empirical_M = std::exp(std::max(out.max_log_ratio, -out.min_log_ratio));

  const double half = log_ratio[steps / 2];
  const double last = out.final_log_ratio;
  const double trend = std::log(thresholds.trend);
  const auto second_half = std::span(log_ratio).subspan(steps / 2);
  const double hi = *std::max_element(second_half.begin(), second_half.end());
  const double lo = *std::min_element(second_half.begin(), second_half.end());
  if (last > std::log(thresholds.grow) && last - half > trend) {
    out.cls = OrbitClass::Diverges;
  } else if (last < std::log(thresholds.decay)) {
    out.cls = OrbitClass::Decays;
  } else if (hi <= std::log(thresholds.grow) && lo >= std::log(thresholds.decay) && std::abs(last - half) <= trend) {
    out.cls = OrbitClass::BoundedAway;
  }
  return out;
}

}  // namespace opm::jordan
