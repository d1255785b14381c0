#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gkld/kld.hpp"

namespace gkld {

/// Packed parameter vector (m, w, coords(S), coords(V)) for the
/// finite-difference oracle; coords is vec or vech per basis.
struct PackedPoint {
  Basis basis = Basis::Vech;
  Index n = 0;
  Vector theta;
};

struct FdConfig {
  double step = 1e-5;         // 1e-5 for gradients, 1e-4 for Hessians
  bool relative_step = true;  // scale step by max(1, |theta_i|)
};

inline FdConfig fd_gradient_defaults() { return FdConfig{1e-5, true}; }
inline FdConfig fd_hessian_defaults() { return FdConfig{1e-4, true}; }

struct CheckReport {
  std::string name;
  bool passed = false;
  double observed_error = 0.0;
  double tolerance = 0.0;
  std::string details;
};

inline CheckReport make_report(std::string name, double err, double tol,
                               std::string details = {}) {
  return {std::move(name), err <= tol, err, tol, std::move(details)};
}

struct StencilFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// KLD closed form evaluated verbatim for general invertible S, V (no
/// symmetry requirement), using log of the absolute determinant. This is
/// the function the elementwise finite differences probe.
inline double kld_extended(const Vector& m, const Vector& w, const Matrix& S,
                           const Matrix& V) {
  const Index n = m.size();
  if (w.size() != n || S.rows() != n || S.cols() != n || V.rows() != n ||
      V.cols() != n)
    throw DimensionMismatchError("kld_extended: shape mismatch");
  auto logabsdet_and_lu = [](const Matrix& a, const char* who) {
    Eigen::PartialPivLU<Matrix> lu(a);
    const Vector diag = lu.matrixLU().diagonal();
    double logabs = 0.0;
    for (Index i = 0; i < diag.size(); ++i) {
      const double d = std::abs(diag(i));
      if (d <= 1e-13 * std::max(1.0, inf_norm(a)))
        throw SingularMatrixError(std::string(who) + ": singular matrix");
      logabs += std::log(d);
    }
    return std::make_pair(std::move(lu), logabs);
  };
  auto [luS, logdet_S] = logabsdet_and_lu(S, "S");
  auto [luV, logdet_V] = logabsdet_and_lu(V, "V");
  (void)luS;
  const Vector a = m - w;
  return 0.5 * (logdet_V - logdet_S - static_cast<double>(n) +
                luV.solve(S).trace() + a.dot(luV.solve(a)));
}

inline Index packed_len(Basis basis, Index n) {
  return basis == Basis::Vec ? 2 * n + 2 * n * n : 2 * n + 2 * vech_len(n);
}

inline PackedPoint pack(const GaussianPair& p, Basis basis) {
  PackedPoint pt;
  pt.basis = basis;
  pt.n = p.n;
  const Vector cs = basis == Basis::Vec ? vec(p.S) : vech(p.S);
  const Vector cv = basis == Basis::Vec ? vec(p.V) : vech(p.V);
  pt.theta.resize(packed_len(basis, p.n));
  pt.theta << p.m, p.w, cs, cv;
  return pt;
}

/// Unpacks into (m, w, S, V); S, V are general matrices in the Vec basis
/// and symmetric by construction in the Vech basis.
inline std::tuple<Vector, Vector, Matrix, Matrix> unpack(const Basis basis,
                                                         Index n,
                                                         const Vector& theta) {
  if (theta.size() != packed_len(basis, n))
    throw LengthMismatchError("unpack: packed length mismatch");
  const Index k = basis == Basis::Vec ? n * n : vech_len(n);
  const Vector m = theta.segment(0, n);
  const Vector w = theta.segment(n, n);
  const Vector cs = theta.segment(2 * n, k);
  const Vector cv = theta.segment(2 * n + k, k);
  const Matrix S = basis == Basis::Vec ? unvec(cs, n, n) : unvech(cs, n);
  const Matrix V = basis == Basis::Vec ? unvec(cv, n, n) : unvech(cv, n);
  return {m, w, S, V};
}

inline double kld_packed(const PackedPoint& pt) {
  auto [m, w, S, V] = unpack(pt.basis, pt.n, pt.theta);
  return kld_extended(m, w, S, V);
}

namespace detail {

template <class F>
double eval_stencil(F&& f, const Vector& theta) {
  double y;
  try {
    y = f(theta);
  } catch (const SingularMatrixError& e) {
    throw StencilFailure(std::string("stencil point failed: ") + e.what());
  }
  if (!std::isfinite(y))
    throw StencilFailure("stencil point evaluated to a non-finite value");
  return y;
}

inline double step_for(const FdConfig& cfg, double theta_i) {
  return cfg.relative_step ? cfg.step * std::max(1.0, std::abs(theta_i))
                           : cfg.step;
}

}  // namespace detail

/// Central-difference gradient of an arbitrary scalar function.
template <class F>
Vector fd_gradient(F&& f, const Vector& theta, const FdConfig& cfg) {
  Vector g(theta.size());
  Vector t = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    const double h = detail::step_for(cfg, theta(i));
    t(i) = theta(i) + h;
    const double fp = detail::eval_stencil(f, t);
    t(i) = theta(i) - h;
    const double fm = detail::eval_stencil(f, t);
    t(i) = theta(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Central second-difference Hessian, symmetrized as (1/2)(H + H^T).
template <class F>
Matrix fd_hessian(F&& f, const Vector& theta, const FdConfig& cfg) {
  const Index k = theta.size();
  Matrix h(k, k);
  Vector t = theta;
  for (Index i = 0; i < k; ++i) {
    const double hi = detail::step_for(cfg, theta(i));
    for (Index j = 0; j <= i; ++j) {
      const double hj = detail::step_for(cfg, theta(j));
      auto eval = [&](double si, double sj) {
        t(i) = theta(i) + si * hi;
        t(j) += sj * hj;  // accumulate so i == j doubles the step
        const double y = detail::eval_stencil(f, t);
        t(i) = theta(i);
        t(j) = theta(j);
        return y;
      };
      const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) /
                       (4.0 * hi * hj);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return 0.5 * (h + h.transpose()).eval();
}

inline Vector fd_gradient(const PackedPoint& pt,
                          FdConfig cfg = fd_gradient_defaults()) {
  const Basis basis = pt.basis;
  const Index n = pt.n;
  return fd_gradient(
      [basis, n](const Vector& th) {
        auto [m, w, S, V] = unpack(basis, n, th);
        return kld_extended(m, w, S, V);
      },
      pt.theta, cfg);
}

inline Matrix fd_hessian(const PackedPoint& pt,
                         FdConfig cfg = fd_hessian_defaults()) {
  const Basis basis = pt.basis;
  const Index n = pt.n;
  return fd_hessian(
      [basis, n](const Vector& th) {
        auto [m, w, S, V] = unpack(basis, n, th);
        return kld_extended(m, w, S, V);
      },
      pt.theta, cfg);
}

// ---------------------------------------------------------------------------
// Seeded random instances
// ---------------------------------------------------------------------------

/// SplitMix64 step; used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Vector random_vector(Index len, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(len);
  for (Index i = 0; i < len; ++i) v(i) = normal(rng);
  return v;
}

/// Random SPD matrix Q diag(lambda) Q^T with Q from a QR factorization and
/// eigenvalues uniform in [0.5, 2]; condition number stays below 4.
inline Matrix random_spd(Index n, std::mt19937_64& rng) {
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(n, n, rng))
                       .householderQ();
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) lambda(i) = unif(rng);
  Matrix a = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose()).eval();
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.transpose()).eval();
}

inline GaussianPair random_pair(Index n, std::mt19937_64& rng) {
  GaussianPair p;
  p.n = n;
  p.m = random_vector(n, rng);
  p.w = random_vector(n, rng);
  p.S = random_spd(n, rng);
  p.V = random_spd(n, rng);
  return p;
}

// ---------------------------------------------------------------------------
// Monte-Carlo KLD estimate
// ---------------------------------------------------------------------------

/// Sample mean and standard error of log q(x) - log p(x) under x ~ q.
/// Sampling is mt19937_64 + std::normal_distribution, seeded; identical
/// seeds give identical estimates.
inline std::pair<double, double> mc_kld(const GaussianPair& p,
                                        std::int64_t samples,
                                        std::uint64_t seed) {
  if (samples < 1000)
    throw std::invalid_argument("mc_kld: need at least 1000 samples");
  p.validate();
  Eigen::LLT<Matrix> lltS(p.S), lltV(p.V);
  if (lltS.info() != Eigen::Success || lltV.info() != Eigen::Success)
    throw NotPositiveDefiniteError("mc_kld: covariance not SPD");
  const Matrix Ls = lltS.matrixL();
  const double logdet_S = 2.0 * Ls.diagonal().array().log().sum();
  const double logdet_V =
      2.0 * Matrix(lltV.matrixL()).diagonal().array().log().sum();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0, sumsq = 0.0;
  Vector z(p.n);
  for (std::int64_t s = 0; s < samples; ++s) {
    for (Index i = 0; i < p.n; ++i) z(i) = normal(rng);
    const Vector x = p.m + Ls * z;
    // log q - log p; the (2 pi)^{n/2} normalizers cancel.
    const double log_q = -0.5 * (logdet_S + z.squaredNorm());
    const Vector dv = x - p.w;
    const double log_p = -0.5 * (logdet_V + dv.dot(lltV.solve(dv)));
    const double y = log_q - log_p;
    sum += y;
    sumsq += y * y;
  }
  const double nD = static_cast<double>(samples);
  const double mean = sum / nD;
  const double var = std::max(0.0, sumsq / nD - mean * mean);
  return {mean, std::sqrt(var / nD)};
}

// ---------------------------------------------------------------------------
// Randomized identity suite
// ---------------------------------------------------------------------------

namespace detail {

inline double rel_err(double err, double scale) {
  return err / std::max(1.0, scale);
}

}  // namespace detail

/// Runs the matrix-identity checks over seeded random instances; one
/// report per (identity, dim). Failures are reported, never thrown.
inline std::vector<CheckReport> identity_suite(std::uint64_t seed,
                                               const std::vector<Index>& dims,
                                               int trials) {
  if (dims.empty()) throw std::invalid_argument("identity_suite: empty dims");
  if (trials < 1) throw std::invalid_argument("identity_suite: trials < 1");
  const double tol = 1e-10;
  std::vector<CheckReport> reports;

  struct Identity {
    const char* name;
    std::function<double(Index, std::mt19937_64&)> run;  // returns rel error
  };

  const std::vector<Identity> identities = {
      {"vec_AXB_kron",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_matrix(n, n, rng);
         const Matrix x = random_matrix(n, n, rng);
         const Matrix b = random_matrix(n, n, rng);
         const Vector lhs = vec(a * x * b);
         const Vector rhs = kron(b.transpose(), a) * vec(x);
         return detail::rel_err((lhs - rhs).cwiseAbs().maxCoeff(),
                                lhs.cwiseAbs().maxCoeff());
       }},
      {"vec_ABd_dual_forms",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_matrix(n, n, rng);
         const Matrix b = random_matrix(n, n, rng);
         const Vector d = random_vector(n, rng);
         auto [f1, f2, f3] = vec_abd_forms(a, b, d);
         const double scale = f1.cwiseAbs().maxCoeff();
         return detail::rel_err(
             std::max((f1 - f2).cwiseAbs().maxCoeff(),
                      (f1 - f3).cwiseAbs().maxCoeff()),
             scale);
       }},
      {"vec_of_sum",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_matrix(n, n, rng);
         const Matrix b = random_matrix(n, n, rng);
         const Vector lhs = vec(a + b);
         const Vector rhs = vec(a) + vec(b);
         return (lhs - rhs).cwiseAbs().maxCoeff();  // exact
       }},
      {"duplication_vech_to_vec",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_symmetric(n, rng);
         const Vector lhs = duplication_matrix(n) * vech(a);
         return (lhs - vec(a)).cwiseAbs().maxCoeff();  // exact, 0/1 matrix
       }},
      {"trace_AtB_vec",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_matrix(n, n, rng);
         const Matrix b = random_matrix(n, n, rng);
         const double lhs = (a.transpose() * b).trace();
         const double rhs = tr_prod(a, b);
         return detail::rel_err(std::abs(lhs - rhs), std::abs(lhs));
       }},
      {"kron_transpose",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_matrix(n, n, rng);
         const Matrix b = random_matrix(n, n, rng);
         const Matrix lhs = kron(a, b).transpose();
         const Matrix rhs = kron(a.transpose(), b.transpose());
         return (lhs - rhs).cwiseAbs().maxCoeff();  // exact rearrangement
       }},
      {"prop1_trace_ABcdT",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_matrix(n, n, rng);
         const Matrix b = random_matrix(n, n, rng);
         const Vector c = random_vector(n, rng);
         const Vector d = random_vector(n, rng);
         auto [lhs, rhs] = prop1_lhs_rhs(a, b, c, d);
         return detail::rel_err(std::abs(lhs - rhs), std::abs(lhs));
       }},
      {"prop2_trace_form_hessian",
       [](Index n, std::mt19937_64& rng) {
         const Matrix a = random_matrix(n, n, rng);
         const Matrix c = random_matrix(n, n, rng);
         const Matrix w = random_matrix(n, n, rng);
         const Matrix h = hessian_from_trace_form(a, c);
         const double sym = (h - h.transpose()).cwiseAbs().maxCoeff();
         const Vector vw = vec(w);
         const double quad = vw.dot(h * vw);
         const double direct = (a * w.transpose() * c * w).trace();
         return std::max(
             detail::rel_err(std::abs(quad - direct), std::abs(direct)),
             detail::rel_err(sym, inf_norm(h)));
       }},
      {"mV_block_symmetric_directions",
       [](Index n, std::mt19937_64& rng) {
         GaussianPair p = random_pair(n, rng);
         const Matrix b1 = hessian_block(p, BlockId::M, BlockId::V, Basis::Vec);
         const Matrix b2 = mV_alternative_form(p);
         const Matrix w = random_symmetric(n, rng);
         const Vector diff = (b1 - b2) * vec(w);
         return detail::rel_err(diff.cwiseAbs().maxCoeff(),
                                inf_norm(b1) * inf_norm(w));
       }},
  };

  std::uint64_t stream = 0;
  for (const auto& ident : identities) {
    for (Index n : dims) {
      std::mt19937_64 rng(mix_seed(seed, stream++));
      double worst = 0.0;
      for (int t = 0; t < trials; ++t)
        worst = std::max(worst, ident.run(n, rng));
      reports.push_back(make_report(
          std::string(ident.name) + "/n=" + std::to_string(n), worst, tol,
          std::to_string(trials) + " trials"));
    }
  }
  return reports;
}

}  // namespace gkld
