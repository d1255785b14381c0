#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "gkld/core.hpp"

namespace gkld {

enum class Basis { Vec, Vech };

enum class BlockId { M, W, S, V };

inline constexpr std::array<BlockId, 4> kBlockOrder = {BlockId::M, BlockId::W,
                                                       BlockId::S, BlockId::V};

/// Problem instance: q = N(m, S), p = N(w, V).
struct GaussianPair {
  Index n = 0;
  Vector m, w;
  Matrix S, V;

  void validate(double sym_tol = -1.0) const;
};

namespace detail {

/// SPD factorization products shared by the value/Jacobian/Hessian formulas.
struct SpdFactors {
  Matrix Sinv, Vinv;
  double logdet_S = 0.0, logdet_V = 0.0;
};

inline std::pair<Matrix, double> spd_inverse_logdet(const Matrix& a,
                                                    const std::string& who) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefiniteError(who + ": Cholesky factorization failed");
  const Vector diag = Matrix(llt.matrixL()).diagonal();
  const double floor = 1e-12 * std::max(1.0, inf_norm(a));
  if ((diag.array() * diag.array()).minCoeff() <= floor)
    throw NotPositiveDefiniteError(who + ": near-singular (smallest pivot " +
                                   std::to_string(diag.minCoeff() *
                                                  diag.minCoeff()) +
                                   ")");
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  inv = 0.5 * (inv + inv.transpose()).eval();  // keep the inverse symmetric
  const double logdet = 2.0 * diag.array().log().sum();
  return {inv, logdet};
}

inline SpdFactors factorize(const GaussianPair& p) {
  p.validate();
  SpdFactors f;
  std::tie(f.Sinv, f.logdet_S) = spd_inverse_logdet(p.S, "S");
  std::tie(f.Vinv, f.logdet_V) = spd_inverse_logdet(p.V, "V");
  return f;
}

}  // namespace detail

inline void GaussianPair::validate(double sym_tol) const {
  if (n < 1) throw DimensionMismatchError("GaussianPair: n must be >= 1");
  if (m.size() != n || w.size() != n)
    throw DimensionMismatchError("GaussianPair: mean length != n");
  if (S.rows() != n || S.cols() != n || V.rows() != n || V.cols() != n)
    throw DimensionMismatchError("GaussianPair: covariance shape != n x n");
  require_finite(m, "m");
  require_finite(w, "w");
  require_finite(S, "S");
  require_finite(V, "V");
  for (const auto* cov : {&S, &V}) {
    const double asym = (*cov - cov->transpose()).cwiseAbs().maxCoeff();
    const double tol = sym_tol < 0.0 ? default_sym_tol(*cov) : sym_tol;
    if (asym > tol)
      throw NotSymmetricError("GaussianPair: covariance asymmetry " +
                                  std::to_string(asym),
                              asym);
  }
}

/// KLD[q || p] = (1/2)[log|V| - log|S| - n + tr(V^-1 S) + a^T V^-1 a],
/// a = m - w.
inline double kld_value(const GaussianPair& p) {
  const auto f = detail::factorize(p);
  const Vector a = p.m - p.w;
  return 0.5 * (f.logdet_V - f.logdet_S - static_cast<double>(p.n) +
                (f.Vinv * p.S).trace() + a.dot(f.Vinv * a));
}

namespace detail {

inline Vector jacobian_block(const GaussianPair& p, const SpdFactors& f,
                             BlockId var, Basis basis) {
  const Vector a = p.m - p.w;
  switch (var) {
    case BlockId::M:
      return f.Vinv * a;
    case BlockId::W:
      return -(f.Vinv * a);
    case BlockId::S: {
      Vector row = 0.5 * vec(f.Vinv - f.Sinv);
      if (basis == Basis::Vech)
        return duplication_matrix(p.n).transpose() * row;
      return row;
    }
    case BlockId::V: {
      const Matrix C = p.S + a * a.transpose();
      Vector row = 0.5 * vec(f.Vinv - f.Vinv * C * f.Vinv);
      if (basis == Basis::Vech)
        return duplication_matrix(p.n).transpose() * row;
      return row;
    }
  }
  throw std::logic_error("unreachable");
}

inline Matrix hessian_block(const GaussianPair& p, const SpdFactors& f,
                            BlockId row, BlockId col, Basis basis) {
  const Index n = p.n;
  const Vector a = p.m - p.w;
  const Matrix at_vinv = (a.transpose() * f.Vinv).eval();  // 1 x n
  const Matrix vinv_a = (f.Vinv * a).eval();               // n x 1
  auto is_mat = [](BlockId b) { return b == BlockId::S || b == BlockId::V; };

  Matrix block;
  if (row == BlockId::M || row == BlockId::W) {
    const double sign_row = row == BlockId::M ? 1.0 : -1.0;
    switch (col) {
      case BlockId::M:
        block = sign_row * f.Vinv;
        break;
      case BlockId::W:
        block = -sign_row * f.Vinv;
        break;
      case BlockId::S:
        block = Matrix::Zero(n, n * n);
        break;
      case BlockId::V:
        block = -sign_row * kron(at_vinv, f.Vinv);
        break;
    }
  } else if (row == BlockId::S) {
    switch (col) {
      case BlockId::M:
      case BlockId::W:
        block = Matrix::Zero(n * n, n);
        break;
      case BlockId::S:
        block = 0.5 * kron(f.Sinv, f.Sinv);
        break;
      case BlockId::V:
        block = -0.5 * kron(f.Vinv, f.Vinv);
        break;
    }
  } else {  // row == BlockId::V
    switch (col) {
      case BlockId::M:
        block = -kron(vinv_a, f.Vinv);
        break;
      case BlockId::W:
        block = kron(vinv_a, f.Vinv);
        break;
      case BlockId::S:
        block = -0.5 * kron(f.Vinv, f.Vinv);
        break;
      case BlockId::V: {
        const Matrix C = p.S + a * a.transpose();
        block = -0.5 * kron(f.Vinv, f.Vinv - 2.0 * f.Vinv * C * f.Vinv);
        break;
      }
    }
  }
  if (basis == Basis::Vech) {
    const Matrix d = duplication_matrix(n);
    if (is_mat(row)) block = (d.transpose() * block).eval();
    if (is_mat(col)) block = (block * d).eval();
  }
  return block;
}

}  // namespace detail

/// One row block of the KLD Jacobian (stored as a plain vector).
inline Vector jacobian_block(const GaussianPair& p, BlockId var, Basis basis) {
  return detail::jacobian_block(p, detail::factorize(p), var, basis);
}

struct JacobianResult {
  Basis basis = Basis::Vec;
  Vector block_m, block_w, block_S, block_V;
  Vector assembled;  // concatenation in (m, w, S, V) order
};

inline JacobianResult assemble_jacobian(const GaussianPair& p, Basis basis) {
  const auto f = detail::factorize(p);
  JacobianResult r;
  r.basis = basis;
  r.block_m = detail::jacobian_block(p, f, BlockId::M, basis);
  r.block_w = detail::jacobian_block(p, f, BlockId::W, basis);
  r.block_S = detail::jacobian_block(p, f, BlockId::S, basis);
  r.block_V = detail::jacobian_block(p, f, BlockId::V, basis);
  r.assembled.resize(r.block_m.size() + r.block_w.size() + r.block_S.size() +
                     r.block_V.size());
  r.assembled << r.block_m, r.block_w, r.block_S, r.block_V;
  return r;
}

/// One block of the KLD Hessian grid.
inline Matrix hessian_block(const GaussianPair& p, BlockId row, BlockId col,
                            Basis basis) {
  return detail::hessian_block(p, detail::factorize(p), row, col, basis);
}

struct HessianResult {
  Basis basis = Basis::Vec;
  std::array<std::array<Matrix, 4>, 4> blocks;  // indexed in (m, w, S, V) order
  Matrix assembled;

  const Matrix& block(BlockId row, BlockId col) const {
    return blocks[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
  }
};

inline HessianResult assemble_hessian(const GaussianPair& p, Basis basis) {
  const auto f = detail::factorize(p);
  HessianResult r;
  r.basis = basis;
  Index total = 0;
  std::array<Index, 4> sizes{};
  for (auto row : kBlockOrder) {
    for (auto col : kBlockOrder)
      r.blocks[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
          detail::hessian_block(p, f, row, col, basis);
    sizes[static_cast<std::size_t>(row)] = r.block(row, BlockId::M).rows();
    total += sizes[static_cast<std::size_t>(row)];
  }
  r.assembled.resize(total, total);
  Index roff = 0;
  for (auto row : kBlockOrder) {
    Index coff = 0;
    for (auto col : kBlockOrder) {
      const Matrix& b = r.block(row, col);
      r.assembled.block(roff, coff, b.rows(), b.cols()) = b;
      coff += b.cols();
    }
    roff += sizes[static_cast<std::size_t>(row)];
  }
  return r;
}

/// The alternative Kronecker form -V^-1 kron [a^T V^-1] of the (m, V)
/// block. Agrees with hessian_block(M, V, Vec) on symmetric directions
/// only; the two differ entrywise in general.
inline Matrix mV_alternative_form(const GaussianPair& p) {
  const auto f = detail::factorize(p);
  const Vector a = p.m - p.w;
  const Matrix at_vinv = (a.transpose() * f.Vinv).eval();
  return -kron(f.Vinv, at_vinv);
}

}  // namespace gkld
