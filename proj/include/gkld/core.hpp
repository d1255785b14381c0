#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

namespace gkld {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "0.1.0";

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotSquareError : ShapeError {
  using ShapeError::ShapeError;
};

struct NotSymmetricError : std::invalid_argument {
  double max_asymmetry;
  NotSymmetricError(const std::string& what, double asym)
      : std::invalid_argument(what), max_asymmetry(asym) {}
};

struct LengthMismatchError : ShapeError {
  using ShapeError::ShapeError;
};

struct DimensionMismatchError : ShapeError {
  using ShapeError::ShapeError;
};

struct NotPositiveDefiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

inline void require_finite(const Matrix& m, const std::string& who) {
  if (!m.allFinite()) throw NonFiniteError(who + ": non-finite entries");
}

inline void require_finite(const Vector& v, const std::string& who) {
  if (!v.allFinite()) throw NonFiniteError(who + ": non-finite entries");
}

/// Default symmetry tolerance, scaled by the matrix magnitude.
inline double default_sym_tol(const Matrix& m) {
  return 1e-10 * std::max(1.0, inf_norm(m));
}

/// Column-stacking of a matrix. Storage is column-major, so this is a
/// straight copy of the underlying buffer.
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Index of the (i, j) lower-triangle entry (i >= j) in vech order.
inline Index vech_index(Index i, Index j, Index n) {
  if (i < j) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

inline Index vech_len(Index n) { return n * (n + 1) / 2; }

/// Stacks the unique (lower-triangle, column order) elements of a
/// symmetric matrix. sym_tol < 0 selects the default scaled tolerance.
inline Vector vech(const Matrix& m, double sym_tol = -1.0) {
  if (m.rows() != m.cols())
    throw NotSquareError("vech: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  const double tol = sym_tol < 0.0 ? default_sym_tol(m) : sym_tol;
  if (asym > tol)
    throw NotSymmetricError(
        "vech: max asymmetry " + std::to_string(asym) + " exceeds tolerance " +
            std::to_string(tol),
        asym);
  const Index n = m.rows();
  Vector out(vech_len(n));
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) out(vech_index(i, j, n)) = m(i, j);
  return out;
}

inline Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw LengthMismatchError("unvec: length " + std::to_string(v.size()) +
                              " != " + std::to_string(rows * cols));
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// Rebuilds a symmetric matrix from its vech coordinates.
inline Matrix unvech(const Vector& v, Index n) {
  if (v.size() != vech_len(n))
    throw LengthMismatchError("unvech: length " + std::to_string(v.size()) +
                              " != " + std::to_string(vech_len(n)));
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) {
      out(i, j) = v(vech_index(i, j, n));
      out(j, i) = out(i, j);
    }
  return out;
}

/// The 0/1 duplication matrix D_n with D_n vech(A) = vec(A) for symmetric A.
inline Matrix duplication_matrix(Index n) {
  if (n < 1) throw ShapeError("duplication_matrix: n must be >= 1");
  Matrix d = Matrix::Zero(n * n, vech_len(n));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) d(i + j * n, vech_index(i, j, n)) = 1.0;
  return d;
}

/// Kronecker product: block (i, j) of the result is A(i, j) * B.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// tr(A^T B) = vec(A)^T vec(B); requires identical shapes.
inline double tr_prod(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("tr_prod: shape mismatch");
  return (a.array() * b.array()).sum();
}

/// Hessian identified from the second differential tr(A (dY)^T C dX),
/// symmetrized: (1/2)(A^T x C + A x C^T).
inline Matrix hessian_from_trace_form(const Matrix& a, const Matrix& c) {
  if (a.rows() != a.cols() || c.rows() != c.cols() || a.rows() != c.rows())
    throw ShapeError("hessian_from_trace_form: A, C must be square, same n");
  return 0.5 * (kron(a.transpose(), c) + kron(a, c.transpose()));
}

/// Both sides of tr(A B c d^T) = vec(A^T)^T (d kron B) c.
inline std::pair<double, double> prop1_lhs_rhs(const Matrix& a, const Matrix& b,
                                               const Vector& c,
                                               const Vector& d) {
  if (a.cols() != b.rows() || b.cols() != c.size() || d.size() != a.rows())
    throw ShapeError("prop1_lhs_rhs: nonconformable shapes");
  const double lhs = (a * b * c * d.transpose()).trace();
  const Vector vat = vec(Matrix(a.transpose()));
  const double rhs = vat.dot(kron(d, b) * c);
  return {lhs, rhs};
}

/// The three equivalent forms of vec(A B d):
/// vec(ABd), (d^T kron A) vec(B), (A kron d^T) vec(B^T).
inline std::tuple<Vector, Vector, Vector> vec_abd_forms(const Matrix& a,
                                                        const Matrix& b,
                                                        const Vector& d) {
  if (a.cols() != b.rows() || b.cols() != d.size())
    throw ShapeError("vec_abd_forms: nonconformable shapes");
  const Vector direct = a * b * d;
  const Vector via_b = kron(d.transpose(), a) * vec(b);
  const Vector via_bt = kron(a, d.transpose()) * vec(Matrix(b.transpose()));
  return {direct, via_b, via_bt};
}

}  // namespace gkld
