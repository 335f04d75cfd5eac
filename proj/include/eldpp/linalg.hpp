#ifndef ELDPP_LINALG_HPP
#define ELDPP_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eldpp/error.hpp"

namespace eldpp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

/// Relative threshold for numerical rank of feature matrices.
inline constexpr double kRankTol = 64.0 * std::numeric_limits<double>::epsilon();

/// Relative threshold used to truncate and validate projected spectra.
inline constexpr double kSpectralTol = 1e-12;

/// Relative symmetry tolerance for kernel matrices.
inline constexpr double kSymmetryTol = 1e-12;

inline bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Principal submatrix M_{X,X}.
inline Matrix principal(const Matrix& m, std::span<const int> idx) {
  const auto k = static_cast<Index>(idx.size());
  Matrix out(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) out(a, b) = m(idx[a], idx[b]);
  return out;
}

/// Row selection M_{X,:}.
inline Matrix rows_of(const Matrix& m, std::span<const int> idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (Index a = 0; a < out.rows(); ++a) out.row(a) = m.row(idx[a]);
  return out;
}

/// Determinant with the det(empty) = 1 convention.
inline double det(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  if (m.rows() == 1) return m(0, 0);
  return Eigen::PartialPivLU<Matrix>(m).determinant();
}

/// Numerical column rank at threshold tol * (largest column norm).
inline int numerical_rank(const Matrix& v, double tol = kRankTol) {
  if (v.cols() == 0) return 0;
  if (v.rows() == 0) return 0;
  if (v.cwiseAbs().maxCoeff() == 0.0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(v);
  // the first pivot is the largest column norm, which makes this threshold
  // relative to max column norm
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

/// The bordered matrix [[L_X, V_X], [V_X^T, 0]] restricted to one subset.
struct SaddleSystem {
  Matrix kernel_block;   // m x m
  Matrix feature_block;  // m x p

  Index m() const { return kernel_block.rows(); }
  Index p() const { return feature_block.cols(); }

  static SaddleSystem make(Matrix kernel, Matrix features) {
    if (kernel.rows() != kernel.cols())
      fail(ErrorKind::InvalidArgument, "kernel block must be square");
    if (features.rows() != kernel.rows())
      fail(ErrorKind::InvalidArgument, "feature block row count differs from kernel block");
    if (!is_symmetric(kernel)) fail(ErrorKind::AsymmetricL, "kernel block is not symmetric");
    return SaddleSystem{std::move(kernel), std::move(features)};
  }

  static SaddleSystem restrict(const Matrix& L, const Matrix& V, std::span<const int> idx) {
    return SaddleSystem{principal(L, idx), rows_of(V, idx)};
  }

  Matrix bordered() const {
    const Index mm = m(), pp = p();
    Matrix b = Matrix::Zero(mm + pp, mm + pp);
    b.topLeftCorner(mm, mm) = kernel_block;
    b.topRightCorner(mm, pp) = feature_block;
    b.bottomLeftCorner(pp, mm) = feature_block.transpose();
    return b;
  }
};

/// (-1)^p det [[L_X, V_X], [V_X^T, 0]]. Exactly zero when V_X has rank below p.
inline double saddle_point_det(const Matrix& kernel, const Matrix& features) {
  if (kernel.rows() != kernel.cols())
    fail(ErrorKind::InvalidArgument, "kernel block must be square");
  if (features.rows() != kernel.rows())
    fail(ErrorKind::InvalidArgument, "feature block row count differs from kernel block");
  const Index m = kernel.rows();
  const Index p = features.cols();
  if (p == 0) return det(kernel);
  if (m < p) return 0.0;
  if (numerical_rank(features) < p) return 0.0;
  const Matrix b = SaddleSystem{kernel, features}.bordered();
  const double sign = (p % 2 == 0) ? 1.0 : -1.0;
  return sign * det(b);
}

inline double saddle_point_det(const SaddleSystem& sys) {
  return saddle_point_det(sys.kernel_block, sys.feature_block);
}

/// (e_0, ..., e_n) of the given values, by the one-value-at-a-time recurrence.
inline Vector elementary_symmetric(std::span<const double> values) {
  const auto n = static_cast<Index>(values.size());
  Vector e = Vector::Zero(n + 1);
  e(0) = 1.0;
  for (Index i = 0; i < n; ++i) {
    const double lambda = values[i];
    for (Index k = i + 1; k >= 1; --k) e(k) += lambda * e(k - 1);
  }
  return e;
}

inline Vector elementary_symmetric(const Vector& values) {
  return elementary_symmetric(std::span<const double>(values.data(), values.size()));
}

struct OrthonormalSpan {
  Matrix Q;  // n x rank
  int rank = 0;
};

/// Orthonormal basis for the column space of V via column-pivoted QR.
/// Rank deficiency is reported through `rank`, never raised.
inline OrthonormalSpan orthonormal_span(const Matrix& V, double tol = kRankTol) {
  const Index n = V.rows();
  OrthonormalSpan out;
  out.Q.resize(n, 0);
  if (V.cols() == 0 || n == 0 || V.cwiseAbs().maxCoeff() == 0.0) return out;
  Eigen::ColPivHouseholderQR<Matrix> qr(V);
  qr.setThreshold(tol);
  out.rank = static_cast<int>(qr.rank());
  Matrix q = qr.householderQ() * Matrix::Identity(n, out.rank);
  const auto& r = qr.matrixR();
  for (int j = 0; j < out.rank; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  out.Q = std::move(q);
  return out;
}

/// Orthonormal basis of the orthogonal complement of an orthonormal Q.
inline Matrix orthogonal_complement(const Matrix& Q) {
  const Index n = Q.rows(), p = Q.cols();
  if (p == 0) return Matrix::Identity(n, n);
  Eigen::HouseholderQR<Matrix> qr(Q);
  Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  return full.rightCols(n - p);
}

/// Truncated eigensystem of the projected kernel (I - QQ^T) L (I - QQ^T).
struct SpectrumTruncation {
  Matrix vectors;  // n x q, orthonormal, orthogonal to span Q
  Vector values;   // length q, descending, all > tol * scale
  int q = 0;
  double tol = kSpectralTol;
};

/// Eigenpairs of the projected kernel. Eigenvalues in [-tol*scale, tol*scale]
/// are treated as zero; anything more negative means L is not conditionally
/// positive semi-definite with respect to span Q. The scale is the larger of
/// the spectral radius of the projected kernel and the Frobenius norm of L.
inline SpectrumTruncation projected_spectrum(const Matrix& L, const Matrix& Q,
                                             double tol = kSpectralTol) {
  const Index n = L.rows();
  if (L.cols() != n) fail(ErrorKind::InvalidArgument, "L must be square");
  if (Q.rows() != n) fail(ErrorKind::InvalidArgument, "Q row count differs from L");

  SpectrumTruncation out;
  out.tol = tol;
  const Matrix basis = orthogonal_complement(Q);  // n x (n - p)
  const Index r = basis.cols();
  out.vectors.resize(n, 0);
  out.values.resize(0);
  if (r == 0) return out;

  Matrix compressed = basis.transpose() * L * basis;
  compressed = 0.5 * (compressed + compressed.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(compressed);
  if (eig.info() != Eigen::Success)
    fail(ErrorKind::NumericalBreakdown, "symmetric eigensolver did not converge");
  const Vector& ev = eig.eigenvalues();  // ascending
  const double radius = std::max(std::abs(ev(0)), std::abs(ev(r - 1)));
  const double scale = std::max(radius, L.norm());
  if (ev(0) < -tol * scale)
    fail(ErrorKind::NotConditionallyPSD,
         "projected kernel has eigenvalue " + std::to_string(ev(0)));

  std::vector<Index> keep;
  for (Index k = r - 1; k >= 0; --k)
    if (ev(k) > tol * scale) keep.push_back(k);
  out.q = static_cast<int>(keep.size());
  out.values.resize(out.q);
  Matrix w(r, out.q);
  for (int j = 0; j < out.q; ++j) {
    out.values(j) = ev(keep[j]);
    w.col(j) = eig.eigenvectors().col(keep[j]);
  }
  out.vectors = basis * w;
  return out;
}

/// Coefficient of t^p in det(L_X + t V_X V_X^T), recovered from p + 1
/// evaluations at Chebyshev nodes on [1, 2] by divided differences.
/// Equals saddle_point_det(L_X, V_X).
inline double det_polynomial_top_coefficient(const Matrix& kernel, const Matrix& features) {
  const Index p = features.cols();
  const Matrix vvt = features * features.transpose();
  std::vector<double> nodes(p + 1), values(p + 1);
  for (Index k = 0; k <= p; ++k) {
    nodes[k] = 1.5 + 0.5 * std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * (p + 1)));
    values[k] = det(kernel + nodes[k] * vvt);
  }
  double coeff = 0.0;
  for (Index k = 0; k <= p; ++k) {
    double denom = 1.0;
    for (Index j = 0; j <= p; ++j)
      if (j != k) denom *= nodes[k] - nodes[j];
    coeff += values[k] / denom;
  }
  return coeff;
}

}  // namespace linalg
}  // namespace eldpp

#endif  // ELDPP_LINALG_HPP
