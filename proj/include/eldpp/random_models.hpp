#ifndef ELDPP_RANDOM_MODELS_HPP
#define ELDPP_RANDOM_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eldpp/ensemble.hpp"
#include "eldpp/kernels.hpp"
#include "eldpp/linalg.hpp"
#include "eldpp/random.hpp"

namespace eldpp::random_models {

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

/// Haar-distributed orthogonal matrix.
inline Matrix orthogonal_matrix(Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n, rng));
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

inline PointCloud gaussian_cloud(Index n, Index d, Rng& rng) {
  return PointCloud::make(gaussian_matrix(n, d, rng));
}

struct NnpShape {
  Index n = 8;
  Index p = 1;
  /// rank of the PSD factor of L; q <= rank
  Index rank = 3;
  /// log-normal spread of the row weights of the factor; larger values
  /// concentrate the law on fewer subsets
  double row_spread = 0.0;
  /// overall multiplier of the PSD factor
  double scale = 1.0;
  /// add V X^T + X V^T, which leaves the process unchanged but makes L indefinite
  bool indefinite_shift = false;
};

/// L = scale * D Psi Psi^T D (+ V X^T + X V^T), V Gaussian n x p.
inline Nnp random_nnp(const NnpShape& shape, Rng& rng) {
  Matrix Psi = gaussian_matrix(shape.n, shape.rank, rng);
  if (shape.row_spread > 0.0)
    for (Index i = 0; i < shape.n; ++i) Psi.row(i) *= std::exp(shape.row_spread * rng.normal());
  Matrix L = shape.scale * Psi * Psi.transpose();
  const Matrix V = gaussian_matrix(shape.n, shape.p, rng);
  if (shape.indefinite_shift && shape.p > 0) {
    const Matrix X = gaussian_matrix(shape.n, shape.p, rng);
    L += V * X.transpose() + X * V.transpose();
  }
  return build_nnp(std::move(L), V);
}

/// Symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(Index n, Rng& rng, double lo = 0.2, double hi = 2.0) {
  const Matrix U = orthogonal_matrix(n, rng);
  Vector ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = lo + (hi - lo) * rng.uniform();
  return U * ev.asDiagonal() * U.transpose();
}

/// U diag(mu) U^T with `unit` eigenvalues equal to 1, `zero` equal to 0 and
/// the rest uniform on (0.05, 0.95).
inline Matrix random_marginal_kernel(Index n, Index unit, Index zero, Rng& rng) {
  if (unit + zero > n) fail(ErrorKind::InvalidArgument, "unit + zero eigenvalues exceed n");
  const Matrix U = orthogonal_matrix(n, rng);
  Vector mu(n);
  for (Index i = 0; i < n; ++i) {
    if (i < unit)
      mu(i) = 1.0;
    else if (i < unit + zero)
      mu(i) = 0.0;
    else
      mu(i) = 0.05 + 0.9 * rng.uniform();
  }
  Matrix K = U * mu.asDiagonal() * U.transpose();
  return 0.5 * (K + K.transpose());
}

/// Random spanning tree (uniform attachment) plus each remaining pair with
/// probability `extra`, weights uniform on [0.5, 2].
inline std::vector<Edge> random_connected_graph(Index n, double extra, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
  auto add = [&](Index u, Index v) {
    edges.push_back(Edge{static_cast<int>(u), static_cast<int>(v), 0.5 + 1.5 * rng.uniform()});
    linked[u][v] = linked[v][u] = true;
  };
  for (Index k = 1; k < n; ++k) add(order[k], order[rng.below(static_cast<std::uint64_t>(k))]);
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (!linked[u][v] && rng.uniform() < extra) add(u, v);
  return edges;
}

}  // namespace eldpp::random_models

#endif  // ELDPP_RANDOM_MODELS_HPP
