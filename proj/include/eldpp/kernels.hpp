#ifndef ELDPP_KERNELS_HPP
#define ELDPP_KERNELS_HPP

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eldpp/ensemble.hpp"
#include "eldpp/error.hpp"
#include "eldpp/linalg.hpp"

namespace eldpp {

/// n points in R^d, one per row.
class PointCloud {
 public:
  static PointCloud make(Matrix points) {
    if (points.rows() < 1 || points.cols() < 1)
      fail(ErrorKind::InvalidArgument, "point cloud needs n >= 1 and d >= 1");
    if (!points.allFinite()) fail(ErrorKind::InvalidArgument, "point coordinates must be finite");
    return PointCloud(std::move(points));
  }

  const Matrix& points() const noexcept { return points_; }
  Index n() const noexcept { return points_.rows(); }
  Index d() const noexcept { return points_.cols(); }

  double distance(Index i, Index j) const { return (points_.row(i) - points_.row(j)).norm(); }

  Matrix distance_matrix() const {
    Matrix D(n(), n());
    for (Index i = 0; i < n(); ++i) {
      D(i, i) = 0.0;
      for (Index j = i + 1; j < n(); ++j) D(i, j) = D(j, i) = distance(i, j);
    }
    return D;
  }

  /// Index of the point closest to the centroid.
  Index nearest_to_centroid() const {
    const Eigen::RowVectorXd c = points_.colwise().mean();
    Index best = 0;
    (points_.rowwise() - c).rowwise().squaredNorm().minCoeff(&best);
    return best;
  }

 private:
  explicit PointCloud(Matrix points) : points_(std::move(points)) {}
  Matrix points_;
};

struct MultiIndex {
  std::vector<int> exponents;

  int degree() const {
    int s = 0;
    for (int e : exponents) s += e;
    return s;
  }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

inline Index binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Index r = 1;
  for (Index i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// All exponents in d variables with total degree <= max_degree, in graded
/// lexicographic order: by degree, then lexicographically ascending.
inline std::vector<MultiIndex> monomial_exponents(Index d, int max_degree) {
  std::vector<MultiIndex> out;
  std::vector<int> current(static_cast<std::size_t>(d), 0);
  std::function<void(Index, int)> fill = [&](Index pos, int left) {
    if (pos == d - 1) {
      current[pos] = left;
      out.push_back(MultiIndex{current});
      return;
    }
    for (int e = 0; e <= left; ++e) {
      current[pos] = e;
      fill(pos + 1, left - e);
    }
  };
  for (int deg = 0; deg <= max_degree; ++deg) fill(0, deg);
  return out;
}

inline double monomial(const Eigen::Ref<const Eigen::RowVectorXd>& x, const MultiIndex& beta) {
  double v = 1.0;
  for (Index k = 0; k < x.size(); ++k) v *= std::pow(x(k), beta.exponents[k]);
  return v;
}

/// Monomials of degree <= order - 1 evaluated at every point (points along
/// rows). Throws OverflowGuard when there are more monomials than points.
inline Matrix vandermonde(const PointCloud& cloud, int order) {
  if (order < 1) fail(ErrorKind::InvalidArgument, "polynomial order must be >= 1");
  const Index cols = binomial(cloud.d() + order - 1, cloud.d());
  if (cols > cloud.n())
    fail(ErrorKind::OverflowGuard, std::to_string(cols) + " monomials for " +
                                       std::to_string(cloud.n()) +
                                       " points; V cannot have full column rank");
  const auto basis = monomial_exponents(cloud.d(), order - 1);
  Matrix V(cloud.n(), cols);
  for (Index i = 0; i < cloud.n(); ++i)
    for (Index k = 0; k < cols; ++k) V(i, k) = monomial(cloud.points().row(i), basis[k]);
  return V;
}

/// phi(r) = gamma (-1)^ceil(beta/2) r^beta, conditionally positive definite
/// of order ceil(beta/2) when beta is not an even integer.
struct CpdKernelSpec {
  double beta = 1.0;
  double gamma = 1.0;
  int order = 1;
  double sign = -1.0;

  static CpdKernelSpec make(double beta, double gamma = 1.0) {
    if (!(beta > 0.0) || !std::isfinite(beta))
      fail(ErrorKind::InvalidArgument, "beta must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      fail(ErrorKind::InvalidArgument, "gamma must be positive");
    if (std::fmod(beta, 2.0) == 0.0) fail(ErrorKind::EvenBeta, "beta cannot be an even integer");
    const int order = static_cast<int>(std::ceil(beta / 2.0));
    return CpdKernelSpec{beta, gamma, order, order % 2 == 0 ? 1.0 : -1.0};
  }

  CpdKernelSpec with_gamma(double g) const { return make(beta, g); }

  double operator()(double r) const { return gamma * sign * std::pow(r, beta); }
};

inline Matrix cpd_kernel_matrix(const PointCloud& cloud, const CpdKernelSpec& spec) {
  Matrix L(cloud.n(), cloud.n());
  for (Index i = 0; i < cloud.n(); ++i) {
    L(i, i) = spec(0.0);
    for (Index j = i + 1; j < cloud.n(); ++j) L(i, j) = L(j, i) = spec(cloud.distance(i, j));
  }
  return L;
}

inline Nnp distance_power_nnp(const PointCloud& cloud, const CpdKernelSpec& spec,
                              const BuildOptions& opts = {}) {
  return build_nnp(cpd_kernel_matrix(cloud, spec), vandermonde(cloud, spec.order), opts);
}

/// L_ij = gamma exp(-|x_i - x_j|^2 / (2 l^2)), p = 0.
inline Nnp gaussian_lensemble(const PointCloud& cloud, double lengthscale, double gamma,
                              const BuildOptions& opts = {}) {
  if (!(lengthscale > 0.0)) fail(ErrorKind::InvalidArgument, "lengthscale must be positive");
  if (!(gamma > 0.0)) fail(ErrorKind::InvalidArgument, "gamma must be positive");
  Matrix L(cloud.n(), cloud.n());
  const double c = 1.0 / (2.0 * lengthscale * lengthscale);
  for (Index i = 0; i < cloud.n(); ++i) {
    L(i, i) = gamma;
    for (Index j = i + 1; j < cloud.n(); ++j) {
      const double r = cloud.distance(i, j);
      L(i, j) = L(j, i) = gamma * std::exp(-c * r * r);
    }
  }
  return build_lensemble(std::move(L), opts);
}

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

/// Symmetric, zero row sums, nonpositive off-diagonal.
class GraphLaplacian {
 public:
  static constexpr double kZeroTol = 1e-10;

  static GraphLaplacian from_edges(Index n, const std::vector<Edge>& edges) {
    if (n < 1) fail(ErrorKind::InvalidArgument, "graph needs at least one vertex");
    Matrix m = Matrix::Zero(n, n);
    for (const auto& e : edges) {
      if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
        fail(ErrorKind::IndexOutOfRange, "edge endpoint outside vertex range");
      if (!(e.weight > 0.0)) fail(ErrorKind::InvalidArgument, "edge weights must be positive");
      if (e.u == e.v) continue;
      m(e.u, e.v) -= e.weight;
      m(e.v, e.u) -= e.weight;
      m(e.u, e.u) += e.weight;
      m(e.v, e.v) += e.weight;
    }
    return make(std::move(m));
  }

  static GraphLaplacian make(Matrix m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      fail(ErrorKind::InvalidArgument, "Laplacian must be square and non-empty");
    if (!linalg::is_symmetric(m)) fail(ErrorKind::InvalidArgument, "Laplacian is not symmetric");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (m.rowwise().sum().cwiseAbs().maxCoeff() > 1e-10 * scale)
      fail(ErrorKind::InvalidArgument, "Laplacian rows must sum to zero");
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j)
        if (i != j && m(i, j) > 0.0)
          fail(ErrorKind::InvalidArgument, "Laplacian off-diagonals must be nonpositive");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    GraphLaplacian lap(std::move(m), eig.eigenvalues(), eig.eigenvectors());
    return lap;
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  Index n() const noexcept { return matrix_.rows(); }
  const Vector& eigenvalues() const noexcept { return values_; }
  const Matrix& eigenvectors() const noexcept { return vectors_; }

  double zero_threshold() const {
    return kZeroTol * std::max(1.0, values_(values_.size() - 1));
  }

  Index zero_multiplicity() const {
    Index k = 0;
    for (Index i = 0; i < values_.size(); ++i)
      if (values_(i) <= zero_threshold()) ++k;
    return k;
  }

  bool connected() const { return zero_multiplicity() == 1; }

 private:
  GraphLaplacian(Matrix m, Vector values, Matrix vectors)
      : matrix_(std::move(m)), values_(std::move(values)), vectors_(std::move(vectors)) {}

  Matrix matrix_;
  Vector values_;
  Matrix vectors_;
};

/// Roots of a uniform spanning forest: the pair (q L^+; 1).
inline Nnp forest_roots_nnp(const GraphLaplacian& lap, double q, const BuildOptions& opts = {}) {
  if (!(q > 0.0)) fail(ErrorKind::InvalidArgument, "forest parameter q must be positive");
  if (!lap.connected())
    fail(ErrorKind::DisconnectedGraph,
         "Laplacian has " + std::to_string(lap.zero_multiplicity()) + " zero eigenvalues");
  const Index n = lap.n();
  Matrix L = Matrix::Zero(n, n);
  const double thr = lap.zero_threshold();
  for (Index i = 0; i < n; ++i) {
    const double lam = lap.eigenvalues()(i);
    if (lam > thr) L.noalias() += (q / lam) * lap.eigenvectors().col(i) * lap.eigenvectors().col(i).transpose();
  }
  return build_nnp(std::move(L), Matrix::Ones(n, 1), opts);
}

struct GammaCalibration {
  double gamma = 0.0;
  double expected_size = 0.0;
  /// Target equals p: gamma was pushed to the zero limit.
  bool degenerate = false;
};

/// E|X| as a function of a global scale on L, given the mixture at scale 1.
inline double expected_size_at(const SpectralMixture& unit, double gamma) {
  double e = static_cast<double>(unit.p());
  for (Index i = 0; i < unit.spectrum.values.size(); ++i) {
    const double g = gamma * unit.spectrum.values(i);
    e += g / (1.0 + g);
  }
  return e;
}

/// Bisection (in log gamma) on E|X| = target using the unit-scale spectrum.
inline GammaCalibration calibrate_gamma(const SpectralMixture& unit, double target,
                                        double tol = 1e-6) {
  const double p = static_cast<double>(unit.p());
  const double top = p + unit.q();
  if (!(target >= p) || !(target < top))
    fail(ErrorKind::TargetOutOfRange, "target " + std::to_string(target) + " outside [p, p + q) = [" +
                                          std::to_string(p) + ", " + std::to_string(top) + ")");
  if (target - p <= 1e-12) return GammaCalibration{1e-15, expected_size_at(unit, 1e-15), true};

  double lo = 1.0, hi = 1.0;
  while (expected_size_at(unit, lo) > target) lo *= 0.5;
  while (expected_size_at(unit, hi) < target) hi *= 2.0;
  double mid = std::sqrt(lo * hi);
  for (int it = 0; it < 400; ++it) {
    mid = std::sqrt(lo * hi);
    const double e = expected_size_at(unit, mid);
    if (std::abs(e - target) < tol) break;
    (e < target ? lo : hi) = mid;
  }
  return GammaCalibration{mid, expected_size_at(unit, mid), false};
}

/// Builder maps gamma to a model; it is evaluated once, at gamma = 1.
inline GammaCalibration calibrate_gamma(const std::function<Nnp(double)>& builder, double target,
                                        double tol = 1e-6) {
  return calibrate_gamma(builder(1.0).mixture(), target, tol);
}

inline GammaCalibration calibrate_gamma(const PointCloud& cloud, const CpdKernelSpec& spec,
                                        double target, double tol = 1e-6) {
  return calibrate_gamma([&](double g) { return distance_power_nnp(cloud, spec.with_gamma(g)); },
                         target, tol);
}

struct InterpolationResult {
  Vector alpha;        // kernel weights, length n
  Vector beta_coeffs;  // polynomial coefficients in graded-lex monomial order
};

/// Solves [[L, V], [V^T, 0]] (alpha, beta) = (y, 0).
inline InterpolationResult interpolation_solve(const PointCloud& cloud, const CpdKernelSpec& spec,
                                               const Vector& y) {
  if (y.size() != cloud.n()) fail(ErrorKind::InvalidArgument, "y must have one value per point");
  const Matrix L = cpd_kernel_matrix(cloud, spec);
  const Matrix V = vandermonde(cloud, spec.order);
  const Matrix M = linalg::SaddleSystem{L, V}.bordered();
  Eigen::FullPivLU<Matrix> lu(M);
  if (!lu.isInvertible()) fail(ErrorKind::SingularSystem, "interpolation system is singular");
  Vector rhs = Vector::Zero(M.rows());
  rhs.head(cloud.n()) = y;
  const Vector sol = lu.solve(rhs);
  return InterpolationResult{sol.head(cloud.n()), sol.tail(V.cols())};
}

/// s(x) = sum_i alpha_i phi(|x - x_i|) + sum_k beta_k p_k(x).
inline double interpolant(const PointCloud& cloud, const CpdKernelSpec& spec,
                          const InterpolationResult& fit, const Eigen::RowVectorXd& x) {
  double s = 0.0;
  for (Index i = 0; i < cloud.n(); ++i) s += fit.alpha(i) * spec((x - cloud.points().row(i)).norm());
  const auto basis = monomial_exponents(cloud.d(), spec.order - 1);
  for (Index k = 0; k < fit.beta_coeffs.size(); ++k) s += fit.beta_coeffs(k) * monomial(x, basis[k]);
  return s;
}

}  // namespace eldpp

#endif  // ELDPP_KERNELS_HPP
