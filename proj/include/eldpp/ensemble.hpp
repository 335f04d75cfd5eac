#ifndef ELDPP_ENSEMBLE_HPP
#define ELDPP_ENSEMBLE_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eldpp/error.hpp"
#include "eldpp/linalg.hpp"

namespace eldpp {

/// A realization: sorted, duplicate-free, 0-based ground-set indices.
class SampleSet {
 public:
  SampleSet() = default;

  /// Sorts the input; rejects duplicates and negative indices.
  explicit SampleSet(std::vector<int> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      if (indices_[k] < 0) fail(ErrorKind::IndexOutOfRange, "negative index");
      if (k > 0 && indices_[k] == indices_[k - 1])
        fail(ErrorKind::InvalidArgument, "duplicate index " + std::to_string(indices_[k]));
    }
  }

  SampleSet(std::initializer_list<int> indices) : SampleSet(std::vector<int>(indices)) {}

  const std::vector<int>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }
  bool contains(int i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

  void check_bound(Index n) const {
    if (!indices_.empty() && indices_.back() >= n)
      fail(ErrorKind::IndexOutOfRange,
           "index " + std::to_string(indices_.back()) + " outside ground set of size " +
               std::to_string(n));
  }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  std::vector<int> indices_;
};

/// Varying-size law, or conditioning on |X| = m.
struct SizeMode {
  std::optional<Index> fixed;

  bool is_fixed() const { return fixed.has_value(); }
  static SizeMode varying() { return {}; }
  static SizeMode fixed_size(Index m) { return SizeMode{m}; }
};

/// Q, the truncated spectrum of the projected kernel, and the Bernoulli
/// inclusion probabilities of each retained eigenvector.
struct SpectralMixture {
  Matrix Q;
  linalg::SpectrumTruncation spectrum;
  Vector bernoulli;

  Index n() const { return Q.rows(); }
  Index p() const { return Q.cols(); }
  int q() const { return spectrum.q; }
};

inline SpectralMixture make_mixture(Matrix Q, linalg::SpectrumTruncation spectrum) {
  SpectralMixture mix{std::move(Q), std::move(spectrum), Vector()};
  const auto& lam = mix.spectrum.values;
  mix.bernoulli = lam.array() / (1.0 + lam.array());
  return mix;
}

struct BuildOptions {
  double rank_tol = linalg::kRankTol;
  double spectral_tol = linalg::kSpectralTol;
};

class Nnp;
Nnp build_nnp(Matrix L, Matrix V, const BuildOptions& opts);

/// Validated pair (L; V): symmetric L, full-column-rank V, L conditionally
/// positive semi-definite with respect to V. Immutable after construction.
class Nnp {
 public:
  const Matrix& L() const noexcept { return L_; }
  const Matrix& V() const noexcept { return V_; }
  Index n() const noexcept { return L_.rows(); }
  Index p() const noexcept { return V_.cols(); }
  int q() const noexcept { return mixture_.q(); }
  const SpectralMixture& mixture() const noexcept { return mixture_; }
  /// det(V^T V); 1 when p = 0.
  double gram_det() const noexcept { return gram_det_; }

 private:
  friend Nnp build_nnp(Matrix L, Matrix V, const BuildOptions& opts);
  Nnp(Matrix L, Matrix V, SpectralMixture mix, double gram)
      : L_(std::move(L)), V_(std::move(V)), mixture_(std::move(mix)), gram_det_(gram) {}

  Matrix L_;
  Matrix V_;
  SpectralMixture mixture_;
  double gram_det_ = 1.0;
};

inline Nnp build_nnp(Matrix L, Matrix V, const BuildOptions& opts = {}) {
  const Index n = L.rows();
  if (L.cols() != n) fail(ErrorKind::InvalidArgument, "L must be square");
  if (V.rows() != n) {
    if (V.cols() != 0) fail(ErrorKind::InvalidArgument, "V must have as many rows as L");
    V.resize(n, 0);
  }
  if (V.cols() > n) fail(ErrorKind::InvalidArgument, "V has more columns than rows");
  if (!linalg::is_symmetric(L)) fail(ErrorKind::AsymmetricL, "L is not symmetric");
  L = 0.5 * (L + L.transpose()).eval();

  auto span = linalg::orthonormal_span(V, opts.rank_tol);
  if (span.rank < V.cols())
    fail(ErrorKind::RankDeficientV, "V has rank " + std::to_string(span.rank) + " < " +
                                        std::to_string(V.cols()));
  auto spectrum = linalg::projected_spectrum(L, span.Q, opts.spectral_tol);
  const double gram = V.cols() == 0 ? 1.0 : linalg::det(V.transpose() * V);
  auto mix = make_mixture(std::move(span.Q), std::move(spectrum));
  return Nnp(std::move(L), std::move(V), std::move(mix), gram);
}

/// Plain L-ensemble, p = 0.
inline Nnp build_lensemble(Matrix L, const BuildOptions& opts = {}) {
  const Index n = L.rows();
  return build_nnp(std::move(L), Matrix(n, 0), opts);
}

/// (-1)^p det of the bordered matrix on X.
inline double unnormalized_pmf(const Nnp& nnp, const SampleSet& X) {
  X.check_bound(nnp.n());
  const auto m = static_cast<Index>(X.size());
  if (m < nnp.p() || m > nnp.p() + nnp.q()) return 0.0;
  const double d = linalg::saddle_point_det(linalg::principal(nnp.L(), X.indices()),
                                            linalg::rows_of(nnp.V(), X.indices()));
  return std::max(0.0, d);
}

inline double normalization(const Nnp& nnp, SizeMode mode = SizeMode::varying()) {
  const auto& lam = nnp.mixture().spectrum.values;
  if (!mode.is_fixed()) return (1.0 + lam.array()).prod() * nnp.gram_det();
  const Index m = *mode.fixed;
  if (m < nnp.p() || m > nnp.n())
    fail(ErrorKind::InvalidSize, "fixed size " + std::to_string(m) + " outside [p, n] = [" +
                                     std::to_string(nnp.p()) + ", " + std::to_string(nnp.n()) +
                                     "]");
  if (m > nnp.p() + nnp.q()) return 0.0;
  return linalg::elementary_symmetric(lam)(m - nnp.p()) * nnp.gram_det();
}

inline double pmf(const Nnp& nnp, const SampleSet& X, SizeMode mode = SizeMode::varying()) {
  const double z = normalization(nnp, mode);
  if (z <= 0.0)
    fail(ErrorKind::InvalidSize, "fixed size exceeds p + q; the conditional law is undefined");
  if (mode.is_fixed() && static_cast<Index>(X.size()) != *mode.fixed) {
    X.check_bound(nnp.n());
    return 0.0;
  }
  return unnormalized_pmf(nnp, X) / z;
}

/// 0 <= K <= I.
class MarginalKernel {
 public:
  static constexpr double kRangeTol = 1e-10;

  static MarginalKernel make(Matrix K) {
    if (K.rows() != K.cols()) fail(ErrorKind::KernelOutOfRange, "K must be square");
    if (!linalg::is_symmetric(K, 1e-10)) fail(ErrorKind::KernelOutOfRange, "K is not symmetric");
    K = 0.5 * (K + K.transpose()).eval();
    if (K.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(K, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      if (ev(0) < -kRangeTol || ev(ev.size() - 1) > 1.0 + kRangeTol)
        fail(ErrorKind::KernelOutOfRange, "eigenvalues of K must lie in [0, 1]");
    }
    return MarginalKernel(std::move(K));
  }

  const Matrix& K() const noexcept { return K_; }
  Index n() const noexcept { return K_.rows(); }

 private:
  explicit MarginalKernel(Matrix K) : K_(std::move(K)) {}
  Matrix K_;
};

/// K = QQ^T + sum_i pi_i u_i u_i^T.
inline MarginalKernel marginal_kernel(const SpectralMixture& mix) {
  const auto& U = mix.spectrum.vectors;
  Matrix K = mix.Q * mix.Q.transpose();
  K.noalias() += U * mix.bernoulli.asDiagonal() * U.transpose();
  return MarginalKernel::make(std::move(K));
}

inline MarginalKernel marginal_kernel(const Nnp& nnp) { return marginal_kernel(nnp.mixture()); }

struct KernelToNnpOptions {
  /// Eigenvalues at or above 1 - unit_tol are treated as exactly 1.
  double unit_tol = 1e-8;
  /// Eigenvalues at or below zero_tol are treated as exactly 0.
  double zero_tol = 1e-12;
  BuildOptions build;
};

/// Inverse map: V collects the unit eigenvectors of K, L = K (I - K)^+
/// assembled from the remaining eigenpairs.
inline Nnp kernel_to_nnp(const MarginalKernel& kernel, const KernelToNnpOptions& opts = {}) {
  const Matrix& K = kernel.K();
  const Index n = K.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
  const Vector& mu = eig.eigenvalues();
  const Matrix& U = eig.eigenvectors();
  std::vector<Index> unit, rest;
  for (Index i = 0; i < n; ++i) {
    if (mu(i) >= 1.0 - opts.unit_tol)
      unit.push_back(i);
    else if (mu(i) > opts.zero_tol)
      rest.push_back(i);
  }
  Matrix V(n, static_cast<Index>(unit.size()));
  for (Index j = 0; j < V.cols(); ++j) V.col(j) = U.col(unit[j]);
  Matrix L = Matrix::Zero(n, n);
  for (Index i : rest) {
    const double lambda = mu(i) / (1.0 - mu(i));
    L.noalias() += lambda * U.col(i) * U.col(i).transpose();
  }
  return build_nnp(std::move(L), std::move(V), opts.build);
}

/// P(|X| = m), m = 0..n, as a Poisson-binomial law on the retained
/// eigenvectors shifted by p.
inline Vector size_distribution(const SpectralMixture& mix) {
  const Index n = mix.n();
  const Index p = mix.p();
  Vector dist = Vector::Zero(n + 1);
  Vector bern = Vector::Zero(mix.q() + 1);
  bern(0) = 1.0;
  for (int i = 0; i < mix.q(); ++i) {
    const double pi = mix.bernoulli(i);
    for (int k = i + 1; k >= 1; --k) bern(k) = bern(k) * (1.0 - pi) + bern(k - 1) * pi;
    bern(0) *= 1.0 - pi;
  }
  for (int k = 0; k <= mix.q() && p + k <= n; ++k) dist(p + k) = bern(k);
  return dist;
}

inline Vector size_distribution(const Nnp& nnp) { return size_distribution(nnp.mixture()); }

inline double expected_size(const SpectralMixture& mix) {
  return static_cast<double>(mix.p()) + mix.bernoulli.sum();
}

inline double expected_size(const Nnp& nnp) { return expected_size(nnp.mixture()); }

/// Model of the complement process, built from I - K.
inline Nnp complement_nnp(const Nnp& nnp, const KernelToNnpOptions& opts = {}) {
  const Matrix K = marginal_kernel(nnp).K();
  return kernel_to_nnp(MarginalKernel::make(Matrix::Identity(nnp.n(), nnp.n()) - K), opts);
}

/// P(A subset of X) = det K_A.
inline double inclusion_probability(const MarginalKernel& kernel, const SampleSet& A) {
  A.check_bound(kernel.n());
  return linalg::det(linalg::principal(kernel.K(), A.indices()));
}

inline double inclusion_probability(const Nnp& nnp, const SampleSet& A) {
  return inclusion_probability(marginal_kernel(nnp), A);
}

/// rho(i, j) = K_ij^2 / (K_ii K_jj).
inline double repulsion_index(const MarginalKernel& kernel, Index i, Index j) {
  const Matrix& K = kernel.K();
  if (i < 0 || j < 0 || i >= K.rows() || j >= K.rows())
    fail(ErrorKind::IndexOutOfRange, "repulsion index out of range");
  constexpr double kFloor = 1e-14;
  if (K(i, i) < kFloor || K(j, j) < kFloor)
    fail(ErrorKind::DegenerateMarginal, "inclusion probability below 1e-14");
  return K(i, j) * K(i, j) / (K(i, i) * K(j, j));
}

/// The two reparametrized models (L; VR) and (L + V X^T + Y V^T; V), both of
/// which define the same process as nnp. The second must stay symmetric,
/// which holds for instance when X = Y.
inline std::pair<Nnp, Nnp> shift_invariance_witness(const Nnp& nnp, const Matrix& R,
                                                    const Matrix& Xmat, const Matrix& Ymat,
                                                    const BuildOptions& opts = {}) {
  const Index p = nnp.p();
  if (R.rows() != p || R.cols() != p)
    fail(ErrorKind::InvalidArgument, "R must be p x p");
  if (Xmat.rows() != nnp.n() || Xmat.cols() != p || Ymat.rows() != nnp.n() || Ymat.cols() != p)
    fail(ErrorKind::InvalidArgument, "shift matrices must be n x p");
  Nnp rotated = build_nnp(nnp.L(), nnp.V() * R, opts);
  Matrix shifted = nnp.L() + nnp.V() * Xmat.transpose() + Ymat * nnp.V().transpose();
  Nnp moved = build_nnp(std::move(shifted), nnp.V(), opts);
  return {std::move(rotated), std::move(moved)};
}

}  // namespace eldpp

#endif  // ELDPP_ENSEMBLE_HPP
