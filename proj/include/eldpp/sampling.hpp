#ifndef ELDPP_SAMPLING_HPP
#define ELDPP_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "eldpp/ensemble.hpp"
#include "eldpp/error.hpp"
#include "eldpp/linalg.hpp"
#include "eldpp/random.hpp"

namespace eldpp {

namespace detail {

inline Index draw_proportional(const Vector& weights, double total, Rng& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  Index last_positive = -1;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    acc += weights(i);
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

/// Projection sampler on an orthonormal basis, without the orthonormality check.
inline SampleSet projection_sample(const Matrix& U, Rng& rng) {
  const Index m = U.cols();
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(m));
  if (m == 0) return SampleSet();

  Vector score = U.rowwise().squaredNorm();
  Matrix F(m, m);
  for (Index j = 0; j < m; ++j) {
    const double total = score.sum();
    const Index x = draw_proportional(score, total, rng);
    if (x < 0) fail(ErrorKind::NumericalBreakdown, "leverage scores vanished");
    picked.push_back(static_cast<int>(x));

    const Vector y = U.row(x).transpose();
    Vector f = y;
    for (Index l = 0; l < j; ++l) f -= F.col(l) * F.col(l).dot(y);
    const double pivot = f.dot(y);
    if (pivot < 1e-12)
      fail(ErrorKind::NumericalBreakdown,
           "projection pivot " + std::to_string(pivot) + " below 1e-12");
    f /= std::sqrt(pivot);
    F.col(j) = f;

    score.array() -= (U * f).array().square();
    if (score.minCoeff() < -1e-10) {
      // drifted: rebuild residual scores from the basis built so far
      score = U.rowwise().squaredNorm();
      score.array() -= (U * F.leftCols(j + 1)).rowwise().squaredNorm().array();
    }
    score = score.cwiseMax(0.0);
    for (int chosen : picked) score(chosen) = 0.0;
  }
  return SampleSet(std::move(picked));
}

inline Matrix assemble_basis(const SpectralMixture& mix, const std::vector<int>& eigen_idx) {
  const Index p = mix.p();
  Matrix U(mix.n(), p + static_cast<Index>(eigen_idx.size()));
  U.leftCols(p) = mix.Q;
  for (std::size_t k = 0; k < eigen_idx.size(); ++k)
    U.col(p + static_cast<Index>(k)) = mix.spectrum.vectors.col(eigen_idx[k]);
  return U;
}

}  // namespace detail

/// Exact sampler for the projection DPP with kernel U U^T. Returns exactly
/// U.cols() distinct indices.
inline SampleSet sample_projection(const Matrix& U, Rng& rng) {
  const Index m = U.cols();
  if (m > U.rows()) fail(ErrorKind::NonOrthonormalInput, "more columns than rows");
  if (m > 0) {
    const double err = (U.transpose() * U - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
    if (err > 1e-10)
      fail(ErrorKind::NonOrthonormalInput, "U^T U differs from identity by " + std::to_string(err));
  }
  return detail::projection_sample(U, rng);
}

/// Independent inclusion of eigen-index i with probability bernoulli(i).
inline std::vector<int> sample_diag_varying(const Vector& bernoulli, Rng& rng) {
  std::vector<int> out;
  for (Index i = 0; i < bernoulli.size(); ++i)
    if (rng.uniform() < bernoulli(i)) out.push_back(static_cast<int>(i));
  return out;
}

inline std::vector<int> sample_diag_varying(const SpectralMixture& mix, Rng& rng) {
  return sample_diag_varying(mix.bernoulli, rng);
}

/// Exactly k indices with P(Y) proportional to prod_{i in Y} values(i).
/// Walks items from last to first, including item i with probability
/// values(i) e_{j-1}(first i items) / e_j(first i + 1 items) while j slots remain.
inline std::vector<int> sample_diag_fixed(const Vector& values, Index k, Rng& rng) {
  const Index q = values.size();
  if (k < 0 || k > q)
    fail(ErrorKind::SizeOutOfRange,
         "requested " + std::to_string(k) + " of " + std::to_string(q) + " eigenvalues");
  std::vector<int> out;
  if (k == 0) return out;
  if (k == q) {
    for (Index i = 0; i < q; ++i) out.push_back(static_cast<int>(i));
    return out;
  }
  // rescaling leaves the law unchanged and keeps the table in range
  const double top = values.maxCoeff();
  if (!(top > 0.0)) fail(ErrorKind::NumericalBreakdown, "no positive eigenvalue");
  const Vector lam = values / top;

  // E(j, i) = e_j(lam_0 .. lam_{i-1})
  Matrix E = Matrix::Zero(k + 1, q + 1);
  E.row(0).setOnes();
  for (Index i = 1; i <= q; ++i)
    for (Index j = 1; j <= k; ++j) E(j, i) = E(j, i - 1) + lam(i - 1) * E(j - 1, i - 1);
  if (!(E(k, q) > 0.0)) fail(ErrorKind::NumericalBreakdown, "elementary symmetric table underflow");

  Index remaining = k;
  for (Index i = q; i >= 1 && remaining > 0; --i) {
    const double prob = lam(i - 1) * E(remaining - 1, i - 1) / E(remaining, i);
    if (rng.uniform() < prob) {
      out.push_back(static_cast<int>(i - 1));
      --remaining;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

/// Mixture sampler from a spectral decomposition: choose eigenvectors, then
/// run the projection sampler on [Q, U_Y].
inline SampleSet sample_mixture(const SpectralMixture& mix, Rng& rng,
                                SizeMode mode = SizeMode::varying()) {
  std::vector<int> chosen;
  if (mode.is_fixed()) {
    const Index m = *mode.fixed;
    if (m < mix.p() || m > mix.p() + mix.q())
      fail(ErrorKind::SizeOutOfRange, "fixed size " + std::to_string(m) + " outside [p, p + q] = [" +
                                          std::to_string(mix.p()) + ", " +
                                          std::to_string(mix.p() + mix.q()) + "]");
    chosen = sample_diag_fixed(mix.spectrum.values, m - mix.p(), rng);
  } else {
    chosen = sample_diag_varying(mix, rng);
  }
  return detail::projection_sample(detail::assemble_basis(mix, chosen), rng);
}

inline SampleSet sample_ele(const Nnp& nnp, Rng& rng) {
  return sample_mixture(nnp.mixture(), rng);
}

inline SampleSet sample_ele_fixed(const Nnp& nnp, Index m, Rng& rng) {
  return sample_mixture(nnp.mixture(), rng, SizeMode::fixed_size(m));
}

/// Spectral mixture of (Psi Psi^T; V) from a thin SVD of Psi^T (I - QQ^T),
/// never forming the n x n kernel.
inline SpectralMixture low_rank_mixture(const Matrix& Psi, const Matrix& V,
                                        const BuildOptions& opts = {}) {
  const Index n = Psi.rows();
  Matrix features = V;
  if (features.rows() != n) {
    if (features.cols() != 0) fail(ErrorKind::InvalidArgument, "V must have as many rows as Psi");
    features.resize(n, 0);
  }
  auto span = linalg::orthonormal_span(features, opts.rank_tol);
  if (span.rank < features.cols())
    fail(ErrorKind::RankDeficientV, "V has rank " + std::to_string(span.rank));
  const Matrix& Q = span.Q;

  Matrix projected = Psi.transpose();  // r x n
  if (Q.cols() > 0) projected -= (Psi.transpose() * Q) * Q.transpose();

  linalg::SpectrumTruncation spectrum;
  spectrum.tol = opts.spectral_tol;
  spectrum.vectors.resize(n, 0);
  if (projected.size() > 0) {
    Eigen::BDCSVD<Matrix> svd(projected, Eigen::ComputeThinV);
    const Vector sigma = svd.singularValues();
    const double scale = std::max(sigma.size() ? sigma(0) * sigma(0) : 0.0, Psi.squaredNorm());
    std::vector<Index> keep;
    for (Index k = 0; k < sigma.size(); ++k)
      if (sigma(k) * sigma(k) > opts.spectral_tol * scale) keep.push_back(k);
    spectrum.q = static_cast<int>(keep.size());
    spectrum.values.resize(spectrum.q);
    spectrum.vectors.resize(n, spectrum.q);
    for (int j = 0; j < spectrum.q; ++j) {
      spectrum.values(j) = sigma(keep[j]) * sigma(keep[j]);
      spectrum.vectors.col(j) = svd.matrixV().col(keep[j]);
    }
  }
  return make_mixture(std::move(span.Q), std::move(spectrum));
}

inline SampleSet sample_low_rank(const Matrix& Psi, const Matrix& V, Rng& rng,
                                 SizeMode mode = SizeMode::varying()) {
  return sample_mixture(low_rank_mixture(Psi, V), rng, mode);
}

}  // namespace eldpp

#endif  // ELDPP_SAMPLING_HPP
