#ifndef ELDPP_ORACLE_HPP
#define ELDPP_ORACLE_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "eldpp/ensemble.hpp"
#include "eldpp/error.hpp"
#include "eldpp/linalg.hpp"

namespace eldpp::oracle {

inline constexpr Index kMaxGroundSet = 20;

using Mask = std::uint32_t;

inline Mask to_mask(const SampleSet& s) {
  Mask m = 0;
  for (int i : s) m |= Mask{1} << i;
  return m;
}

inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (int i = 0; m != 0; ++i, m >>= 1)
    if (m & 1u) out.push_back(i);
  return out;
}

inline SampleSet from_mask(Mask m) { return SampleSet(mask_indices(m)); }

inline void guard(Index n) {
  if (n > kMaxGroundSet)
    fail(ErrorKind::GroundSetTooLarge,
         "enumeration limited to n <= 20, got n = " + std::to_string(n));
}

/// Probability of every subset, indexed by bit mask.
struct ExactDistribution {
  Index n = 0;
  SizeMode mode;
  std::vector<double> table;
  /// |sum of masses - closed-form normalization| / normalization.
  double normalization_error = 0.0;

  double operator[](Mask m) const { return table[m]; }
  double at(const SampleSet& s) const { return table[to_mask(s)]; }
};

struct EmpiricalTable {
  Index n = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  explicit EmpiricalTable(Index ground = 0) : n(ground) {
    guard(ground);
    counts.assign(std::size_t{1} << ground, 0);
  }

  void add_mask(Mask m) {
    ++counts[m];
    ++total;
  }
  void add(const SampleSet& s) {
    s.check_bound(n);
    add_mask(to_mask(s));
  }

  double frequency(Mask m) const {
    return total == 0 ? 0.0 : static_cast<double>(counts[m]) / static_cast<double>(total);
  }
};

namespace detail {

inline ExactDistribution normalized(Index n, SizeMode mode, std::vector<double> mass) {
  double total = 0.0;
  for (double v : mass) total += v;
  if (!(total > 0.0)) fail(ErrorKind::NumericalBreakdown, "enumerated masses sum to zero");
  for (double& v : mass) v /= total;
  return ExactDistribution{n, mode, std::move(mass), 0.0};
}

inline bool size_matches(Mask m, SizeMode mode) {
  return !mode.is_fixed() || std::popcount(m) == *mode.fixed;
}

}  // namespace detail

/// Brute-force law of the extended L-ensemble; the subset-sum total is
/// compared with the closed-form normalization and the gap recorded.
inline ExactDistribution enumerate_pmf(const Nnp& nnp, SizeMode mode = SizeMode::varying()) {
  const Index n = nnp.n();
  guard(n);
  const Mask count = Mask{1} << n;
  std::vector<double> mass(count, 0.0);
  double total = 0.0;
  for (Mask m = 0; m < count; ++m) {
    if (!detail::size_matches(m, mode)) continue;
    mass[m] = unnormalized_pmf(nnp, from_mask(m));
    total += mass[m];
  }
  const double closed = normalization(nnp, mode);
  auto dist = detail::normalized(n, mode, std::move(mass));
  dist.normalization_error = std::abs(total - closed) / std::abs(closed);
  return dist;
}

/// Brute-force L-ensemble law, det L_X normalized by the subset sum. No
/// validation of L beyond clamping negative round-off.
inline ExactDistribution enumerate_lensemble(const Matrix& L, SizeMode mode = SizeMode::varying()) {
  const Index n = L.rows();
  guard(n);
  const Mask count = Mask{1} << n;
  std::vector<double> mass(count, 0.0);
  for (Mask m = 0; m < count; ++m) {
    if (!detail::size_matches(m, mode)) continue;
    const auto idx = mask_indices(m);
    mass[m] = std::max(0.0, linalg::det(linalg::principal(L, idx)));
  }
  return detail::normalized(n, mode, std::move(mass));
}

/// Law of the DPP with marginal kernel K: P(X = A) = |det(K - I_{A^c})|.
inline ExactDistribution enumerate_from_kernel(const Matrix& K) {
  const Index n = K.rows();
  guard(n);
  const Mask count = Mask{1} << n;
  std::vector<double> prob(count, 0.0);
  for (Mask m = 0; m < count; ++m) {
    Matrix shifted = K;
    for (Index i = 0; i < n; ++i)
      if (!(m >> i & 1u)) shifted(i, i) -= 1.0;
    prob[m] = std::abs(linalg::det(shifted));
  }
  return ExactDistribution{n, SizeMode::varying(), std::move(prob), 0.0};
}

/// Law of the complement: table[A] <- table[A^c].
inline ExactDistribution complement_of(const ExactDistribution& dist) {
  ExactDistribution out = dist;
  const Mask full = (Mask{1} << dist.n) - 1;
  for (Mask m = 0; m <= full; ++m) out.table[m] = dist.table[full ^ m];
  if (dist.mode.is_fixed()) out.mode = SizeMode::fixed_size(dist.n - *dist.mode.fixed);
  return out;
}

inline double tv_distance(const ExactDistribution& a, const ExactDistribution& b) {
  if (a.n != b.n) fail(ErrorKind::InvalidArgument, "tables over different ground sets");
  double s = 0.0;
  for (std::size_t k = 0; k < a.table.size(); ++k) s += std::abs(a.table[k] - b.table[k]);
  return 0.5 * s;
}

inline double tv_distance(const EmpiricalTable& a, const ExactDistribution& b) {
  if (a.n != b.n) fail(ErrorKind::InvalidArgument, "tables over different ground sets");
  double s = 0.0;
  for (std::size_t k = 0; k < b.table.size(); ++k)
    s += std::abs(a.frequency(static_cast<Mask>(k)) - b.table[k]);
  return 0.5 * s;
}

inline double tv_distance(const ExactDistribution& a, const EmpiricalTable& b) {
  return tv_distance(b, a);
}

inline double tv_distance(const EmpiricalTable& a, const EmpiricalTable& b) {
  if (a.n != b.n) fail(ErrorKind::InvalidArgument, "tables over different ground sets");
  double s = 0.0;
  for (std::size_t k = 0; k < a.counts.size(); ++k)
    s += std::abs(a.frequency(static_cast<Mask>(k)) - b.frequency(static_cast<Mask>(k)));
  return 0.5 * s;
}

/// Expected TV between an exact table and an empirical table of `draws`
/// independent samples, to first order: sum_x sqrt(p_x (1 - p_x) / (2 pi draws)).
inline double expected_sampling_tv(const ExactDistribution& d, std::uint64_t draws) {
  double s = 0.0;
  for (double p : d.table) s += std::sqrt(p * (1.0 - p));
  return s / std::sqrt(2.0 * std::numbers::pi * static_cast<double>(draws));
}

/// P(W subset of X) summed from the table.
inline double superset_mass(const ExactDistribution& d, Mask w) {
  double s = 0.0;
  for (std::size_t k = 0; k < d.table.size(); ++k)
    if ((static_cast<Mask>(k) & w) == w) s += d.table[k];
  return s;
}

/// (-1)^p det [[L_X, V_X], [V_X^T, 0]] in extended precision. A double LU
/// loses eps * cond(L_X) relative accuracy, which for nearly singular minors
/// is above the tolerance the identity checks need.
inline long double extended_saddle_det(const Matrix& kernel, const Matrix& features) {
  using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Index m = kernel.rows(), p = features.cols();
  if (m + p == 0) return 1.0L;
  if (m < p) return 0.0L;
  Wide b = Wide::Zero(m + p, m + p);
  b.topLeftCorner(m, m) = kernel.cast<long double>();
  b.topRightCorner(m, p) = features.cast<long double>();
  b.bottomLeftCorner(p, m) = features.transpose().cast<long double>();
  const long double d = b.fullPivLu().determinant();
  return p % 2 == 0 ? d : -d;
}

struct CauchyBinetReport {
  double max_relative_error = 0.0;
  std::size_t subsets_checked = 0;
};

/// Both sides of the spectral expansion of the bordered determinant for
/// every X with p <= |X| <= p + q. The right side is an explicit sum over
/// eigen-index subsets Y of size |X| - p. Relative errors use a floor of
/// 1e-12 times the largest mass so that zero-mass subsets compare absolutely.
inline CauchyBinetReport check_cauchy_binet(const Nnp& nnp) {
  const Index n = nnp.n(), p = nnp.p();
  const int q = nnp.q();
  if (n > 12) fail(ErrorKind::GroundSetTooLarge, "Cauchy-Binet check limited to n <= 12");
  if (q > 12) fail(ErrorKind::GroundSetTooLarge, "Cauchy-Binet check limited to q <= 12");
  const auto& mix = nnp.mixture();
  const Matrix& Q = mix.Q;
  const Matrix& U = mix.spectrum.vectors;
  const Vector& lam = mix.spectrum.values;

  std::vector<double> lhs, rhs;
  const Mask count = Mask{1} << n;
  for (Mask xm = 0; xm < count; ++xm) {
    const Index m = std::popcount(xm);
    if (m < p || m > p + q) continue;
    const auto X = mask_indices(xm);
    const double left = static_cast<double>(
        extended_saddle_det(linalg::principal(nnp.L(), X), linalg::rows_of(nnp.V(), X)));
    double right = 0.0;
    for (Mask ym = 0; ym < (Mask{1} << q); ++ym) {
      if (std::popcount(ym) != m - p) continue;
      const auto Y = mask_indices(ym);
      Matrix block(m, m);
      for (Index a = 0; a < m; ++a) {
        for (Index c = 0; c < p; ++c) block(a, c) = Q(X[a], c);
        for (Index c = 0; c < m - p; ++c) block(a, p + c) = U(X[a], Y[c]);
      }
      double prod = 1.0;
      for (int y : Y) prod *= lam(y);
      const double dt = linalg::det(block);
      right += dt * dt * prod;
    }
    lhs.push_back(left);
    rhs.push_back(right * nnp.gram_det());
  }
  double top = 0.0;
  for (double v : lhs) top = std::max(top, std::abs(v));
  CauchyBinetReport rep;
  rep.subsets_checked = lhs.size();
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    const double denom = std::max({std::abs(lhs[k]), std::abs(rhs[k]), 1e-12 * top, 1e-300});
    rep.max_relative_error = std::max(rep.max_relative_error, std::abs(lhs[k] - rhs[k]) / denom);
  }
  return rep;
}

/// Right side of the varying-size mixture representation, an explicit double
/// sum over eigen-subsets Y: sum_Y P(Y) det([Q, U_Y]_{X,:})^2. Returns the
/// largest absolute gap to the enumerated PMF.
inline double check_mixture_identity(const Nnp& nnp) {
  const Index n = nnp.n(), p = nnp.p();
  const int q = nnp.q();
  guard(n);
  if (q > 16) fail(ErrorKind::GroundSetTooLarge, "mixture check limited to q <= 16");
  const auto& mix = nnp.mixture();
  const auto exact = enumerate_pmf(nnp);
  std::vector<double> table(exact.table.size(), 0.0);
  for (Mask ym = 0; ym < (Mask{1} << q); ++ym) {
    const auto Y = mask_indices(ym);
    double weight = 1.0;
    for (int i = 0; i < q; ++i) weight *= (ym >> i & 1u) ? mix.bernoulli(i) : 1.0 - mix.bernoulli(i);
    const Index k = p + static_cast<Index>(Y.size());
    Matrix basis(n, k);
    basis.leftCols(p) = mix.Q;
    for (std::size_t c = 0; c < Y.size(); ++c) basis.col(p + c) = mix.spectrum.vectors.col(Y[c]);
    for (Mask xm = 0; xm < table.size(); ++xm) {
      if (std::popcount(xm) != k) continue;
      const double d = linalg::det(linalg::rows_of(basis, mask_indices(xm)));
      table[xm] += weight * d * d;
    }
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k)
    worst = std::max(worst, std::abs(table[k] - exact.table[k]));
  return worst;
}

struct LimitReport {
  std::vector<double> epsilons;
  /// |DPP|_m(eps A + VV^T) against its limit.
  std::vector<double> fixed_size_tv;
  /// DPP(A + VV^T / eps) against DPP(A; V).
  std::vector<double> varying_size_tv;
  /// DPP(eps A + VV^T) against DPP(VV^T).
  std::vector<double> trivial_tv;
};

/// TV distances between the perturbed L-ensembles and their limits, by
/// enumeration. At eps = 0 each family is replaced by its leading-order term.
inline LimitReport check_limits(const Matrix& A, const Matrix& V, const std::vector<double>& epsilons,
                                Index m) {
  const Index n = A.rows(), p = V.cols();
  if (n > 10) fail(ErrorKind::GroundSetTooLarge, "limit check limited to n <= 10");
  if (m < 1 || m > n) fail(ErrorKind::InvalidSize, "fixed size outside [1, n]");
  const Nnp extended = build_nnp(A, V);
  if (extended.q() != n - p)
    fail(ErrorKind::InvalidArgument, "A must be positive definite for the limit check");
  const Matrix vvt = V * V.transpose();

  const ExactDistribution fixed_limit =
      m <= p ? enumerate_lensemble(vvt, SizeMode::fixed_size(m))
             : enumerate_pmf(extended, SizeMode::fixed_size(m));
  const ExactDistribution varying_limit = enumerate_pmf(extended);
  const ExactDistribution trivial_limit = enumerate_lensemble(vvt);

  LimitReport rep;
  rep.epsilons = epsilons;
  for (double eps : epsilons) {
    if (eps == 0.0) {
      rep.fixed_size_tv.push_back(0.0);
      rep.varying_size_tv.push_back(0.0);
      rep.trivial_tv.push_back(0.0);
      continue;
    }
    const Matrix small = eps * A + vvt;
    rep.fixed_size_tv.push_back(
        tv_distance(enumerate_lensemble(small, SizeMode::fixed_size(m)), fixed_limit));
    rep.varying_size_tv.push_back(tv_distance(enumerate_lensemble(A + vvt / eps), varying_limit));
    rep.trivial_tv.push_back(tv_distance(enumerate_lensemble(small), trivial_limit));
  }
  return rep;
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double critical = 0.0;
  bool pass = false;
};

/// Pearson test of observed sample sizes against the closed-form size law.
/// Adjacent sizes are pooled until each bin expects at least 5 draws.
inline ChiSquareResult chi_square_size(const std::vector<std::uint64_t>& size_counts,
                                       const Vector& size_law, double confidence = 0.999) {
  std::uint64_t total = 0;
  for (auto c : size_counts) total += c;
  ChiSquareResult res;
  if (total == 0) fail(ErrorKind::InvalidArgument, "no samples");
  const double N = static_cast<double>(total);
  for (std::size_t m = 0; m < size_counts.size(); ++m) {
    const double pm = m < static_cast<std::size_t>(size_law.size()) ? size_law(m) : 0.0;
    if (size_counts[m] > 0 && pm <= 0.0) {
      res.statistic = std::numeric_limits<double>::infinity();
      res.dof = 1;
      res.critical = boost::math::quantile(boost::math::chi_squared(1.0), confidence);
      return res;
    }
  }
  std::vector<double> expected, observed;
  double e_acc = 0.0, o_acc = 0.0;
  const std::size_t bins = std::max<std::size_t>(size_counts.size(), size_law.size());
  for (std::size_t m = 0; m < bins; ++m) {
    e_acc += m < static_cast<std::size_t>(size_law.size()) ? size_law(m) * N : 0.0;
    o_acc += m < size_counts.size() ? static_cast<double>(size_counts[m]) : 0.0;
    if (e_acc >= 5.0) {
      expected.push_back(e_acc);
      observed.push_back(o_acc);
      e_acc = o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (expected.empty()) {
      expected.push_back(e_acc);
      observed.push_back(o_acc);
    } else {
      expected.back() += e_acc;
      observed.back() += o_acc;
    }
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const double d = observed[k] - expected[k];
    res.statistic += d * d / expected[k];
  }
  res.dof = static_cast<int>(expected.size()) - 1;
  if (res.dof < 1) {
    res.critical = 0.0;
    res.pass = res.statistic < 1e-9 * N;
    return res;
  }
  res.critical = boost::math::quantile(boost::math::chi_squared(res.dof), confidence);
  res.pass = res.statistic <= res.critical;
  return res;
}

inline ChiSquareResult chi_square_size(const std::vector<SampleSet>& samples, const Nnp& nnp,
                                       double confidence = 0.999) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(nnp.n() + 1), 0);
  for (const auto& s : samples) ++counts[s.size()];
  return chi_square_size(counts, size_distribution(nnp), confidence);
}

/// max over |W| <= max_subset_size of |det K_W - sum_{X >= W} pmf(X)|.
inline double inclusion_check(const Nnp& nnp, Index max_subset_size) {
  const auto exact = enumerate_pmf(nnp);
  const auto kernel = marginal_kernel(nnp);
  double worst = 0.0;
  for (Mask w = 0; w < exact.table.size(); ++w) {
    if (std::popcount(w) > max_subset_size) continue;
    const double closed = inclusion_probability(kernel, from_mask(w));
    worst = std::max(worst, std::abs(closed - superset_mass(exact, w)));
  }
  return worst;
}

}  // namespace eldpp::oracle

#endif  // ELDPP_ORACLE_HPP
