#include <gtest/gtest.h>

#include <cmath>

#include "eldpp/ensemble.hpp"
#include "eldpp/oracle.hpp"
#include "eldpp/random_models.hpp"

using namespace eldpp;

namespace {

Matrix mat(Index r, Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(BuildNnp, IdentityWithoutFeatures) {
  const Nnp nnp = build_lensemble(Matrix::Identity(3, 3));
  EXPECT_EQ(nnp.p(), 0);
  EXPECT_EQ(nnp.q(), 3);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(nnp.mixture().bernoulli(i), 0.5, 1e-15);
}

TEST(BuildNnp, NegatedDistanceWithOnes) {
  const Matrix L = -mat(3, 3, {0, 1, 3, 1, 0, 2, 3, 2, 0});
  const Nnp nnp = build_nnp(L, Matrix::Ones(3, 1));
  EXPECT_EQ(nnp.p(), 1);
  EXPECT_EQ(nnp.q(), 2);
}

TEST(BuildNnp, Errors) {
  EXPECT_EQ(kind_of([] { build_lensemble(mat(2, 2, {-1, 0, 0, 1})); }),
            ErrorKind::NotConditionallyPSD);
  EXPECT_EQ(kind_of([] { build_lensemble(mat(2, 2, {1, 1, 0, 1})); }), ErrorKind::AsymmetricL);
  EXPECT_EQ(kind_of([] { build_nnp(Matrix::Identity(3, 3), mat(3, 2, {1, 2, 1, 2, 1, 2})); }),
            ErrorKind::RankDeficientV);
  EXPECT_EQ(kind_of([] { build_nnp(Matrix::Identity(3, 3), Matrix::Ones(2, 1)); }),
            ErrorKind::InvalidArgument);
}

TEST(Pmf, BorderedTwoByTwo) {
  const Nnp nnp = build_nnp(mat(2, 2, {2, 1, 1, 3}), mat(2, 1, {1, 1}));
  EXPECT_NEAR(unnormalized_pmf(nnp, {0, 1}), 3.0, 1e-13);
  EXPECT_EQ(unnormalized_pmf(nnp, {}), 0.0);
  // singletons: -det [[L_ii, 1], [1, 0]] = 1
  EXPECT_NEAR(unnormalized_pmf(nnp, {0}), 1.0, 1e-14);
  EXPECT_NEAR(unnormalized_pmf(nnp, {1}), 1.0, 1e-14);
  EXPECT_NEAR(normalization(nnp), 5.0, 1e-12);
}

TEST(Pmf, NoFeaturesIsPrincipalMinor) {
  Rng rng(5);
  const Matrix L = random_models::random_spd(6, rng);
  const Nnp nnp = build_lensemble(L);
  const SampleSet X{1, 3, 4};
  EXPECT_NEAR(unnormalized_pmf(nnp, X), linalg::det(linalg::principal(L, X.indices())), 1e-13);
  EXPECT_NEAR(normalization(nnp), (Matrix::Identity(6, 6) + L).determinant(), 1e-10);
}

TEST(Pmf, OneByOneDiagonal) {
  const Nnp nnp = build_lensemble(Matrix::Identity(1, 1));
  EXPECT_NEAR(pmf(nnp, {}), 0.5, 1e-15);
  EXPECT_NEAR(pmf(nnp, {0}), 0.5, 1e-15);
}

TEST(Pmf, SmallerThanPIsZero) {
  Rng rng(9);
  random_models::NnpShape s;
  s.n = 6;
  s.p = 3;
  const Nnp nnp = random_models::random_nnp(s, rng);
  EXPECT_EQ(unnormalized_pmf(nnp, {0, 1}), 0.0);
  EXPECT_EQ(unnormalized_pmf(nnp, {}), 0.0);
}

TEST(Pmf, FixedModeIgnoresOtherSizes) {
  Rng rng(10);
  const Nnp nnp = random_models::random_nnp({}, rng);
  EXPECT_EQ(pmf(nnp, {0, 1, 2}, SizeMode::fixed_size(2)), 0.0);
  EXPECT_GT(pmf(nnp, {0, 1}, SizeMode::fixed_size(2)), 0.0);
  EXPECT_EQ(kind_of([&] { pmf(nnp, {0, 1}, SizeMode::fixed_size(0)); }), ErrorKind::InvalidSize);
  EXPECT_EQ(kind_of([&] { unnormalized_pmf(nnp, {0, 8}); }), ErrorKind::IndexOutOfRange);
}

TEST(Pmf, SumsToOne) {
  Rng rng(12);
  for (Index p = 0; p <= 3; ++p) {
    random_models::NnpShape s;
    s.n = 10;
    s.p = p;
    s.rank = 5;
    const Nnp nnp = random_models::random_nnp(s, rng);
    double total = 0.0;
    for (oracle::Mask m = 0; m < (oracle::Mask{1} << s.n); ++m) total += pmf(nnp, oracle::from_mask(m));
    EXPECT_NEAR(total, 1.0, 1e-10) << "p = " << p;
  }
}

TEST(Normalization, SingleFeatureOnTwoItems) {
  const double lambda = 0.7;
  // L = lambda * u u^T with u orthogonal to the ones vector
  Vector u(2);
  u << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);
  const Nnp nnp = build_nnp(lambda * u * u.transpose(), Matrix::Ones(2, 1));
  EXPECT_EQ(nnp.q(), 1);
  EXPECT_NEAR(normalization(nnp), 2.0 * (1.0 + lambda), 1e-13);
  double brute = 0.0;
  for (oracle::Mask m = 0; m < 4; ++m) brute += unnormalized_pmf(nnp, oracle::from_mask(m));
  EXPECT_NEAR(brute, 2.0 * (1.0 + lambda), 1e-13);
}

TEST(Normalization, FixedAtPIsGram) {
  Rng rng(13);
  random_models::NnpShape s;
  s.p = 2;
  const Nnp nnp = random_models::random_nnp(s, rng);
  EXPECT_NEAR(normalization(nnp, SizeMode::fixed_size(2)), nnp.gram_det(), 1e-12 * nnp.gram_det());
  EXPECT_EQ(normalization(nnp, SizeMode::fixed_size(2 + nnp.q() + 1)), 0.0);
}

TEST(MarginalKernel, DiagonalLensemble) {
  const Nnp nnp = build_lensemble(mat(3, 3, {1, 0, 0, 0, 3, 0, 0, 0, 0.5}));
  const Matrix want = Vector{{0.5, 0.75, 1.0 / 3.0}}.asDiagonal();
  EXPECT_LT(max_diff(marginal_kernel(nnp).K(), want), 1e-15);
}

TEST(MarginalKernel, FullFeaturesGiveIdentity) {
  Rng rng(14);
  const Nnp nnp = build_nnp(random_models::random_spd(4, rng), random_models::gaussian_matrix(4, 4, rng));
  EXPECT_LT(max_diff(marginal_kernel(nnp).K(), Matrix::Identity(4, 4)), 1e-13);
}

TEST(MarginalKernel, RejectsOutOfRange) {
  EXPECT_EQ(kind_of([] { MarginalKernel::make(2.0 * Matrix::Identity(2, 2)); }),
            ErrorKind::KernelOutOfRange);
  EXPECT_EQ(kind_of([] { MarginalKernel::make(-Matrix::Identity(2, 2)); }),
            ErrorKind::KernelOutOfRange);
}

TEST(KernelToNnp, HalfIdentity) {
  const Nnp nnp = kernel_to_nnp(MarginalKernel::make(0.5 * Matrix::Identity(3, 3)));
  EXPECT_EQ(nnp.p(), 0);
  EXPECT_LT(max_diff(nnp.L(), Matrix::Identity(3, 3)), 1e-14);
}

TEST(KernelToNnp, ProjectionHasNoFreePart) {
  Rng rng(15);
  const Matrix K = random_models::random_marginal_kernel(6, 2, 4, rng);
  const Nnp nnp = kernel_to_nnp(MarginalKernel::make(K));
  EXPECT_EQ(nnp.p(), 2);
  EXPECT_EQ(nnp.q(), 0);
  EXPECT_LT(nnp.L().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(KernelToNnp, OneUnitEigenvalueBecomesV) {
  Rng rng(16);
  const Matrix K = random_models::random_marginal_kernel(6, 1, 0, rng);
  const Nnp nnp = kernel_to_nnp(MarginalKernel::make(K));
  ASSERT_EQ(nnp.p(), 1);
  const Vector v = nnp.V().col(0);
  EXPECT_LT((K * v - v).norm(), 1e-12);
  EXPECT_LT(max_diff(marginal_kernel(nnp).K(), K), 1e-8);
}

TEST(KernelToNnp, RoundTrip) {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    const Matrix K = random_models::random_marginal_kernel(7, t % 3, t % 2, rng);
    EXPECT_LT(max_diff(marginal_kernel(kernel_to_nnp(MarginalKernel::make(K))).K(), K), 1e-8);
  }
}

TEST(SizeDistribution, SmallCases) {
  Vector u(2);
  u << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);
  const Vector one = size_distribution(build_nnp(u * u.transpose(), Matrix::Ones(2, 1)));
  EXPECT_NEAR(one(0), 0.0, 1e-15);
  EXPECT_NEAR(one(1), 0.5, 1e-15);
  EXPECT_NEAR(one(2), 0.5, 1e-15);

  const Vector two = size_distribution(build_lensemble(Matrix::Identity(2, 2)));
  EXPECT_NEAR(two(0), 0.25, 1e-15);
  EXPECT_NEAR(two(1), 0.5, 1e-15);
  EXPECT_NEAR(two(2), 0.25, 1e-15);
}

TEST(SizeDistribution, MatchesEnumerationAndMean) {
  Rng rng(18);
  for (Index p = 0; p <= 2; ++p) {
    random_models::NnpShape s;
    s.n = 9;
    s.p = p;
    s.rank = 4;
    s.indefinite_shift = true;
    const Nnp nnp = random_models::random_nnp(s, rng);
    const Vector law = size_distribution(nnp);
    Vector brute = Vector::Zero(s.n + 1);
    for (oracle::Mask m = 0; m < (oracle::Mask{1} << s.n); ++m)
      brute(std::popcount(m)) += pmf(nnp, oracle::from_mask(m));
    EXPECT_LT((law - brute).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(law.sum(), 1.0, 1e-12);
    const Vector sizes = Vector::LinSpaced(s.n + 1, 0, static_cast<double>(s.n));
    EXPECT_NEAR(law.dot(sizes), expected_size(nnp), 1e-10);
    EXPECT_NEAR(marginal_kernel(nnp).K().trace(), expected_size(nnp), 1e-10);
  }
}

TEST(ExpectedSize, DiagonalAndProjection) {
  EXPECT_NEAR(expected_size(build_lensemble(mat(2, 2, {1, 0, 0, 3}))), 1.25, 1e-15);
  Rng rng(19);
  const Matrix K = random_models::random_marginal_kernel(5, 3, 2, rng);
  EXPECT_NEAR(expected_size(kernel_to_nnp(MarginalKernel::make(K))), 3.0, 1e-12);
}

TEST(Complement, ProjectionSwapsRoles) {
  Rng rng(20);
  const Matrix K = random_models::random_marginal_kernel(6, 2, 4, rng);
  const Nnp comp = complement_nnp(kernel_to_nnp(MarginalKernel::make(K)));
  EXPECT_EQ(comp.p(), 4);
  EXPECT_EQ(comp.q(), 0);
  EXPECT_LT(max_diff(marginal_kernel(comp).K(), Matrix::Identity(6, 6) - K), 1e-10);
}

TEST(Complement, EmptyProcessBecomesEverything) {
  const Nnp empty = build_lensemble(Matrix::Zero(4, 4));
  EXPECT_EQ(empty.q(), 0);
  const Nnp comp = complement_nnp(empty);
  EXPECT_EQ(comp.p(), 4);
  EXPECT_NEAR(pmf(comp, {0, 1, 2, 3}), 1.0, 1e-12);
}

TEST(Complement, FullRankIsInverse) {
  Rng rng(21);
  const Matrix L = random_models::random_spd(6, rng);
  const Nnp comp = complement_nnp(build_lensemble(L));
  EXPECT_EQ(comp.p(), 0);
  EXPECT_LT(max_diff(comp.L(), L.inverse()), 1e-9);
}

TEST(Complement, Involution) {
  Rng rng(22);
  for (int t = 0; t < 5; ++t) {
    random_models::NnpShape s;
    s.p = t % 3;
    const Nnp nnp = random_models::random_nnp(s, rng);
    const Matrix K = marginal_kernel(nnp).K();
    EXPECT_LT(max_diff(marginal_kernel(complement_nnp(complement_nnp(nnp))).K(), K), 1e-8);
  }
}

TEST(Inclusion, EmptySingletonAndSupersets) {
  Rng rng(23);
  random_models::NnpShape s;
  s.p = 1;
  const Nnp nnp = random_models::random_nnp(s, rng);
  const MarginalKernel K = marginal_kernel(nnp);
  EXPECT_NEAR(inclusion_probability(K, {}), 1.0, 1e-15);
  EXPECT_NEAR(inclusion_probability(K, {3}), K.K()(3, 3), 1e-15);
  EXPECT_LT(oracle::inclusion_check(nnp, 3), 1e-10);
}

TEST(Repulsion, SmallCases) {
  const MarginalKernel pair = MarginalKernel::make(mat(2, 2, {0.5, 0.5, 0.5, 0.5}));
  EXPECT_NEAR(repulsion_index(pair, 0, 1), 1.0, 1e-15);
  EXPECT_NEAR(repulsion_index(pair, 1, 1), 1.0, 1e-15);
  const MarginalKernel diag = MarginalKernel::make(mat(2, 2, {0.3, 0, 0, 0.6}));
  EXPECT_EQ(repulsion_index(diag, 0, 1), 0.0);
  const MarginalKernel dead = MarginalKernel::make(mat(2, 2, {0, 0, 0, 0.6}));
  EXPECT_EQ(kind_of([&] { repulsion_index(dead, 0, 1); }), ErrorKind::DegenerateMarginal);
  EXPECT_EQ(kind_of([&] { repulsion_index(diag, 0, 2); }), ErrorKind::IndexOutOfRange);
}

TEST(Invariance, RescaledFeaturesAndSymmetricShift) {
  Rng rng(24);
  random_models::NnpShape s;
  s.p = 2;
  const Nnp nnp = random_models::random_nnp(s, rng);
  const Matrix Z = Matrix::Zero(s.n, s.p);
  const auto [same, unused] = shift_invariance_witness(nnp, Matrix::Identity(2, 2), Z, Z);
  for (oracle::Mask m = 0; m < (oracle::Mask{1} << s.n); ++m) {
    const SampleSet X = oracle::from_mask(m);
    EXPECT_EQ(pmf(same, X), pmf(nnp, X));
  }
  const Matrix Xm = random_models::gaussian_matrix(s.n, s.p, rng);
  const auto [scaled, shifted] = shift_invariance_witness(nnp, 2.0 * Matrix::Identity(2, 2), Xm, Xm);
  for (oracle::Mask m = 0; m < (oracle::Mask{1} << s.n); ++m) {
    const SampleSet X = oracle::from_mask(m);
    EXPECT_NEAR(pmf(scaled, X), pmf(nnp, X), 1e-9);
    EXPECT_NEAR(pmf(shifted, X), pmf(nnp, X), 1e-9);
  }
}

TEST(Conditional, CoordinateFeaturesReduceToPlainEnsemble) {
  Rng rng(25);
  const Index n = 7, p = 2;
  const Matrix L = random_models::random_spd(n, rng);
  const Nnp nnp = build_nnp(L, Matrix::Identity(n, p));
  const Matrix rest = L.bottomRightCorner(n - p, n - p);
  const double z = (Matrix::Identity(n - p, n - p) + rest).determinant();
  double forced = 0.0;
  for (oracle::Mask m = 0; m < (oracle::Mask{1} << (n - p)); ++m) {
    const auto tail = oracle::mask_indices(m);
    std::vector<int> full{0, 1};
    for (int i : tail) full.push_back(i + static_cast<int>(p));
    const double want = linalg::det(linalg::principal(rest, tail)) / z;
    const double got = pmf(nnp, SampleSet(full));
    EXPECT_NEAR(got, want, 1e-12);
    forced += got;
  }
  EXPECT_NEAR(forced, 1.0, 1e-12);
  EXPECT_NEAR(inclusion_probability(nnp, {0, 1}), 1.0, 1e-12);
}
