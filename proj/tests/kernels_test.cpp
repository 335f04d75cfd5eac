#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "eldpp/kernels.hpp"
#include "eldpp/oracle.hpp"
#include "eldpp/random_models.hpp"
#include "eldpp/sampling.hpp"

using namespace eldpp;

namespace {

PointCloud line(std::initializer_list<double> xs) {
  Matrix m(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return PointCloud::make(m);
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

}  // namespace

TEST(Vandermonde, ExponentsUpToDegreeTwoInThePlane) {
  const auto basis = monomial_exponents(2, 2);
  const std::vector<std::vector<int>> want{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
  ASSERT_EQ(basis.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_EQ(basis[k].exponents, want[k]);

  Rng rng(1);
  const PointCloud cloud = random_models::gaussian_cloud(10, 2, rng);
  const Matrix V = vandermonde(cloud, 3);
  ASSERT_EQ(V.cols(), 6);
  for (Index i = 0; i < 10; ++i) {
    const double x = cloud.points()(i, 0), y = cloud.points()(i, 1);
    EXPECT_DOUBLE_EQ(V(i, 4), x * y);
    EXPECT_DOUBLE_EQ(V(i, 5), x * x);
  }
}

TEST(Vandermonde, OrderOneIsOnes) {
  Rng rng(2);
  const Matrix V = vandermonde(random_models::gaussian_cloud(7, 3, rng), 1);
  ASSERT_EQ(V.cols(), 1);
  EXPECT_TRUE(V.isOnes());
}

TEST(Vandermonde, LineOrderTwo) {
  const Matrix V = vandermonde(line({0.5, -2, 3}), 2);
  ASSERT_EQ(V.cols(), 2);
  EXPECT_TRUE(V.col(0).isOnes());
  EXPECT_EQ(V(1, 1), -2.0);
  EXPECT_EQ(V(2, 1), 3.0);
}

TEST(Vandermonde, ColumnCountAndGuard) {
  Rng rng(3);
  for (Index d = 1; d <= 4; ++d)
    for (int order = 1; order <= 3; ++order)
      EXPECT_EQ(vandermonde(random_models::gaussian_cloud(40, d, rng), order).cols(),
                binomial(d + order - 1, d));
  EXPECT_EQ(kind_of([&] { vandermonde(random_models::gaussian_cloud(5, 3, rng), 3); }),
            ErrorKind::OverflowGuard);
}

TEST(DistancePower, BetaOneIsNegatedDistance) {
  Rng rng(4);
  const PointCloud cloud = random_models::gaussian_cloud(8, 2, rng);
  const Nnp nnp = distance_power_nnp(cloud, CpdKernelSpec::make(1.0, 0.7));
  EXPECT_LT((nnp.L() + 0.7 * cloud.distance_matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(nnp.p(), 1);
  EXPECT_TRUE(nnp.V().isOnes());
}

TEST(DistancePower, BetaThreeHasLinearFeatures) {
  const auto spec = CpdKernelSpec::make(3.0);
  EXPECT_EQ(spec.sign, 1.0);
  EXPECT_EQ(spec.order, 2);
  Rng rng(5);
  EXPECT_EQ(distance_power_nnp(random_models::gaussian_cloud(12, 2, rng), spec).p(), 3);
}

TEST(DistancePower, EvenBetaRejected) {
  EXPECT_EQ(kind_of([] { CpdKernelSpec::make(2.0); }), ErrorKind::EvenBeta);
  EXPECT_EQ(kind_of([] { CpdKernelSpec::make(4.0); }), ErrorKind::EvenBeta);
  EXPECT_EQ(kind_of([] { CpdKernelSpec::make(-1.0); }), ErrorKind::InvalidArgument);
}

TEST(DistancePower, ConditionallyPositiveAcrossBeta) {
  Rng rng(6);
  for (double beta : {0.5, 1.0, 1.5, 3.0, 5.0}) {
    const PointCloud cloud = random_models::gaussian_cloud(30, 2, rng);
    EXPECT_NO_THROW(distance_power_nnp(cloud, CpdKernelSpec::make(beta))) << "beta " << beta;
  }
}

TEST(DistancePower, FixedSizeLawIgnoresGamma) {
  Rng rng(7);
  const PointCloud cloud = random_models::gaussian_cloud(8, 2, rng);
  const Nnp a = distance_power_nnp(cloud, CpdKernelSpec::make(1.0, 1.0));
  const Nnp b = distance_power_nnp(cloud, CpdKernelSpec::make(1.0, 37.0));
  const auto pa = oracle::enumerate_pmf(a, SizeMode::fixed_size(3));
  const auto pb = oracle::enumerate_pmf(b, SizeMode::fixed_size(3));
  EXPECT_LT(oracle::tv_distance(pa, pb), 1e-12);
  EXPECT_GT(oracle::tv_distance(oracle::enumerate_pmf(a), oracle::enumerate_pmf(b)), 0.1);
}

TEST(Gaussian, SinglePoint) {
  const Nnp nnp = gaussian_lensemble(line({1.5}), 1.0, 2.5);
  EXPECT_EQ(nnp.L()(0, 0), 2.5);
}

TEST(Gaussian, CoincidentPointsGiveRankOne) {
  const Nnp nnp = gaussian_lensemble(line({1, 1, 1}), 0.3, 1.0);
  EXPECT_TRUE(nnp.L().isOnes());
  EXPECT_EQ(nnp.q(), 1);
}

TEST(Gaussian, WideLengthscaleTendsToConstant) {
  Rng rng(8);
  const PointCloud cloud = random_models::gaussian_cloud(6, 2, rng);
  const double diameter = cloud.distance_matrix().maxCoeff();
  const Nnp nnp = gaussian_lensemble(cloud, 1e6 * diameter, 1.7);
  EXPECT_LT((nnp.L() - 1.7 * Matrix::Ones(6, 6)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(nnp.q(), 1);
}

TEST(Forest, TwoNodePath) {
  const auto lap = GraphLaplacian::from_edges(2, {Edge{0, 1, 1.0}});
  const Nnp nnp = forest_roots_nnp(lap, 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(marginal_kernel(nnp).K());
  EXPECT_NEAR(eig.eigenvalues()(0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues()(1), 1.0, 1e-14);
}

TEST(Forest, KernelAndRootCount) {
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    const Index n = 3 + static_cast<Index>(rng.below(8));
    const double q = 0.2 + 3 * rng.uniform();
    const auto lap = GraphLaplacian::from_edges(n, random_models::random_connected_graph(n, 0.3, rng));
    const Nnp nnp = forest_roots_nnp(lap, q);
    const Matrix want = q * (q * Matrix::Identity(n, n) + lap.matrix()).inverse();
    EXPECT_LT((marginal_kernel(nnp).K() - want).cwiseAbs().maxCoeff(), 1e-10);
    const double roots = (q / (q + lap.eigenvalues().array())).sum();
    EXPECT_NEAR(expected_size(nnp), roots, 1e-10);
    EXPECT_NEAR(size_distribution(nnp)(0), 0.0, 1e-15);
  }
}

TEST(Forest, Errors) {
  const auto split = GraphLaplacian::from_edges(4, {Edge{0, 1, 1.0}, Edge{2, 3, 1.0}});
  EXPECT_FALSE(split.connected());
  EXPECT_EQ(kind_of([&] { forest_roots_nnp(split, 1.0); }), ErrorKind::DisconnectedGraph);
  const auto path = GraphLaplacian::from_edges(2, {Edge{0, 1, 1.0}});
  EXPECT_EQ(kind_of([&] { forest_roots_nnp(path, 0.0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { GraphLaplacian::from_edges(2, {Edge{0, 2, 1.0}}); }),
            ErrorKind::IndexOutOfRange);
  EXPECT_EQ(kind_of([] { GraphLaplacian::from_edges(2, {Edge{0, 1, -1.0}}); }),
            ErrorKind::InvalidArgument);
}

TEST(Calibration, TargetAtPIsDegenerate) {
  Rng rng(10);
  const PointCloud cloud = random_models::gaussian_cloud(20, 2, rng);
  const auto cal = calibrate_gamma(cloud, CpdKernelSpec::make(1.0), 1.0);
  EXPECT_TRUE(cal.degenerate);
  EXPECT_LT(cal.gamma, 1e-12);
  EXPECT_EQ(kind_of([&] { calibrate_gamma(cloud, CpdKernelSpec::make(1.0), 0.5); }),
            ErrorKind::TargetOutOfRange);
  EXPECT_EQ(kind_of([&] { calibrate_gamma(cloud, CpdKernelSpec::make(1.0), 20.0); }),
            ErrorKind::TargetOutOfRange);
}

TEST(Calibration, HitsTargetOnLargeCloud) {
  Rng rng(11);
  const PointCloud cloud = random_models::gaussian_cloud(200, 2, rng);
  const auto spec = CpdKernelSpec::make(1.0);
  const auto cal = calibrate_gamma(cloud, spec, 28.0);
  EXPECT_FALSE(cal.degenerate);
  EXPECT_NEAR(expected_size(distance_power_nnp(cloud, spec.with_gamma(cal.gamma))), 28.0, 1e-6);
}

TEST(Calibration, ExpectedSizeIncreasesWithGamma) {
  Rng rng(12);
  const Nnp unit = distance_power_nnp(random_models::gaussian_cloud(25, 2, rng), CpdKernelSpec::make(1.5));
  double last = -1.0;
  for (double g = 1e-4; g < 1e4; g *= 3) {
    const double e = expected_size_at(unit.mixture(), g);
    EXPECT_GT(e, last);
    last = e;
  }
}

TEST(Interpolation, ZeroData) {
  Rng rng(13);
  const PointCloud cloud = random_models::gaussian_cloud(15, 2, rng);
  const auto fit = interpolation_solve(cloud, CpdKernelSpec::make(1.0), Vector::Zero(15));
  EXPECT_EQ(fit.alpha.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(fit.beta_coeffs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Interpolation, ReproducesLinearPolynomial) {
  Rng rng(14);
  const PointCloud cloud = random_models::gaussian_cloud(25, 2, rng);
  const auto spec = CpdKernelSpec::make(3.0);
  const Vector y = (1.0 + 2.0 * cloud.points().col(0).array() - cloud.points().col(1).array()).matrix();
  const auto fit = interpolation_solve(cloud, spec, y);
  EXPECT_LT(fit.alpha.cwiseAbs().maxCoeff(), 1e-8);
  ASSERT_EQ(fit.beta_coeffs.size(), 3);
  EXPECT_NEAR(fit.beta_coeffs(0), 1.0, 1e-8);
  EXPECT_NEAR(fit.beta_coeffs(1), -1.0, 1e-8);
  EXPECT_NEAR(fit.beta_coeffs(2), 2.0, 1e-8);
}

TEST(Interpolation, InterpolatesAndBalances) {
  Rng rng(15);
  const PointCloud cloud = random_models::gaussian_cloud(30, 2, rng);
  const auto spec = CpdKernelSpec::make(1.0);
  Vector y(30);
  for (Index i = 0; i < 30; ++i) y(i) = std::sin(cloud.points()(i, 0)) * cloud.points()(i, 1);
  const auto fit = interpolation_solve(cloud, spec, y);
  EXPECT_LT((vandermonde(cloud, 1).transpose() * fit.alpha).cwiseAbs().maxCoeff(), 1e-10);
  for (Index i = 0; i < 30; ++i)
    EXPECT_NEAR(interpolant(cloud, spec, fit, cloud.points().row(i)), y(i), 1e-9);
}

TEST(PointCloud, CentroidAnchor) {
  EXPECT_EQ(line({-5, 0.2, 4, 10}).nearest_to_centroid(), 2);
}
