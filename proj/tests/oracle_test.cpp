#include <gtest/gtest.h>

#include <cmath>

#include "eldpp/oracle.hpp"
#include "eldpp/random_models.hpp"
#include "eldpp/sampling.hpp"

using namespace eldpp;
using oracle::Mask;

namespace {

Nnp model(std::uint64_t seed, Index n, Index p, Index rank, bool shift = false) {
  Rng rng(seed);
  random_models::NnpShape s;
  s.n = n;
  s.p = p;
  s.rank = rank;
  s.indefinite_shift = shift;
  return random_models::random_nnp(s, rng);
}

}  // namespace

TEST(Masks, RoundTrip) {
  const SampleSet s{0, 3, 5};
  EXPECT_EQ(oracle::to_mask(s), Mask{0b101001});
  EXPECT_EQ(oracle::from_mask(0b101001), s);
  EXPECT_TRUE(oracle::mask_indices(0).empty());
}

TEST(Enumerate, SingleItem) {
  const auto coin = oracle::enumerate_pmf(build_lensemble(Matrix::Identity(1, 1)));
  ASSERT_EQ(coin.table.size(), 2u);
  EXPECT_NEAR(coin[0], 0.5, 1e-15);
  EXPECT_NEAR(coin[1], 0.5, 1e-15);

  const auto forced = oracle::enumerate_pmf(build_nnp(Matrix::Zero(1, 1), Matrix::Ones(1, 1)));
  EXPECT_EQ(forced[0], 0.0);
  EXPECT_NEAR(forced[1], 1.0, 1e-15);
}

TEST(Enumerate, TotalMassMatchesClosedForm) {
  for (Index p = 0; p <= 3; ++p) {
    const auto dist = oracle::enumerate_pmf(model(10 + p, 9, p, 5, true));
    EXPECT_LT(dist.normalization_error, 1e-9);
    double total = 0.0;
    for (double x : dist.table) total += x;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Enumerate, FixedSizeIsConditionedVarying) {
  const Nnp nnp = model(20, 8, 2, 5, true);
  const auto varying = oracle::enumerate_pmf(nnp);
  for (Index m = 2; m <= 7; ++m) {
    const auto fixed = oracle::enumerate_pmf(nnp, SizeMode::fixed_size(m));
    double slice = 0.0;
    for (Mask x = 0; x < varying.table.size(); ++x)
      if (std::popcount(x) == m) slice += varying[x];
    for (Mask x = 0; x < varying.table.size(); ++x) {
      const double want = std::popcount(x) == m ? varying[x] / slice : 0.0;
      EXPECT_NEAR(fixed[x], want, 1e-10);
    }
  }
}

TEST(Enumerate, KernelRouteAgreesWithPmf) {
  const Nnp nnp = model(21, 7, 1, 4);
  const auto direct = oracle::enumerate_pmf(nnp);
  const auto via_kernel = oracle::enumerate_from_kernel(marginal_kernel(nnp).K());
  EXPECT_LT(oracle::tv_distance(direct, via_kernel), 1e-12);
}

TEST(Enumerate, GroundSetGuard) {
  EXPECT_THROW(oracle::enumerate_lensemble(Matrix::Identity(21, 21)), Error);
  try {
    oracle::guard(21);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GroundSetTooLarge);
  }
}

TEST(TotalVariation, SmallCases) {
  const auto coin = oracle::enumerate_lensemble(Matrix::Identity(1, 1));
  const auto empty = oracle::enumerate_lensemble(Matrix::Zero(1, 1));
  const auto full = oracle::enumerate_pmf(build_nnp(Matrix::Zero(1, 1), Matrix::Ones(1, 1)));
  EXPECT_EQ(oracle::tv_distance(coin, coin), 0.0);
  EXPECT_NEAR(oracle::tv_distance(empty, full), 1.0, 1e-15);
  EXPECT_NEAR(oracle::tv_distance(empty, coin), 0.5, 1e-15);

  oracle::EmpiricalTable table(1);
  table.add({});
  table.add({0});
  EXPECT_NEAR(oracle::tv_distance(table, coin), 0.0, 1e-15);
  EXPECT_NEAR(oracle::tv_distance(table, empty), 0.5, 1e-15);
}

TEST(Complement, TableDuality) {
  const Nnp nnp = model(30, 7, 2, 4, true);
  const auto direct = oracle::enumerate_pmf(complement_nnp(nnp));
  EXPECT_LT(oracle::tv_distance(direct, oracle::complement_of(oracle::enumerate_pmf(nnp))), 1e-10);
}

TEST(CauchyBinet, PlainEnsemble) {
  EXPECT_LT(oracle::check_cauchy_binet(model(40, 8, 0, 8)).max_relative_error, 1e-10);
}

TEST(CauchyBinet, ExtendedEnsemble) {
  const auto rep = oracle::check_cauchy_binet(model(41, 8, 2, 8, true));
  EXPECT_GT(rep.subsets_checked, 100u);
  EXPECT_LT(rep.max_relative_error, 1e-8);
}

TEST(CauchyBinet, RankDeficientRowsGiveZero) {
  Rng rng(42);
  Matrix V = random_models::gaussian_matrix(6, 2, rng);
  V.row(1) = 3.0 * V.row(0);
  const Nnp nnp = build_nnp(random_models::random_spd(6, rng), V);
  EXPECT_EQ(unnormalized_pmf(nnp, {0, 1}), 0.0);
  EXPECT_LT(oracle::check_cauchy_binet(nnp).max_relative_error, 1e-8);
}

TEST(Mixture, IdentityHolds) {
  for (Index p = 0; p <= 2; ++p) EXPECT_LT(oracle::check_mixture_identity(model(50 + p, 7, p, 4)), 1e-9);
}

TEST(ChiSquare, ProjectionHasZeroStatistic) {
  Rng rng(60);
  const Nnp nnp = build_nnp(Matrix::Zero(6, 6), random_models::gaussian_matrix(6, 3, rng));
  std::vector<SampleSet> draws;
  for (int t = 0; t < 500; ++t) draws.push_back(sample_ele(nnp, rng));
  const auto res = oracle::chi_square_size(draws, nnp);
  EXPECT_EQ(res.statistic, 0.0);
  EXPECT_TRUE(res.pass);
}

TEST(ChiSquare, DiagonalPair) {
  const Nnp nnp = build_lensemble(Matrix::Identity(2, 2));
  const auto exact = oracle::chi_square_size({250, 500, 250}, size_distribution(nnp));
  EXPECT_EQ(exact.statistic, 0.0);
  EXPECT_EQ(exact.dof, 2);
  EXPECT_TRUE(exact.pass);
  EXPECT_FALSE(oracle::chi_square_size({400, 400, 200}, size_distribution(nnp)).pass);
}

TEST(ChiSquare, ImpossibleSizeFails) {
  Vector law(3);
  law << 0.0, 0.5, 0.5;
  const auto res = oracle::chi_square_size({1, 500, 499}, law);
  EXPECT_TRUE(std::isinf(res.statistic));
  EXPECT_FALSE(res.pass);
}

TEST(ChiSquare, ExactSamplerPasses) {
  const Nnp nnp = model(61, 8, 1, 5);
  Rng rng(62);
  std::vector<std::uint64_t> counts(9, 0);
  for (int t = 0; t < 200000; ++t) ++counts[sample_ele(nnp, rng).size()];
  EXPECT_TRUE(oracle::chi_square_size(counts, size_distribution(nnp)).pass);
}

TEST(Inclusion, EmptySingletonsPairs) {
  const Nnp nnp = model(70, 8, 1, 5, true);
  const auto exact = oracle::enumerate_pmf(nnp);
  EXPECT_NEAR(oracle::superset_mass(exact, 0), 1.0, 1e-12);
  const Matrix K = marginal_kernel(nnp).K();
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(oracle::superset_mass(exact, Mask{1} << i), K(i, i), 1e-9);
  EXPECT_LT(oracle::inclusion_check(nnp, 2), 1e-8);
}

TEST(Limits, Convergence) {
  Rng rng(80);
  const Matrix A = random_models::random_spd(6, rng);
  const Matrix V = random_models::gaussian_matrix(6, 2, rng);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 0.0};
  for (Index m : {Index{2}, Index{3}}) {
    const auto rep = oracle::check_limits(A, V, eps, m);
    for (std::size_t k = 0; k + 2 < eps.size(); ++k) {
      EXPECT_GT(rep.fixed_size_tv[k], rep.fixed_size_tv[k + 1]);
      EXPECT_GT(rep.varying_size_tv[k], rep.varying_size_tv[k + 1]);
    }
    EXPECT_EQ(rep.fixed_size_tv.back(), 0.0);
    EXPECT_LT(rep.fixed_size_tv[4], 1e-3);
    EXPECT_LT(rep.varying_size_tv[4], 1e-3);
  }
  const auto trivial = oracle::check_limits(A, V, {1e-6}, 2);
  EXPECT_LT(trivial.trivial_tv[0], 1e-4);
}

TEST(Limits, RejectsSingularA) {
  Rng rng(81);
  const Matrix G = random_models::gaussian_matrix(5, 2, rng);
  EXPECT_THROW(oracle::check_limits(G * G.transpose(), random_models::gaussian_matrix(5, 1, rng),
                                    {1e-2}, 2),
               Error);
}
