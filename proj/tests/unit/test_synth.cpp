#include <gtest/gtest.h>

#include <set>

#include "calsep/metrics.hpp"
#include "calsep/objective.hpp"
#include "calsep/synth.hpp"

using namespace calsep;

TEST(ConstructiveMap, SquareCaseIsSignedPermutation) {
  const auto m = gen_constructive_map(4, 4, 3);
  EXPECT_EQ(m.b.rowwise().sum(), Vector::Ones(4));
  EXPECT_EQ(m.b.colwise().sum(), Vector::Ones(4).transpose());
  EXPECT_LT((m.v.cwiseAbs() - m.b).norm(), 1e-15);
}

TEST(ConstructiveMap, Invariants) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto m = gen_constructive_map(12, 1 + seed % 6, seed);
    EXPECT_LT((m.v.transpose() * m.v - Matrix::Identity(m.v.cols(), m.v.cols())).norm(), 1e-12);
    EXPECT_EQ(constructiveness_score(m.b), 1.0);
    EXPECT_EQ(support_of(m.v, 0.0), m.b);
  }
  EXPECT_THROW(gen_constructive_map(2, 3, 1), DimensionError);
}

TEST(GenInstance, ExactConsistencyAndFeasibility) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Eigen::Index l = 3 + seed % 10;
    const auto gt = gen_instance(l, 1 + seed % (l - 1), seed);
    EXPECT_LE(std::abs(kl(gt.cov, gt.v_star)), 1e-10);
    EXPECT_TRUE(spectral_feasibility(gt.cov).feasible);
    EXPECT_GT(sym_eig(gt.cov.sigma_l().matrix()).values(0), 0.0);
    EXPECT_EQ(gt.seed, seed);
  }
}

TEST(GenInstance, Deterministic) {
  const auto a = gen_instance(8, 3, 99);
  const auto b = gen_instance(8, 3, 99);
  EXPECT_EQ(a.v_star.matrix(), b.v_star.matrix());
  EXPECT_EQ(a.cov.sigma_l().matrix(), b.cov.sigma_l().matrix());
  EXPECT_NE(a.cov.sigma_l().matrix(), gen_instance(8, 3, 100).cov.sigma_l().matrix());
}

TEST(DegradePrior, ExtremesAndContainment) {
  const auto gt = gen_instance(12, 3, 4);
  EXPECT_EQ(degrade_prior(gt.b_star, 0.0, 1).b(), gt.b_star);
  EXPECT_EQ(degrade_prior(gt.b_star, 1.0, 1).b(), Matrix::Ones(12, 3));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const double frac = 0.1 + 0.8 * static_cast<double>(seed % 9) / 8.0;
    const PriorMask m = degrade_prior(gt.b_star, frac, seed);
    EXPECT_TRUE((gt.b_star.array() <= m.b().array()).all());
    const auto full_rows = (m.b().rowwise().sum().array() == 3.0).count();
    EXPECT_EQ(full_rows, std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(frac * 12))));
  }
  EXPECT_THROW(degrade_prior(gt.b_star, 1.5, 1), PreconditionError);
}

TEST(SampleAndEstimate, ConsistencyAndReproducibility) {
  const auto gt = gen_instance(4, 2, 5);
  const auto est = sample_and_estimate(gt.cov, 100000, 7);
  const Matrix& sl = gt.cov.sigma_l().matrix();
  const Matrix& sh = gt.cov.sigma_h().matrix();
  EXPECT_LT((est.sigma_l().matrix() - sl).norm() / sl.norm(), 0.05);
  EXPECT_LT((est.sigma_h().matrix() - sh).norm() / sh.norm(), 0.05);
  const auto again = sample_and_estimate(gt.cov, 100000, 7);
  EXPECT_EQ(est.sigma_l().matrix(), again.sigma_l().matrix());
  const auto small = sample_and_estimate(gt.cov, 20, 8);
  EXPECT_GT(sym_eig(small.sigma_l().matrix()).values(0), 0.0);
}

TEST(DeriveSeed, DeterministicAndSpread) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(7, a, b));
  EXPECT_EQ(seen.size(), 400u);
}
