#include <gtest/gtest.h>

#include "calsep/objective.hpp"
#include "calsep/smooth_riemannian.hpp"
#include "calsep/synth.hpp"
#include "helpers.hpp"

using namespace calsep;
using calsep::test::gaussian;
using calsep::test::random_spd;

TEST(Minimize, StartAtMinimizer) {
  const StiefelPointd target = random_point(6, 2, 1);
  const Matrix t = target.matrix();
  const auto res = minimize([&](const Matrix& v) { return (v - t).squaredNorm(); },
                            [&](const Matrix& v) { return Matrix(2.0 * (v - t)); }, target);
  EXPECT_LE(res.trace.iters, 1);
  EXPECT_TRUE(res.trace.converged);
  EXPECT_LT((res.point.matrix() - t).norm(), 1e-8);
}

TEST(Minimize, RayleighQuotientMatchesEigenvalues) {
  const Matrix sigma = random_spd(5, 2);
  const double expect = sym_eig(sigma).values.head(2).sum();
  for (auto dir : {Direction::cg, Direction::steepest}) {
    SmoothSolverConfig cfg;
    cfg.direction = dir;
    cfg.max_iters = 5000;
    cfg.grad_tol = 1e-9;
    const auto res = minimize([&](const Matrix& v) { return (v.transpose() * sigma * v).trace(); },
                              [&](const Matrix& v) { return Matrix(2.0 * sigma * v); },
                              random_point(5, 2, 3), cfg);
    EXPECT_NEAR(res.trace.objective.back(), expect, 1e-6);
  }
}

TEST(Minimize, KlLocalConvergence) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto gt = gen_instance(8, 3, seed);
    const Matrix g = tangent_projection(gt.v_star.matrix(), gaussian(8, 3, 10 + seed));
    const StiefelPointd x0 = retract(gt.v_star, Matrix(0.05 * g / g.norm()), Retraction::qr);
    SmoothSolverConfig cfg;
    cfg.max_iters = 2000;
    cfg.grad_tol = 1e-9;
    const auto res = minimize([&](const Matrix& v) { return f_smooth(gt.cov, v); },
                              [&](const Matrix& v) { return egrad_smooth(gt.cov, v); }, x0, cfg);
    EXPECT_LE(kl(gt.cov, res.point), 1e-8);
    EXPECT_LT(stiefel_residual(res.point.matrix()), 1e-8);
  }
}

TEST(Minimize, ObjectiveTraceIsMonotone) {
  const auto gt = gen_instance(10, 3, 4);
  for (auto kind : {Retraction::qr, Retraction::polar, Retraction::cayley}) {
    SmoothSolverConfig cfg;
    cfg.retraction = kind;
    const auto res = minimize([&](const Matrix& v) { return f_smooth(gt.cov, v); },
                              [&](const Matrix& v) { return egrad_smooth(gt.cov, v); },
                              random_point(10, 3, 5), cfg);
    ASSERT_EQ(res.trace.objective.size(), static_cast<std::size_t>(res.trace.iters) + 1);
    for (std::size_t k = 1; k < res.trace.objective.size(); ++k) {
      EXPECT_LE(res.trace.objective[k], res.trace.objective[k - 1]);
    }
  }
}

TEST(SmoothSolverConfig, ValidateRejectsNonsense) {
  SmoothSolverConfig cfg;
  cfg.armijo_shrink = 1.5;
  EXPECT_ANY_THROW(cfg.validate());
  cfg = {};
  cfg.max_iters = -1;
  EXPECT_ANY_THROW(cfg.validate());
}
