#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "calsep/errors.hpp"
#include "calsep/qp.hpp"
#include "helpers.hpp"

using namespace calsep;
using calsep::test::uniform;

namespace {

double objective(const QpProblem& p, const Vector& x) {
  return 0.5 * (p.q.array() * x.array().square()).sum() + p.c.dot(x);
}

bool feasible(const QpProblem& p, const Vector& x, double tol) {
  if ((x.array() < p.lower - tol).any() || (x.array() > p.upper + tol).any()) return false;
  for (const auto& g : p.groups) {
    double s = 0.0;
    for (auto r : g) s += x(r);
    if (s < p.rhs - tol) return false;
  }
  return true;
}

// Every variable is lower/upper/free and every group active/inactive; each
// choice fixes an equality-constrained QP with a closed-form solution. The
// optimum is the best feasible candidate.
Vector enumerate(const QpProblem& p) {
  const Eigen::Index n = p.q.size();
  const std::size_t ng = p.groups.size();
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t g = 0; g < ng; ++g)
    for (auto r : p.groups[g]) owner[static_cast<std::size_t>(r)] = static_cast<int>(g);

  long combos = 1;
  for (Eigen::Index i = 0; i < n; ++i) combos *= 3;
  double best = std::numeric_limits<double>::infinity();
  Vector best_x;
  for (long code = 0; code < combos; ++code) {
    std::vector<int> state(static_cast<std::size_t>(n));
    long c = code;
    for (Eigen::Index i = 0; i < n; ++i, c /= 3) state[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
    for (long gmask = 0; gmask < (1L << ng); ++gmask) {
      Vector x(n);
      bool ok = true;
      std::vector<double> eta(ng, 0.0);
      for (std::size_t g = 0; g < ng && ok; ++g) {
        if (!(gmask >> g & 1)) continue;
        double fixed = 0.0, inv_q = 0.0, c_over_q = 0.0;
        for (auto r : p.groups[g]) {
          const int s = state[static_cast<std::size_t>(r)];
          if (s == 0) fixed += p.lower;
          else if (s == 1) fixed += p.upper;
          else {
            inv_q += 1.0 / p.q(r);
            c_over_q += p.c(r) / p.q(r);
          }
        }
        if (inv_q == 0.0) ok = false;
        else eta[g] = (p.rhs - fixed + c_over_q) / inv_q;
      }
      if (!ok) continue;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int s = state[static_cast<std::size_t>(i)];
        const int g = owner[static_cast<std::size_t>(i)];
        const double e = g >= 0 ? eta[static_cast<std::size_t>(g)] : 0.0;
        x(i) = s == 0 ? p.lower : (s == 1 ? p.upper : (e - p.c(i)) / p.q(i));
      }
      if (!feasible(p, x, 1e-12)) continue;
      const double val = objective(p, x);
      if (val < best) {
        best = val;
        best_x = x;
      }
    }
  }
  return best_x;
}

}  // namespace

TEST(QpSolve, UnconstrainedInterior) {
  QpProblem p;
  p.q = Vector::Constant(3, 2.0);
  p.c = Vector::Constant(3, -1.0);
  p.rhs = 0.0;
  const auto r = qp_solve(p);
  EXPECT_LT((r.x - Vector::Constant(3, 0.5)).norm(), 1e-15);
}

TEST(QpSolve, SeparableBoxClipping) {
  QpProblem p;
  p.q = Vector::Ones(3);
  p.c.resize(3);
  p.c << 0.5, -3.0, -0.25;
  const auto r = qp_solve(p);
  EXPECT_DOUBLE_EQ(r.x(0), 0.0);
  EXPECT_DOUBLE_EQ(r.x(1), 1.0);
  EXPECT_DOUBLE_EQ(r.x(2), 0.25);
}

TEST(QpSolve, RhoZeroReducesToClippedMinusC) {
  // tau = 1, rho = 0: Q = I.
  QpProblem p;
  p.q = Vector::Ones(4);
  p.c = uniform(4, 1, -2.0, 2.0, 1);
  const auto r = qp_solve(p);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(r.x(i), std::clamp(-p.c(i), 0.0, 1.0));
}

TEST(QpSolve, ActiveGroupBindsSum) {
  QpProblem p;
  p.q = Vector::Ones(2);
  p.c = Vector::Constant(2, 1.0);
  p.groups = {{0, 1}};
  const auto r = qp_solve(p);
  EXPECT_NEAR(r.x.sum(), 1.0, 1e-14);
  EXPECT_NEAR(r.x(0), 0.5, 1e-14);
  EXPECT_NEAR(r.eta(0), 1.5, 1e-14);
}

TEST(QpSolve, MatchesActiveSetEnumeration) {
  // 3 x 2 layout: six variables, groups per column from a random mask.
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Matrix b = uniform(3, 2, 0.0, 1.0, seed).unaryExpr([](double x) { return x < 0.6 ? 1.0 : 0.0; });
    QpProblem p;
    p.q = uniform(6, 1, 0.1, 3.0, 100 + seed);
    p.c = uniform(6, 1, -3.0, 3.0, 200 + seed);
    p.groups.resize(2);
    bool ok = true;
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 3; ++i)
        if (b(i, j) == 1.0) p.groups[static_cast<std::size_t>(j)].push_back(j * 3 + i);
      ok = ok && !p.groups[static_cast<std::size_t>(j)].empty();
    }
    if (!ok) continue;
    ++solved;
    const auto r = qp_solve(p);
    const Vector oracle = enumerate(p);
    EXPECT_LT((r.x - oracle).norm(), 1e-10) << "seed " << seed;
    EXPECT_LT(r.stationarity, 1e-10);
    EXPECT_LT(r.primal_infeasibility, 1e-12);
    EXPECT_LT(r.complementarity, 1e-10);
  }
  EXPECT_GE(solved, 30);
}

TEST(QpSolve, Errors) {
  QpProblem p;
  p.q = Vector::Ones(2);
  p.c = Vector::Zero(2);
  p.groups = {{0}, {0, 1}};
  EXPECT_THROW(qp_solve(p), PreconditionError);
  p.groups = {{}};
  EXPECT_THROW(qp_solve(p), StructuralInfeasibility);
  p.groups = {{0}};
  p.q(0) = 0.0;
  EXPECT_ANY_THROW(qp_solve(p));
}
