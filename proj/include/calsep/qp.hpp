#pragma once

// Separable QP with diagonal Hessian, box bounds and disjoint group
// constraints:
//   min  1/2 sum q_r x_r^2 + c_r x_r
//   s.t. sum_{r in group g} x_r >= rhs   for every group g
//        lower <= x_r <= upper
// Each group decouples; its multiplier is found exactly by walking the
// breakpoints of the piecewise-linear sum.

#include <vector>

#include "calsep/numerics.hpp"

namespace calsep {

struct QpProblem {
  Vector q;
  Vector c;
  std::vector<std::vector<Eigen::Index>> groups;
  double rhs = 1.0;
  double lower = 0.0;
  double upper = 1.0;
};

struct QpResult {
  Vector x;
  Vector eta;  // one multiplier per group
  double stationarity = 0.0;
  double primal_infeasibility = 0.0;
  double complementarity = 0.0;
};

QpResult qp_solve(const QpProblem& problem);

}  // namespace calsep
