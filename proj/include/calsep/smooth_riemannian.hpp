#pragma once

// Riemannian steepest descent / Fletcher-Reeves CG with Armijo backtracking
// on St(l, h).

#include <functional>
#include <vector>

#include "calsep/numerics.hpp"
#include "calsep/stiefel.hpp"

namespace calsep {

enum class Direction { steepest, cg };

struct SmoothSolverConfig {
  int max_iters = 500;
  double grad_tol = 1e-6;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  Retraction retraction = Retraction::qr;
  Direction direction = Direction::cg;
  int max_halvings = 50;

  void validate() const;
};

struct SmoothTrace {
  std::vector<double> objective;  // entry 0 is the starting value
  std::vector<double> grad_norm;
  int iters = 0;
  bool converged = false;
  bool stalled = false;
};

struct SmoothResult {
  StiefelPointd point;
  SmoothTrace trace;
};

using ObjectiveFn = std::function<double(const Matrix&)>;
using GradientFn = std::function<Matrix(const Matrix&)>;

SmoothResult minimize(const ObjectiveFn& objective, const GradientFn& egrad,
                      const StiefelPointd& x0, const SmoothSolverConfig& cfg = {});

}  // namespace calsep
