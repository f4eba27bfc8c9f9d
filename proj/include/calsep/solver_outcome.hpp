#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calsep/numerics.hpp"

namespace calsep {

struct SolverOutcome {
  // The learned map in l x h form (the abstraction is its transpose).
  Matrix v_hat;
  // Solver-internal V before any masking.
  Matrix v_raw;
  std::optional<Matrix> s_hat;
  std::optional<Matrix> x_hat;
  // ||X^T - B o S||_F at exit (CLinSEPAL only).
  double support_disagreement = 0.0;

  std::vector<double> kl_trace;
  std::vector<double> primal_trace;
  std::vector<double> dual_trace;

  int iters = 0;
  bool converged = false;
  // Set when a subsolver stalled or a safeguard fired.
  bool flagged = false;
  std::string note;
};

}  // namespace calsep
