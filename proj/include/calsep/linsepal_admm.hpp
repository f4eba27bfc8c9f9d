#pragma once

// Manifold ADMM for min f(V) + lambda ||D o V||_1 over St(l, h), with the
// splitting Y = D o V.

#include "calsep/objective.hpp"
#include "calsep/smooth_riemannian.hpp"
#include "calsep/solver_outcome.hpp"

namespace calsep {

struct AdmmConfig {
  double rho = 1.0;
  double lambda = 1.0;
  double tau_abs = 1e-4;
  double tau_rel = 1e-4;
  int max_outer_iters = 2000;
  SmoothSolverConfig inner;

  void validate() const;
};

struct AdmmState {
  StiefelPointd v;
  Matrix y;
  Matrix u;  // scaled dual
  int iter = 0;
  double primal_norm = 0.0;
  double dual_norm = 0.0;
  bool inner_stalled = false;
};

double soft_threshold(double x, double delta);

// Y = D o V0, U = 0.
AdmmState admm_init(const PriorMask& mask, const StiefelPointd& v0);

AdmmState admm_step(const AdmmState& state, const CovariancePair& cov, const PriorMask& mask,
                    const AdmmConfig& cfg);

// Both stopping inequalities hold for a state produced by admm_step.
bool admm_converged(const AdmmState& state, const PriorMask& mask, const AdmmConfig& cfg);

SolverOutcome admm_solve(const CovariancePair& cov, const PriorMask& mask,
                         const AdmmConfig& cfg, const StiefelPointd& x0);

}  // namespace calsep
