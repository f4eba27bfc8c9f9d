#pragma once

// Manifold proximal gradient for min f(V) + lambda ||D o V||_1 over St(l, h).
// The tangent-space proximal subproblem is solved for the normal-space
// multipliers mu with a regularized semismooth Newton method.

#include "calsep/objective.hpp"
#include "calsep/solver_outcome.hpp"

namespace calsep {

struct NewtonConfig {
  double tau = 0.1;
  double gamma = 0.7;
  double phi1 = 0.1;
  double phi2 = 0.9;
  double psi1 = 2.0;
  double psi2 = 4.0;
  double omega = 1.0;
  double delta = 0.9;
  double alpha0 = 1e-3;
  double alpha_bar = 1e-12;
  int max_newton_iters = 100;
  // Stop when ||F(mu)|| <= tol_factor * s; s = h(h+1)/2.
  double tol_factor = 1e-8;

  void validate() const;
};

struct PgConfig {
  double lambda = 1.0;
  // Proximal stepsize; a nonpositive value selects 1 / (2 ||sigma_l||_F^2).
  double rho = 0.0;
  double armijo_shrink = 0.5;
  double kl_tol = 1e-4;
  int max_outer = 1000;
  double step_floor = 1e-12;
  NewtonConfig newton;

  void validate() const;
  double resolved_rho(const CovariancePair& cov) const;
};

// The subproblem data that stays fixed while mu varies.
struct ProxProblem {
  Matrix v;      // base point
  Matrix egrad;  // Euclidean gradient of f at v
  Matrix d;      // 0/1 complement mask
  double rho;
  double lambda;
};

struct NewtonResult {
  Vector mu;
  Matrix g;
  double f_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

double prox_h_elementwise(double b, double d, double delta);

// Symmetric h x h matrix sum_{i<=j} mu_ij E_ij; mu ordered by i, then j >= i.
Matrix sym_from_mu(const Vector& mu, Eigen::Index h);

// G(mu) = prox(V - rho (egrad - V sym(mu))) - V.
Matrix g_of_mu(const ProxProblem& p, const Vector& mu);

// F(mu)_k = <V E_k, G(mu)>.
Vector f_of_mu(const ProxProblem& p, const Vector& mu);

// Generalized Jacobian of f_of_mu.
Matrix jacobian_of_mu(const ProxProblem& p, const Vector& mu);

NewtonResult newton_solve(const ProxProblem& p, const NewtonConfig& cfg);

SolverOutcome pg_solve(const CovariancePair& cov, const PriorMask& mask, const PgConfig& cfg,
                       const StiefelPointd& x0);

}  // namespace calsep
