#pragma once

// ADMM with Stiefel splittings for the smooth masked problem
//   min f(B o S o V)  s.t.  B o S o V in St(l, h),  (B o S)^T in the set of
//   column-assignment matrices,  S in [0,1]^{l x h},
// with SCA inner loops for V (closed form) and S (diagonal QP). The
// full-prior variant fixes S = 1.

#include <array>
#include <optional>

#include "calsep/objective.hpp"
#include "calsep/qp.hpp"
#include "calsep/solver_outcome.hpp"

namespace calsep {

struct CLinConfig {
  double rho = 1.0;
  double tau_sca = 1e-3;
  double eps_step = 0.01;
  double tau_inner = 1e-3;
  double tau_abs = 1e-4;
  double tau_rel = 1e-4;
  int max_outer = 3000;
  int max_sca_iters = 200;
  // Re-solve on the learned support with the full-prior recursion before
  // reporting the map. Partial prior only.
  bool refit = true;

  static CLinConfig partial_defaults() { return {}; }
  static CLinConfig full_defaults() {
    CLinConfig c;
    c.eps_step = 0.1;
    return c;
  }
  void validate() const;
};

struct CLinState {
  Matrix v;
  Matrix s;
  Matrix y1;
  Matrix y2;
  Matrix x;  // h x l
  Matrix u1;
  Matrix u2;
  Matrix w;  // h x l
  int iter = 0;
  std::array<double, 3> primal{0, 0, 0};
  std::array<double, 3> dual{0, 0, 0};
  bool degenerate = false;
};

struct CLinInit {
  Matrix v0;
  std::optional<Matrix> s0;  // defaults to B
};

// Gaussian V0 from the seeded generator.
CLinInit clin_random_init(Eigen::Index l, Eigen::Index h, std::uint64_t seed);

CLinState clin_init(const PriorMask& mask, const CLinInit& init);

// One SCA surrogate minimizer for V (before smoothing), elementwise closed form.
Matrix v_surrogate_argmin(const CLinState& state, const Matrix& v_q, const CovariancePair& cov,
                          const PriorMask& mask, const CLinConfig& cfg);
Matrix sca_v_step(const CLinState& state, const CovariancePair& cov, const PriorMask& mask,
                  const CLinConfig& cfg);
Matrix sca_s_step(const CLinState& state, const Matrix& v_next, const CovariancePair& cov,
                  const PriorMask& mask, const CLinConfig& cfg);

// One SCA surrogate minimizer for S (before smoothing).
Matrix s_surrogate_argmin(const CLinState& state, const Matrix& v_next, const Matrix& s_q,
                          const CovariancePair& cov, const PriorMask& mask,
                          const CLinConfig& cfg);

StiefelPointd project_stiefel(const Matrix& a);

// Per column, a single 1 at the row closest to 1; ties go to the smallest row.
Matrix project_assignment(const Matrix& a);

CLinState clin_step(const CLinState& state, const CovariancePair& cov, const PriorMask& mask,
                    const CLinConfig& cfg);
// Stopping rule for the transition prev -> next.
bool clin_converged(const CLinState& prev, const CLinState& next, const PriorMask& mask,
                    const CLinConfig& cfg);

// X^T o B o S o V, the map reported at exit.
Matrix clin_support_map(const CLinState& state, const PriorMask& mask);

SolverOutcome clin_solve(const CovariancePair& cov, const PriorMask& mask,
                         const CLinConfig& cfg, const CLinInit& init);

// Full-prior variant: S fixed to 1, single splitting Y = B o V.
struct CLinFullState {
  Matrix v;
  Matrix y;
  Matrix u;
  int iter = 0;
  double primal = 0.0;
  double dual = 0.0;
};

CLinFullState clin_full_init(const PriorMask& mask, const Matrix& v0);
Matrix sca_v_step_full(const CLinFullState& state, const CovariancePair& cov,
                       const PriorMask& mask, const CLinConfig& cfg);
CLinFullState clin_full_step(const CLinFullState& state, const CovariancePair& cov,
                             const PriorMask& mask, const CLinConfig& cfg);
bool clin_full_converged(const CLinFullState& state, const PriorMask& mask,
                         const CLinConfig& cfg);

SolverOutcome clin_solve_full_prior(const CovariancePair& cov, const PriorMask& mask,
                                    const CLinConfig& cfg, const Matrix& v0);

}  // namespace calsep
