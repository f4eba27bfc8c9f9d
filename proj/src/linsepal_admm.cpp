#include "calsep/linsepal_admm.hpp"

#include <cmath>
#include <limits>

namespace calsep {

void AdmmConfig::validate() const {
  if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
  if (!(lambda >= 0.0)) throw PreconditionError("lambda must be nonnegative");
  if (!(tau_abs > 0.0) || !(tau_rel > 0.0)) throw PreconditionError("tolerances must be positive");
  if (max_outer_iters < 1) throw PreconditionError("max_outer_iters must be positive");
  inner.validate();
}

double soft_threshold(double x, double delta) {
  const double mag = std::abs(x) - delta;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

AdmmState admm_init(const PriorMask& mask, const StiefelPointd& v0) {
  if (mask.rows() != v0.rows() || mask.cols() != v0.cols()) {
    throw DimensionError("mask and initial point must share a shape");
  }
  AdmmState s{v0, mask.d().cwiseProduct(v0.matrix()),
              Matrix::Zero(v0.rows(), v0.cols())};
  return s;
}

AdmmState admm_step(const AdmmState& state, const CovariancePair& cov, const PriorMask& mask,
                    const AdmmConfig& cfg) {
  const Matrix& d = mask.d();
  const Matrix target = state.y - state.u;
  const double rho = cfg.rho;

  auto objective = [&](const Matrix& v) {
    return f_smooth(cov, v) + 0.5 * rho * (d.cwiseProduct(v) - target).squaredNorm();
  };
  auto egrad = [&](const Matrix& v) -> Matrix {
    return egrad_smooth(cov, v) + rho * d.cwiseProduct(d.cwiseProduct(v) - target);
  };
  SmoothResult inner = minimize(objective, egrad, state.v, cfg.inner);

  AdmmState next{std::move(inner.point), Matrix(), Matrix()};
  next.inner_stalled = inner.trace.stalled;
  const Matrix dv = d.cwiseProduct(next.v.matrix());
  const double delta = cfg.lambda / rho;
  next.y = (dv + state.u).unaryExpr([delta](double x) { return soft_threshold(x, delta); });
  next.u = state.u + dv - next.y;
  next.iter = state.iter + 1;
  next.primal_norm = (next.y - dv).norm();
  next.dual_norm = (rho * d.cwiseProduct(next.y - state.y)).norm();
  return next;
}

bool admm_converged(const AdmmState& state, const PriorMask& mask, const AdmmConfig& cfg) {
  const double root = std::sqrt(static_cast<double>(mask.rows() * mask.cols()));
  const Matrix dv = mask.d().cwiseProduct(state.v.matrix());
  const double eps_p = cfg.tau_abs * root + cfg.tau_rel * std::max(state.y.norm(), dv.norm());
  const double eps_d =
      cfg.tau_abs * root + cfg.tau_rel * cfg.rho * mask.d().cwiseProduct(state.u).norm();
  return state.primal_norm <= eps_p && state.dual_norm <= eps_d;
}

SolverOutcome admm_solve(const CovariancePair& cov, const PriorMask& mask,
                         const AdmmConfig& cfg, const StiefelPointd& x0) {
  cfg.validate();
  if (x0.rows() != cov.l() || x0.cols() != cov.h()) {
    throw DimensionError("initial point must be l x h");
  }
  AdmmState state = admm_init(mask, x0);
  SolverOutcome out;
  double best_kl = std::numeric_limits<double>::infinity();
  Matrix best_v = x0.matrix();
  Matrix best_y = state.y;

  while (state.iter < cfg.max_outer_iters) {
    state = admm_step(state, cov, mask, cfg);
    const double k = kl(cov, state.v);
    out.kl_trace.push_back(k);
    out.primal_trace.push_back(state.primal_norm);
    out.dual_trace.push_back(state.dual_norm);
    if (state.inner_stalled) out.flagged = true;
    if (k < best_kl) {
      best_kl = k;
      best_v = state.v.matrix();
      best_y = state.y;
    }
    if (admm_converged(state, mask, cfg)) {
      out.converged = true;
      break;
    }
  }
  out.iters = state.iter;
  out.v_raw = out.converged ? state.v.matrix() : best_v;
  // Penalized entries are read from the sparse split variable.
  const Matrix& y = out.converged ? state.y : best_y;
  const Matrix& d = mask.d();
  out.v_hat = (Matrix::Ones(d.rows(), d.cols()) - d).cwiseProduct(out.v_raw) + y;
  if (!out.converged) out.note = "max_outer_iters reached; returning best-KL iterate";
  return out;
}

}  // namespace calsep
