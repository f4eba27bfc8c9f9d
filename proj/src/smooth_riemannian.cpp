#include "calsep/smooth_riemannian.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace calsep {

void SmoothSolverConfig::validate() const {
  if (max_iters < 0 || max_halvings < 1) throw PreconditionError("iteration budgets must be positive");
  if (!(grad_tol > 0.0)) throw PreconditionError("grad_tol must be positive");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
    throw PreconditionError("armijo_shrink must lie in (0, 1)");
  }
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) {
    throw PreconditionError("armijo_slope must lie in (0, 1)");
  }
}

SmoothResult minimize(const ObjectiveFn& objective, const GradientFn& egrad,
                      const StiefelPointd& x0, const SmoothSolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index restart_every = x0.rows() * x0.cols();

  StiefelPointd x = x0;
  double fx = objective(x.matrix());
  Matrix grad = tangent_projection(x.matrix(), egrad(x.matrix()));
  double gnorm2 = grad.squaredNorm();

  SmoothTrace trace;
  trace.objective.push_back(fx);
  trace.grad_norm.push_back(std::sqrt(gnorm2));

  Matrix dir = -grad;
  Eigen::Index since_restart = 0;
  double step0 = 1.0;

  while (true) {
    if (std::sqrt(gnorm2) <= cfg.grad_tol) {
      trace.converged = true;
      break;
    }
    if (trace.iters >= cfg.max_iters) break;

    double slope = (grad.array() * dir.array()).sum();
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = -gnorm2;
      since_restart = 0;
    }

    bool accepted = false;
    bool tried_steepest = since_restart == 0;
    while (!accepted) {
      double t = step0;
      for (int k = 0; k < cfg.max_halvings; ++k, t *= cfg.armijo_shrink) {
        double ft;
        StiefelPointd cand = x;
        try {
          cand = retract(x, t * dir, cfg.retraction);
          ft = objective(cand.matrix());
        } catch (const DegenerateInput&) {
          continue;
        } catch (const DomainError&) {
          continue;
        }
        if (std::isfinite(ft) && ft <= fx + cfg.armijo_slope * t * slope) {
          x = std::move(cand);
          fx = ft;
          step0 = std::min(1e8, t / cfg.armijo_shrink);
          accepted = true;
          break;
        }
      }
      if (accepted || tried_steepest) break;
      dir = -grad;
      slope = -gnorm2;
      since_restart = 0;
      tried_steepest = true;
      step0 = 1.0;
    }
    if (!accepted) {
      trace.stalled = true;
      break;
    }

    ++trace.iters;
    const Matrix grad_new = tangent_projection(x.matrix(), egrad(x.matrix()));
    const double gnorm2_new = grad_new.squaredNorm();
    trace.objective.push_back(fx);
    trace.grad_norm.push_back(std::sqrt(gnorm2_new));

    ++since_restart;
    if (cfg.direction == Direction::cg && since_restart < restart_every && gnorm2 > 0.0) {
      const double beta = gnorm2_new / gnorm2;
      dir = -grad_new + beta * tangent_projection(x.matrix(), dir);
    } else {
      dir = -grad_new;
      since_restart = 0;
    }
    grad = grad_new;
    gnorm2 = gnorm2_new;
  }
  return {std::move(x), std::move(trace)};
}

}  // namespace calsep
