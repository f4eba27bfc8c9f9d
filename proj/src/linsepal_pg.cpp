#include "calsep/linsepal_pg.hpp"

#include <cmath>

#include "calsep/linsepal_admm.hpp"

namespace calsep {

namespace {

Eigen::Index basis_count(Eigen::Index h) { return h * (h + 1) / 2; }

// Entries where the prox map has unit derivative.
Matrix prox_active(const ProxProblem& p, const Matrix& b) {
  const double thr = p.lambda * p.rho;
  Matrix m(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      m(i, j) = (p.d(i, j) == 0.0 || std::abs(b(i, j)) - thr >= 0.0) ? 1.0 : 0.0;
  return m;
}

Matrix b_of_mu(const ProxProblem& p, const Vector& mu) {
  return p.v - p.rho * (p.egrad - p.v * sym_from_mu(mu, p.v.cols()));
}

Vector normal_coords(const Matrix& v, const Matrix& g) {
  const Eigen::Index h = v.cols();
  const Matrix vtg = v.transpose() * g;
  Vector out(basis_count(h));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = i; j < h; ++j) out(k++) = i == j ? vtg(i, i) : vtg(i, j) + vtg(j, i);
  return out;
}

}  // namespace

void NewtonConfig::validate() const {
  if (!(tau > 0 && tau < 1) || !(gamma > 0 && gamma < 1)) {
    throw PreconditionError("newton tau and gamma must lie in (0, 1)");
  }
  if (!(phi1 > 0 && phi1 <= phi2 && phi2 < 1)) throw PreconditionError("need 0 < phi1 <= phi2 < 1");
  if (!(psi1 > 1 && psi1 < psi2)) throw PreconditionError("need 1 < psi1 < psi2");
  if (!(omega > 0 && omega <= 1)) throw PreconditionError("omega must lie in (0, 1]");
  if (!(delta > 0 && delta < 1 / omega)) throw PreconditionError("delta must lie in (0, 1/omega)");
  if (!(alpha0 > 0) || !(alpha_bar >= 0)) throw PreconditionError("alpha must be positive");
  if (max_newton_iters < 1 || !(tol_factor > 0)) throw PreconditionError("bad newton budget");
}

void PgConfig::validate() const {
  if (!(lambda >= 0)) throw PreconditionError("lambda must be nonnegative");
  if (!(armijo_shrink > 0 && armijo_shrink < 1)) {
    throw PreconditionError("armijo_shrink must lie in (0, 1)");
  }
  if (!(kl_tol > 0) || max_outer < 1 || !(step_floor > 0)) {
    throw PreconditionError("bad PG stopping parameters");
  }
  newton.validate();
}

double PgConfig::resolved_rho(const CovariancePair& cov) const {
  if (rho > 0) return rho;
  return 1.0 / (2.0 * cov.sigma_l().matrix().squaredNorm());
}

double prox_h_elementwise(double b, double d, double delta) {
  return d == 0.0 ? b : soft_threshold(b, delta);
}

Matrix sym_from_mu(const Vector& mu, Eigen::Index h) {
  if (mu.size() != basis_count(h)) throw DimensionError("mu has the wrong length");
  Matrix s = Matrix::Zero(h, h);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = i; j < h; ++j) {
      s(i, j) = mu(k);
      s(j, i) = mu(k);
      ++k;
    }
  return s;
}

Matrix g_of_mu(const ProxProblem& p, const Vector& mu) {
  const Matrix b = b_of_mu(p, mu);
  const double thr = p.lambda * p.rho;
  Matrix g(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      g(i, j) = prox_h_elementwise(b(i, j), p.d(i, j), thr) - p.v(i, j);
  return g;
}

Vector f_of_mu(const ProxProblem& p, const Vector& mu) {
  return normal_coords(p.v, g_of_mu(p, mu));
}

Matrix jacobian_of_mu(const ProxProblem& p, const Vector& mu) {
  const Eigen::Index h = p.v.cols();
  const Eigen::Index s = basis_count(h);
  const Matrix m = prox_active(p, b_of_mu(p, mu));
  Matrix jac(s, s);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = i; j < h; ++j) {
      Matrix e = Matrix::Zero(h, h);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      jac.col(col++) = normal_coords(p.v, p.rho * m.cwiseProduct(p.v * e));
    }
  return jac;
}

NewtonResult newton_solve(const ProxProblem& p, const NewtonConfig& cfg) {
  const Eigen::Index s = basis_count(p.v.cols());
  const double tol = cfg.tol_factor * static_cast<double>(s);

  NewtonResult res;
  Vector mu = Vector::Zero(s);
  Vector f = f_of_mu(p, mu);
  double fn = f.norm();
  double beta = fn;
  double alpha = cfg.alpha0;
  Vector best_mu = mu;
  double best_fn = fn;

  int it = 0;
  for (; it < cfg.max_newton_iters && fn > tol; ++it) {
    const Matrix jac = jacobian_of_mu(p, mu);
    const double nu = alpha * fn;
    const Vector d = (jac + nu * Matrix::Identity(s, s)).partialPivLu().solve(-f);
    const Vector u = mu + d;
    const Vector fu = f_of_mu(p, u);
    const double fun = fu.norm();

    if (fun <= cfg.gamma * beta) {
      mu = u;
      f = fu;
      fn = fun;
      beta = fun;
    } else {
      const double dn2 = d.squaredNorm();
      const double xi = dn2 > 0 ? -fu.dot(d) / dn2 : 0.0;
      if (xi >= cfg.phi1) {
        const Vector v = mu - (fu.dot(mu - u) / fu.squaredNorm()) * fu;
        const Vector fv = f_of_mu(p, v);
        if (fv.norm() <= fn) {
          mu = v;
          f = fv;
        } else {
          mu = mu - cfg.delta * f;
          f = f_of_mu(p, mu);
        }
        fn = f.norm();
      }
      if (xi >= cfg.phi2) {
        alpha = std::max(cfg.alpha_bar, alpha / cfg.psi1);
      } else if (xi < cfg.phi1) {
        alpha = cfg.psi2 * alpha;
      }
    }
    if (fn < best_fn) {
      best_fn = fn;
      best_mu = mu;
    }
  }
  res.converged = best_fn <= tol;
  res.mu = best_mu;
  res.f_norm = best_fn;
  res.g = g_of_mu(p, best_mu);
  res.iters = it;
  return res;
}

SolverOutcome pg_solve(const CovariancePair& cov, const PriorMask& mask, const PgConfig& cfg,
                       const StiefelPointd& x0) {
  cfg.validate();
  if (x0.rows() != cov.l() || x0.cols() != cov.h() || mask.rows() != cov.l() ||
      mask.cols() != cov.h()) {
    throw DimensionError("initial point and mask must be l x h");
  }
  const double rho0 = cfg.resolved_rho(cov);
  StiefelPointd v = x0;
  double klv = kl(cov, v);
  double composite = klv + cfg.lambda * penalty_l1(mask, v.matrix());

  SolverOutcome out;
  out.kl_trace.push_back(klv);
  int k = 0;
  if (klv < cfg.kl_tol) out.converged = true;

  while (!out.converged && k < cfg.max_outer) {
    const Matrix grad = egrad_smooth(cov, v.matrix());
    ProxProblem p{v.matrix(), grad, mask.d(), rho0, cfg.lambda};
    NewtonResult nr = newton_solve(p, cfg.newton);
    if (!nr.converged) {
      p.rho = 0.5 * rho0;
      NewtonResult retry = newton_solve(p, cfg.newton);
      if (retry.f_norm < nr.f_norm) nr = std::move(retry);
      else p.rho = rho0;
      if (!nr.converged) out.flagged = true;
    }
    const Matrix& g = nr.g;
    const double gn2 = g.squaredNorm();
    if (gn2 == 0.0) {
      out.note = "proximal step vanished";
      break;
    }

    double a = 1.0;
    bool accepted = false;
    while (a >= cfg.step_floor) {
      try {
        StiefelPointd cand = retract(v, a * g, Retraction::qr);
        const double kc = kl(cov, cand);
        const double cc = kc + cfg.lambda * penalty_l1(mask, cand.matrix());
        if (cc <= composite - a * gn2 / (2.0 * p.rho)) {
          v = std::move(cand);
          klv = kc;
          composite = cc;
          accepted = true;
          break;
        }
      } catch (const DegenerateInput&) {
      } catch (const DomainError&) {
      }
      a *= cfg.armijo_shrink;
    }
    if (!accepted) {
      out.flagged = true;
      out.note = "line search reached the step floor";
      break;
    }
    ++k;
    out.kl_trace.push_back(klv);
    if (klv < cfg.kl_tol) out.converged = true;
  }
  out.iters = k;
  out.v_raw = v.matrix();
  out.v_hat = out.v_raw;
  return out;
}

}  // namespace calsep
