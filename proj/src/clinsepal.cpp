#include "calsep/clinsepal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <random>

namespace calsep {

namespace {

// Next smoothing stepsize of the SCA recursion.
double next_gamma(double g, double eps) { return g * (1.0 - eps * g); }

double tol_abs(const CLinConfig& cfg, const PriorMask& mask) {
  return cfg.tau_abs * std::sqrt(static_cast<double>(mask.rows() * mask.cols()));
}

// Smoothed SCA step x += gamma (x_plus - x), halved until the subproblem
// objective does not increase. Returns the accepted step, zero if none.
template <class Phi>
Matrix damped_step(Matrix& x, const Matrix& x_plus, double gamma, double& phi_x, Phi&& phi) {
  const Matrix dir = x_plus - x;
  if (!std::isfinite(phi_x)) {
    x += gamma * dir;
    try {
      phi_x = phi(x);
    } catch (const DomainError&) {
      phi_x = std::numeric_limits<double>::infinity();
    }
    return gamma * dir;
  }
  for (int k = 0; k < 40; ++k, gamma *= 0.5) {
    const Matrix trial = x + gamma * dir;
    double val;
    try {
      val = phi(trial);
    } catch (const DomainError&) {
      continue;
    }
    if (val <= phi_x) {
      x = trial;
      phi_x = val;
      return gamma * dir;
    }
  }
  return Matrix::Zero(x.rows(), x.cols());
}

double safe_phi(auto&& phi, const Matrix& x) {
  try {
    return phi(x);
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

Matrix polar_or_keep(const Matrix& target, const Matrix& previous, bool& degenerate) {
  try {
    return polar(target).orthogonal;
  } catch (const DegenerateInput&) {
    degenerate = true;
    return previous;
  }
}

}  // namespace

void CLinConfig::validate() const {
  if (!(rho > 0) || !(tau_sca > 0) || !(tau_inner > 0) || !(tau_abs > 0) || !(tau_rel > 0)) {
    throw PreconditionError("CLinSEPAL parameters must be positive");
  }
  if (!(eps_step > 0 && eps_step < 1)) throw PreconditionError("eps_step must lie in (0, 1)");
  if (max_outer < 1 || max_sca_iters < 1) throw PreconditionError("iteration budgets must be positive");
}

CLinInit clin_random_init(Eigen::Index l, Eigen::Index h, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix v(l, h);
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < l; ++i) v(i, j) = normal(gen);
  return {v, std::nullopt};
}

StiefelPointd project_stiefel(const Matrix& a) { return StiefelPointd(polar(a).orthogonal); }

Matrix project_assignment(const Matrix& a) {
  Matrix x = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    Eigen::Index best = 0;
    double best_dist = std::abs(a(0, j) - 1.0);
    for (Eigen::Index i = 1; i < a.rows(); ++i) {
      const double dist = std::abs(a(i, j) - 1.0);
      if (dist < best_dist) {
        best = i;
        best_dist = dist;
      }
    }
    x(best, j) = 1.0;
  }
  return x;
}

CLinState clin_init(const PriorMask& mask, const CLinInit& init) {
  if (init.v0.rows() != mask.rows() || init.v0.cols() != mask.cols()) {
    throw DimensionError("initial V must match the mask shape");
  }
  CLinState st;
  const Matrix& b = mask.b();
  st.v = init.v0;
  st.s = init.s0 ? *init.s0 : b;
  if (st.s.rows() != b.rows() || st.s.cols() != b.cols()) {
    throw DimensionError("initial S must match the mask shape");
  }
  const Matrix a = b.cwiseProduct(st.s).cwiseProduct(st.v);
  try {
    st.y1 = polar(a).orthogonal;
  } catch (const DegenerateInput&) {
    st.y1 = random_point(b.rows(), b.cols(), 0).matrix();
  }
  st.y2 = st.y1;
  st.x = b.transpose();
  st.u1 = a - st.y1;
  st.u2 = a - st.y2;
  st.w = b.cwiseProduct(st.s).transpose() - st.x;
  return st;
}

Matrix v_surrogate_argmin(const CLinState& state, const Matrix& v_q, const CovariancePair& cov,
                          const PriorMask& mask, const CLinConfig& cfg) {
  const Matrix bs = mask.b().cwiseProduct(state.s);
  const Matrix lin = cfg.rho * bs.cwiseProduct(state.y1 - state.u1);
  const Matrix denom = (cfg.tau_sca + cfg.rho * bs.array().square()).matrix();
  const Matrix grad = egrad_masked_v(cov, mask, state.s, v_q);
  return (lin + cfg.tau_sca * v_q - grad).cwiseQuotient(denom);
}

Matrix sca_v_step(const CLinState& state, const CovariancePair& cov, const PriorMask& mask,
                  const CLinConfig& cfg) {
  const Matrix bs = mask.b().cwiseProduct(state.s);
  const Matrix target = state.y1 - state.u1;
  const auto phi = [&](const Matrix& x) {
    return f_masked(cov, mask, state.s, x) +
           0.5 * cfg.rho * (bs.cwiseProduct(x) - target).squaredNorm();
  };
  Matrix v = state.v;
  double phi_v = safe_phi(phi, v);
  double gamma = 1.0;
  for (int q = 0; q < cfg.max_sca_iters; ++q) {
    Matrix v_plus;
    try {
      v_plus = v_surrogate_argmin(state, v, cov, mask, cfg);
    } catch (const DomainError&) {
      break;
    }
    const Matrix step = damped_step(v, v_plus, gamma, phi_v, phi);
    gamma = next_gamma(gamma, cfg.eps_step);
    if (step.norm() <= cfg.tau_inner) break;
  }
  return v;
}

Matrix s_surrogate_argmin(const CLinState& state, const Matrix& v_next, const Matrix& s_q,
                          const CovariancePair& cov, const PriorMask& mask,
                          const CLinConfig& cfg) {
  const Matrix& b = mask.b();
  const Eigen::Index l = b.rows();
  const Eigen::Index h = b.cols();
  const Matrix bv = b.cwiseProduct(v_next);
  const Matrix grad = egrad_masked_s(cov, mask, s_q, v_next);
  const Matrix c = grad - cfg.tau_sca * s_q - cfg.rho * (state.y2 - state.u2).cwiseProduct(bv) -
                   cfg.rho * b.cwiseProduct((state.x - state.w).transpose());
  const Matrix q = (cfg.tau_sca + cfg.rho * bv.array().square() + cfg.rho * b.array()).matrix();

  QpProblem qp;
  qp.q = Eigen::Map<const Vector>(q.data(), l * h);
  qp.c = Eigen::Map<const Vector>(c.data(), l * h);
  qp.groups.resize(static_cast<std::size_t>(h));
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < l; ++i)
      if (b(i, j) != 0.0) qp.groups[static_cast<std::size_t>(j)].push_back(j * l + i);
  const QpResult res = qp_solve(qp);
  return Eigen::Map<const Matrix>(res.x.data(), l, h);
}

Matrix sca_s_step(const CLinState& state, const Matrix& v_next, const CovariancePair& cov,
                  const PriorMask& mask, const CLinConfig& cfg) {
  const Matrix& b = mask.b();
  const Matrix bv = b.cwiseProduct(v_next);
  const Matrix target2 = state.y2 - state.u2;
  const Matrix target_x = (state.x - state.w).transpose();
  const auto phi = [&](const Matrix& x) {
    return f_masked(cov, mask, x, v_next) +
           0.5 * cfg.rho * (bv.cwiseProduct(x) - target2).squaredNorm() +
           0.5 * cfg.rho * (b.cwiseProduct(x) - target_x).squaredNorm();
  };
  Matrix s = state.s;
  double phi_s = safe_phi(phi, s);
  double gamma = 1.0;
  for (int q = 0; q < cfg.max_sca_iters; ++q) {
    Matrix s_plus;
    try {
      s_plus = s_surrogate_argmin(state, v_next, s, cov, mask, cfg);
    } catch (const DomainError&) {
      break;
    }
    const Matrix step = damped_step(s, s_plus, gamma, phi_s, phi);
    gamma = next_gamma(gamma, cfg.eps_step);
    if (step.norm() <= cfg.tau_inner) break;
  }
  return s.cwiseMax(0.0).cwiseMin(1.0);
}

CLinState clin_step(const CLinState& st, const CovariancePair& cov, const PriorMask& mask,
                    const CLinConfig& cfg) {
  const Matrix& b = mask.b();
  CLinState nx;
  nx.v = sca_v_step(st, cov, mask, cfg);
  nx.s = sca_s_step(st, nx.v, cov, mask, cfg);

  const Matrix a1 = b.cwiseProduct(st.s).cwiseProduct(nx.v);
  const Matrix a2 = b.cwiseProduct(nx.v).cwiseProduct(nx.s);
  const Matrix bs_t = b.cwiseProduct(nx.s).transpose();
  nx.degenerate = st.degenerate;
  nx.y1 = polar_or_keep(a1 + st.u1, st.y1, nx.degenerate);
  nx.y2 = polar_or_keep(a2 + st.u2, st.y2, nx.degenerate);
  nx.x = project_assignment(bs_t + st.w);

  nx.u1 = st.u1 + a1 - nx.y1;
  nx.u2 = st.u2 + a2 - nx.y2;
  nx.w = st.w + bs_t - nx.x;
  nx.iter = st.iter + 1;

  nx.primal = {(nx.y1 - a1).norm(), (nx.y2 - a2).norm(), (nx.x - bs_t).norm()};
  nx.dual = {(cfg.rho * b.cwiseProduct(st.s).cwiseProduct(nx.y1 - st.y1)).norm(),
             (cfg.rho * b.cwiseProduct(nx.v).cwiseProduct(nx.y2 - st.y2)).norm(),
             (cfg.rho * b.cwiseProduct((nx.x - st.x).transpose())).norm()};
  return nx;
}

bool clin_converged(const CLinState& prev, const CLinState& st, const PriorMask& mask,
                    const CLinConfig& cfg) {
  const Matrix& b = mask.b();
  const double ta = tol_abs(cfg, mask);
  const Matrix bs_prev = b.cwiseProduct(prev.s);
  const Matrix bs = b.cwiseProduct(st.s);
  const Matrix bv = b.cwiseProduct(st.v);
  const std::array<double, 3> eps_p = {
      ta + cfg.tau_rel * std::max(st.y1.norm(), bs_prev.cwiseProduct(st.v).norm()),
      ta + cfg.tau_rel * std::max(st.y2.norm(), bv.cwiseProduct(st.s).norm()),
      ta + cfg.tau_rel * std::max(st.x.norm(), bs.norm())};
  const std::array<double, 3> eps_d = {
      ta + cfg.tau_rel * cfg.rho * bs_prev.cwiseProduct(st.u1).norm(),
      ta + cfg.tau_rel * cfg.rho * bv.cwiseProduct(st.u2).norm(),
      ta + cfg.tau_rel * cfg.rho * b.transpose().cwiseProduct(st.w).norm()};
  for (std::size_t i = 0; i < 3; ++i)
    if (st.primal[i] > eps_p[i] || st.dual[i] > eps_d[i]) return false;
  return true;
}

Matrix clin_support_map(const CLinState& st, const PriorMask& mask) {
  return st.x.transpose().cwiseProduct(mask.b()).cwiseProduct(st.s).cwiseProduct(st.v);
}

SolverOutcome clin_solve(const CovariancePair& cov, const PriorMask& mask,
                         const CLinConfig& cfg, const CLinInit& init) {
  cfg.validate();
  if (mask.rows() != cov.l() || mask.cols() != cov.h()) {
    throw DimensionError("mask must be l x h");
  }
  CLinState st = clin_init(mask, init);
  SolverOutcome out;
  while (st.iter < cfg.max_outer) {
    CLinState nx = clin_step(st, cov, mask, cfg);
    const bool done = clin_converged(st, nx, mask, cfg);
    st = std::move(nx);
    out.primal_trace.push_back(*std::max_element(st.primal.begin(), st.primal.end()));
    out.dual_trace.push_back(*std::max_element(st.dual.begin(), st.dual.end()));
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.iters = st.iter;
  out.flagged = st.degenerate;
  out.v_raw = st.v;
  out.s_hat = st.s;
  out.x_hat = st.x;
  out.v_hat = clin_support_map(st, mask);
  out.support_disagreement = (st.x.transpose() - mask.b().cwiseProduct(st.s)).norm();
  if (cfg.refit) {
    const PriorMask learned(st.x.transpose().cwiseProduct(mask.b()));
    if (learned.is_full_prior()) {
      CLinConfig rc = cfg;
      rc.eps_step = CLinConfig::full_defaults().eps_step;
      const SolverOutcome r = clin_solve_full_prior(cov, learned, rc, out.v_hat);
      out.v_hat = r.v_hat;
      out.flagged = out.flagged || r.flagged;
      out.note = "refit on learned support: " + std::to_string(r.iters) + " iterations" +
                 (r.converged ? "" : ", not converged");
    } else {
      out.note = "learned support is not a full prior; refit skipped";
    }
  }
  try {
    out.kl_trace.push_back(kl_of_matrix(cov, out.v_hat));
  } catch (const DomainError&) {
    out.flagged = true;
    out.note = "reported map is rank deficient";
  }
  return out;
}

CLinFullState clin_full_init(const PriorMask& mask, const Matrix& v0) {
  if (v0.rows() != mask.rows() || v0.cols() != mask.cols()) {
    throw DimensionError("initial V must match the mask shape");
  }
  CLinFullState st;
  st.v = v0;
  const Matrix a = mask.b().cwiseProduct(v0);
  try {
    st.y = polar(a).orthogonal;
  } catch (const DegenerateInput&) {
    st.y = random_point(mask.rows(), mask.cols(), 0).matrix();
  }
  st.u = a - st.y;
  return st;
}

Matrix sca_v_step_full(const CLinFullState& st, const CovariancePair& cov,
                       const PriorMask& mask, const CLinConfig& cfg) {
  const Matrix& b = mask.b();
  const Matrix ones = Matrix::Ones(b.rows(), b.cols());
  const Matrix lin = cfg.rho * b.cwiseProduct(st.y - st.u);
  const Matrix denom = (cfg.tau_sca + cfg.rho * b.array()).matrix();
  Matrix v = st.v;
  double gamma = 1.0;
  for (int q = 0; q < cfg.max_sca_iters; ++q) {
    Matrix grad;
    try {
      grad = egrad_masked_v(cov, mask, ones, v);
    } catch (const DomainError&) {
      break;
    }
    const Matrix v_plus = (lin + cfg.tau_sca * v - grad).cwiseQuotient(denom);
    const Matrix step = gamma * (v_plus - v);
    v += step;
    gamma = next_gamma(gamma, cfg.eps_step);
    if (step.norm() <= cfg.tau_inner) break;
  }
  return v;
}

CLinFullState clin_full_step(const CLinFullState& st, const CovariancePair& cov,
                             const PriorMask& mask, const CLinConfig& cfg) {
  const Matrix& b = mask.b();
  CLinFullState nx;
  nx.v = sca_v_step_full(st, cov, mask, cfg);
  const Matrix a = b.cwiseProduct(nx.v);
  bool degenerate = false;
  nx.y = polar_or_keep(a + st.u, st.y, degenerate);
  nx.u = st.u + a - nx.y;
  nx.iter = st.iter + 1;
  nx.primal = (nx.y - a).norm();
  nx.dual = (cfg.rho * b.cwiseProduct(nx.y - st.y)).norm();
  return nx;
}

bool clin_full_converged(const CLinFullState& st, const PriorMask& mask,
                         const CLinConfig& cfg) {
  const Matrix& b = mask.b();
  const double ta = tol_abs(cfg, mask);
  const double eps_p = ta + cfg.tau_rel * std::max(st.y.norm(), b.cwiseProduct(st.v).norm());
  const double eps_d = ta + cfg.tau_rel * cfg.rho * b.cwiseProduct(st.u).norm();
  return st.primal <= eps_p && st.dual <= eps_d;
}

SolverOutcome clin_solve_full_prior(const CovariancePair& cov, const PriorMask& mask,
                                    const CLinConfig& cfg, const Matrix& v0) {
  cfg.validate();
  if (mask.rows() != cov.l() || mask.cols() != cov.h()) {
    throw DimensionError("mask must be l x h");
  }
  if (!mask.is_full_prior()) {
    throw PreconditionError("full-prior solve needs one 1 per row and a nonempty column each");
  }
  CLinFullState st = clin_full_init(mask, v0);
  SolverOutcome out;
  while (st.iter < cfg.max_outer) {
    st = clin_full_step(st, cov, mask, cfg);
    out.primal_trace.push_back(st.primal);
    out.dual_trace.push_back(st.dual);
    if (clin_full_converged(st, mask, cfg)) {
      out.converged = true;
      break;
    }
  }
  out.iters = st.iter;
  out.v_raw = st.v;
  out.v_hat = mask.b().cwiseProduct(st.v);
  try {
    out.kl_trace.push_back(kl_of_matrix(cov, out.v_hat));
  } catch (const DomainError&) {
    out.flagged = true;
    out.note = "reported map is rank deficient";
  }
  return out;
}

}  // namespace calsep
