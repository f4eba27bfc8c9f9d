#include "calsep/qp.hpp"

#include <algorithm>
#include <cmath>

namespace calsep {

namespace {

double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

double group_sum(const QpProblem& p, const std::vector<Eigen::Index>& g, double eta) {
  double s = 0.0;
  for (Eigen::Index r : g) s += clip((eta - p.c(r)) / p.q(r), p.lower, p.upper);
  return s;
}

double group_multiplier(const QpProblem& p, const std::vector<Eigen::Index>& g, long index) {
  if (g.empty() || static_cast<double>(g.size()) * p.upper < p.rhs) {
    throw StructuralInfeasibility(
        "group constraint " + std::to_string(index) + " cannot be satisfied within the box",
        index);
  }
  double prev = 0.0;
  double s_prev = group_sum(p, g, 0.0);
  if (s_prev >= p.rhs) return 0.0;

  std::vector<double> breaks;
  breaks.reserve(2 * g.size());
  for (Eigen::Index r : g) {
    breaks.push_back(p.c(r) + p.q(r) * p.lower);
    breaks.push_back(p.c(r) + p.q(r) * p.upper);
  }
  std::sort(breaks.begin(), breaks.end());
  for (double bk : breaks) {
    if (bk <= prev) continue;
    const double s_bk = group_sum(p, g, bk);
    if (s_bk >= p.rhs) {
      if (s_bk == s_prev) return bk;
      return prev + (p.rhs - s_prev) * (bk - prev) / (s_bk - s_prev);
    }
    prev = bk;
    s_prev = s_bk;
  }
  // Only reachable through rounding when the box total equals rhs exactly.
  return prev;
}

}  // namespace

QpResult qp_solve(const QpProblem& p) {
  const Eigen::Index n = p.q.size();
  if (p.c.size() != n) throw DimensionError("qp: q and c lengths differ");
  if (!(p.q.array() > 0.0).all()) throw PreconditionError("qp: Hessian diagonal must be positive");
  if (!(p.lower < p.upper)) throw PreconditionError("qp: empty box");

  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t g = 0; g < p.groups.size(); ++g) {
    for (Eigen::Index r : p.groups[g]) {
      if (r < 0 || r >= n) throw DimensionError("qp: group index out of range");
      if (owner[static_cast<std::size_t>(r)] != -1) throw PreconditionError("qp: groups overlap");
      owner[static_cast<std::size_t>(r)] = static_cast<int>(g);
    }
  }

  QpResult res;
  res.eta = Vector::Zero(static_cast<Eigen::Index>(p.groups.size()));
  for (std::size_t g = 0; g < p.groups.size(); ++g) {
    res.eta(static_cast<Eigen::Index>(g)) = group_multiplier(p, p.groups[g], static_cast<long>(g));
  }

  res.x.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const int g = owner[static_cast<std::size_t>(r)];
    const double eta = g < 0 ? 0.0 : res.eta(g);
    res.x(r) = clip((eta - p.c(r)) / p.q(r), p.lower, p.upper);
  }

  for (Eigen::Index r = 0; r < n; ++r) {
    const int g = owner[static_cast<std::size_t>(r)];
    const double grad = p.q(r) * res.x(r) + p.c(r) - (g < 0 ? 0.0 : res.eta(g));
    double viol;
    if (res.x(r) <= p.lower) viol = std::max(0.0, -grad);
    else if (res.x(r) >= p.upper) viol = std::max(0.0, grad);
    else viol = std::abs(grad);
    res.stationarity = std::max(res.stationarity, viol);
  }
  for (std::size_t g = 0; g < p.groups.size(); ++g) {
    double s = 0.0;
    for (Eigen::Index r : p.groups[g]) s += res.x(r);
    const double eta = res.eta(static_cast<Eigen::Index>(g));
    res.primal_infeasibility = std::max(res.primal_infeasibility, p.rhs - s);
    res.complementarity = std::max(res.complementarity, std::abs(eta * (s - p.rhs)));
  }
  return res;
}

}  // namespace calsep
