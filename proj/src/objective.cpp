#include "calsep/objective.hpp"

#include <algorithm>
#include <cmath>

namespace calsep {

namespace {

constexpr double kSpectralSlack = 1e-10;

void check_shape(const CovariancePair& cov, const Matrix& a) {
  if (a.rows() != cov.l() || a.cols() != cov.h()) {
    throw DimensionError("map must be l x h");
  }
}

void check_mask(const CovariancePair& cov, const PriorMask& mask, const Matrix& s,
                const Matrix& v) {
  check_shape(cov, v);
  if (mask.rows() != v.rows() || mask.cols() != v.cols() || s.rows() != v.rows() ||
      s.cols() != v.cols()) {
    throw DimensionError("mask, S and V must share a shape");
  }
}

Matrix masked_map(const PriorMask& mask, const Matrix& s, const Matrix& v) {
  return mask.b().cwiseProduct(s).cwiseProduct(v);
}

}  // namespace

CovariancePair::CovariancePair(const Matrix& sigma_l, const Matrix& sigma_h)
    : sigma_l_(sigma_l), sigma_h_(sigma_h) {
  if (sigma_l_.dim() <= sigma_h_.dim()) {
    throw DimensionError("low-level dimension must exceed high-level dimension");
  }
  c_const_ = -sigma_h_.log_det() - static_cast<double>(sigma_h_.dim());
}

PriorMask::PriorMask(const Matrix& b) : b_(b) {
  if (b_.size() == 0) throw DimensionError("empty prior mask");
  if (!((b_.array() == 0.0) || (b_.array() == 1.0)).all()) {
    throw PreconditionError("prior mask entries must be 0 or 1");
  }
  d_ = Matrix::Ones(b_.rows(), b_.cols()) - b_;
}

PriorMask PriorMask::all_ones(Eigen::Index l, Eigen::Index h) {
  return PriorMask(Matrix::Ones(l, h));
}

bool PriorMask::is_full_prior() const {
  const Vector row_sums = b_.rowwise().sum();
  const Vector col_sums = b_.colwise().sum().transpose();
  return (row_sums.array() == 1.0).all() && (col_sums.array() >= 1.0).all();
}

SmoothEval eval_smooth(const CovariancePair& cov, const Matrix& a) {
  check_shape(cov, a);
  const Matrix& sl = cov.sigma_l().matrix();
  const Matrix& sh = cov.sigma_h().matrix();
  const Matrix sla = sl * a;
  const Matrix m = symmetric_part(a.transpose() * sla);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !m.allFinite()) {
    throw DomainError("A^T sigma_l A is not positive definite");
  }
  const Eigen::Index h = a.cols();
  const Matrix a_tilde = llt.solve(Matrix::Identity(h, h));
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  SmoothEval out;
  out.value = (a_tilde * sh).trace() + logdet;
  out.grad = 2.0 * (sla * a_tilde) * (Matrix::Identity(h, h) - sh * a_tilde);
  if (!std::isfinite(out.value)) throw DomainError("objective is not finite");
  return out;
}

double f_smooth(const CovariancePair& cov, const Matrix& a) { return eval_smooth(cov, a).value; }

Matrix egrad_smooth(const CovariancePair& cov, const Matrix& a) {
  return eval_smooth(cov, a).grad;
}

double kl(const CovariancePair& cov, const StiefelPointd& v) {
  return f_smooth(cov, v.matrix()) + cov.c_const();
}

double kl_of_matrix(const CovariancePair& cov, const Matrix& a) {
  return f_smooth(cov, a) + cov.c_const();
}

double f_masked(const CovariancePair& cov, const PriorMask& mask, const Matrix& s,
                const Matrix& v) {
  check_mask(cov, mask, s, v);
  return f_smooth(cov, masked_map(mask, s, v));
}

Matrix egrad_masked_v(const CovariancePair& cov, const PriorMask& mask, const Matrix& s,
                      const Matrix& v) {
  check_mask(cov, mask, s, v);
  return mask.b().cwiseProduct(s).cwiseProduct(egrad_smooth(cov, masked_map(mask, s, v)));
}

Matrix egrad_masked_s(const CovariancePair& cov, const PriorMask& mask, const Matrix& s,
                      const Matrix& v) {
  check_mask(cov, mask, s, v);
  return mask.b().cwiseProduct(v).cwiseProduct(egrad_smooth(cov, masked_map(mask, s, v)));
}

SpectralReport spectral_feasibility(const CovariancePair& cov) {
  SpectralReport rep;
  rep.lambda = sym_eig(cov.sigma_l()).values;
  rep.kappa = sym_eig(cov.sigma_h()).values;
  const Eigen::Index l = cov.l();
  const Eigen::Index h = cov.h();
  for (Eigen::Index i = 0; i < h; ++i) {
    const double lo = rep.lambda(i);
    const double hi = rep.lambda(i + l - h);
    const double k = rep.kappa(i);
    const bool ok = k >= lo - kSpectralSlack * std::max(1.0, std::abs(lo)) &&
                    k <= hi + kSpectralSlack * std::max(1.0, std::abs(hi));
    if (!ok) rep.violations.push_back({i, k, lo, hi});
  }
  rep.feasible = rep.violations.empty();
  return rep;
}

double penalty_l1(const PriorMask& mask, const Matrix& v) {
  if (mask.rows() != v.rows() || mask.cols() != v.cols()) {
    throw DimensionError("mask and V must share a shape");
  }
  return mask.d().cwiseProduct(v).cwiseAbs().sum();
}

}  // namespace calsep
