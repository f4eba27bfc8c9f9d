#include "calsep/metrics.hpp"

namespace calsep {

Matrix support_of(const Matrix& v, double threshold) {
  if (!(threshold >= 0.0)) throw PreconditionError("threshold must be nonnegative");
  return (v.array().abs() > threshold).cast<double>().matrix();
}

double constructiveness_score(const Matrix& support) {
  const auto rows_one = (support.rowwise().sum().array() == 1.0).count();
  const auto cols_hit = (support.colwise().sum().array() >= 1.0).count();
  return 0.5 * static_cast<double>(rows_one) / static_cast<double>(support.rows()) +
         0.5 * static_cast<double>(cols_hit) / static_cast<double>(support.cols());
}

MetricsRecord evaluate(const Matrix& v_hat, const Matrix& v_star, const CovariancePair& cov,
                       double threshold) {
  if (v_hat.rows() != v_star.rows() || v_hat.cols() != v_star.cols()) {
    throw DimensionError("learned and true maps must share a shape");
  }
  MetricsRecord rec;
  const Matrix sup = support_of(v_hat, threshold);
  const Matrix truth = support_of(v_star, threshold);
  rec.constr_score = constructiveness_score(sup);
  rec.constructive = rec.constr_score == 1.0;
  try {
    rec.kl_value = kl_of_matrix(cov, v_hat);
  } catch (const DomainError&) {
    rec.kl_value.reset();
  }
  rec.frob_abs_dist = (v_star.cwiseAbs() - v_hat.cwiseAbs()).norm() / v_star.norm();

  const double tp = sup.cwiseProduct(truth).sum();
  const double fp = sup.sum() - tp;
  const double pos = truth.sum();
  rec.tpr = pos > 0 ? tp / pos : 0.0;
  rec.fdr = (tp + fp) > 0 ? fp / (tp + fp) : 0.0;
  const double precision = 1.0 - rec.fdr;
  rec.f1 = (rec.tpr + precision) > 0 && tp > 0
               ? 2.0 * rec.tpr * precision / (rec.tpr + precision)
               : 0.0;
  return rec;
}

}  // namespace calsep
