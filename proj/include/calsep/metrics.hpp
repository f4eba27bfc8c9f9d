#pragma once

#include <optional>

#include "calsep/objective.hpp"

namespace calsep {

inline constexpr double kDefaultSupportThreshold = 1e-4;

struct MetricsRecord {
  bool constructive = false;
  // Half the fraction of rows with exactly one nonzero plus half the
  // fraction of columns with at least one nonzero; 1 iff constructive.
  double constr_score = 0.0;
  // Empty when the learned map is rank deficient.
  std::optional<double> kl_value;
  double frob_abs_dist = 0.0;
  double f1 = 0.0;
  double tpr = 0.0;
  double fdr = 0.0;
};

Matrix support_of(const Matrix& v, double threshold);

double constructiveness_score(const Matrix& support);

MetricsRecord evaluate(const Matrix& v_hat, const Matrix& v_star, const CovariancePair& cov,
                       double threshold = kDefaultSupportThreshold);

}  // namespace calsep
