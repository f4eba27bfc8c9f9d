#pragma once

// KL objective between a high-level Gaussian and the pushforward of a
// low-level Gaussian through a linear map, in plain and masked forms.

#include <vector>

#include "calsep/numerics.hpp"
#include "calsep/stiefel.hpp"

namespace calsep {

class CovariancePair {
 public:
  CovariancePair(const Matrix& sigma_l, const Matrix& sigma_h);

  const SpdMatrix<double>& sigma_l() const noexcept { return sigma_l_; }
  const SpdMatrix<double>& sigma_h() const noexcept { return sigma_h_; }
  // -logdet(sigma_h) - h
  double c_const() const noexcept { return c_const_; }
  Eigen::Index l() const noexcept { return sigma_l_.dim(); }
  Eigen::Index h() const noexcept { return sigma_h_.dim(); }

 private:
  SpdMatrix<double> sigma_l_;
  SpdMatrix<double> sigma_h_;
  double c_const_;
};

// 0/1 structural prior b and its complement d = 1 - b.
class PriorMask {
 public:
  explicit PriorMask(const Matrix& b);
  static PriorMask all_ones(Eigen::Index l, Eigen::Index h);

  const Matrix& b() const noexcept { return b_; }
  const Matrix& d() const noexcept { return d_; }
  Eigen::Index rows() const noexcept { return b_.rows(); }
  Eigen::Index cols() const noexcept { return b_.cols(); }

  // Every row has exactly one 1 and every column at least one.
  bool is_full_prior() const;

 private:
  Matrix b_;
  Matrix d_;
};

struct SpectralViolation {
  Eigen::Index index;  // 0-based i
  double kappa;
  double lower;
  double upper;
};

struct SpectralReport {
  Vector lambda;
  Vector kappa;
  bool feasible = true;
  std::vector<SpectralViolation> violations;
};

// Value and Euclidean gradient of f(A) = Tr(M^{-1} sigma_h) + logdet M,
// M = A^T sigma_l A.
struct SmoothEval {
  double value;
  Matrix grad;
};

double f_smooth(const CovariancePair& cov, const Matrix& a);
Matrix egrad_smooth(const CovariancePair& cov, const Matrix& a);
SmoothEval eval_smooth(const CovariancePair& cov, const Matrix& a);

double kl(const CovariancePair& cov, const StiefelPointd& v);
// f_smooth + C for an arbitrary full-rank matrix; no manifold check.
double kl_of_matrix(const CovariancePair& cov, const Matrix& a);

double f_masked(const CovariancePair& cov, const PriorMask& mask, const Matrix& s,
                const Matrix& v);
Matrix egrad_masked_v(const CovariancePair& cov, const PriorMask& mask, const Matrix& s,
                      const Matrix& v);
Matrix egrad_masked_s(const CovariancePair& cov, const PriorMask& mask, const Matrix& s,
                      const Matrix& v);

SpectralReport spectral_feasibility(const CovariancePair& cov);

// ||D o V||_1
double penalty_l1(const PriorMask& mask, const Matrix& v);

}  // namespace calsep
