#pragma once

// Dense kernels shared by the solvers: symmetric eigendecomposition, QR with a
// fixed sign convention, SVD-based polar decomposition, SPD solves.

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "calsep/errors.hpp"

namespace calsep {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;

// Relative asymmetry above which a matrix is not accepted as symmetric.
inline constexpr double kAsymmetryTolerance = 1e-8;
// 1/rcond above which spd_solve flags the result.
inline constexpr double kIllConditioned = 1e12;

template <typename Derived>
auto symmetric_part(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(0.5) * (m + m.transpose())).eval();
}

// Symmetric positive-definite matrix. Construction symmetrizes the input,
// rejects asymmetry above kAsymmetryTolerance (relative) and non-PD input.
template <typename Scalar>
class SpdMatrix {
 public:
  template <typename Derived>
  explicit SpdMatrix(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw DimensionError("SPD matrix must be square and non-empty");
    }
    if (!m.allFinite()) throw NotPositiveDefinite("SPD matrix has non-finite entries");
    const Scalar scale = std::max(m.norm(), std::numeric_limits<Scalar>::min());
    if ((m - m.transpose()).norm() / scale > Scalar(kAsymmetryTolerance)) {
      throw NotPositiveDefinite("matrix is not symmetric");
    }
    m_ = symmetric_part(m);
    llt_.compute(m_);
    if (llt_.info() != Eigen::Success) {
      throw NotPositiveDefinite("matrix is not positive definite");
    }
  }

  const Mat<Scalar>& matrix() const noexcept { return m_; }
  const Eigen::LLT<Mat<Scalar>>& llt() const noexcept { return llt_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

  Scalar log_det() const {
    return Scalar(2) * llt_.matrixLLT().diagonal().array().log().sum();
  }

 private:
  Mat<Scalar> m_;
  Eigen::LLT<Mat<Scalar>> llt_;
};

template <typename Scalar>
struct SymEig {
  Vec<Scalar> values;    // ascending
  Mat<Scalar> vectors;   // columns are eigenvectors
};

template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw DimensionError("sym_eig needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(symmetric_part(m));
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigensolver did not converge", m.rows());
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

template <typename Scalar>
SymEig<Scalar> sym_eig(const SpdMatrix<Scalar>& m) {
  return sym_eig(m.matrix());
}

template <typename Scalar>
struct PolarFactors {
  Mat<Scalar> orthogonal;  // rows x cols, orthonormal columns
  Mat<Scalar> psd;         // cols x cols, symmetric positive definite
};

// a = orthogonal * psd. The orthogonal factor is the closest orthonormal
// frame to a in Frobenius norm.
template <typename Derived>
PolarFactors<typename Derived::Scalar> polar(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() < a.cols() || a.cols() == 0) {
    throw DimensionError("polar needs rows >= cols >= 1");
  }
  Eigen::JacobiSVD<Mat<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Scalar tol = Scalar(a.rows()) * std::numeric_limits<Scalar>::epsilon() * sv(0);
  if (!(sv(0) > Scalar(0)) || !(sv(sv.size() - 1) > tol)) {
    throw DegenerateInput("polar decomposition of a rank-deficient matrix");
  }
  PolarFactors<Scalar> out;
  out.orthogonal = svd.matrixU() * svd.matrixV().transpose();
  out.psd = svd.matrixV() * sv.asDiagonal() * svd.matrixV().transpose();
  out.psd = symmetric_part(out.psd);
  return out;
}

// Thin Q factor with diag(R) > 0.
template <typename Derived>
Mat<typename Derived::Scalar> qr_q(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  if (rows < cols || cols == 0) throw DimensionError("qr_q needs rows >= cols >= 1");
  Eigen::HouseholderQR<Mat<Scalar>> qr(a);
  const auto r_diag = qr.matrixQR().diagonal().head(cols);
  const Scalar largest = r_diag.cwiseAbs().maxCoeff();
  const Scalar tol = Scalar(rows) * std::numeric_limits<Scalar>::epsilon() * largest;
  if (!(largest > Scalar(0)) || !(r_diag.cwiseAbs().minCoeff() > tol)) {
    throw DegenerateInput("QR factorization of a rank-deficient matrix");
  }
  Mat<Scalar> q = qr.householderQ() * Mat<Scalar>::Identity(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r_diag(j) < Scalar(0)) q.col(j) = -q.col(j);
  }
  return q;
}

template <typename Scalar>
struct SpdSolveResult {
  Mat<Scalar> solution;
  Scalar rcond = Scalar(1);
  bool ill_conditioned = false;
};

template <typename Scalar, typename Derived>
SpdSolveResult<Scalar> spd_solve(const SpdMatrix<Scalar>& m,
                                 const Eigen::MatrixBase<Derived>& rhs) {
  if (rhs.rows() != m.dim()) throw DimensionError("spd_solve: rhs row count mismatch");
  SpdSolveResult<Scalar> out;
  out.solution = m.llt().solve(rhs);
  out.rcond = m.llt().rcond();
  out.ill_conditioned = !(out.rcond * Scalar(kIllConditioned) > Scalar(1));
  return out;
}

}  // namespace calsep
