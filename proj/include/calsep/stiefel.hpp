#pragma once

// Geometry of the Stiefel manifold St(l, h) = { V in R^{l x h} : V^T V = I }.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "calsep/numerics.hpp"

namespace calsep {

enum class Retraction { qr, polar, cayley };

inline Retraction parse_retraction(std::string_view name) {
  if (name == "qr") return Retraction::qr;
  if (name == "polar") return Retraction::polar;
  if (name == "cayley") return Retraction::cayley;
  throw PreconditionError("unknown retraction '" + std::string(name) + "'");
}

inline std::string_view to_string(Retraction kind) {
  switch (kind) {
    case Retraction::qr: return "qr";
    case Retraction::polar: return "polar";
    case Retraction::cayley: return "cayley";
  }
  return "?";
}

// ||V^T V - I||_F
template <typename Derived>
typename Derived::Scalar stiefel_residual(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  return (v.transpose() * v - Mat<Scalar>::Identity(v.cols(), v.cols())).norm();
}

// ||V^T G + G^T V||_F, zero iff G is tangent at V.
template <typename DerivedV, typename DerivedG>
typename DerivedV::Scalar tangent_residual(const Eigen::MatrixBase<DerivedV>& v,
                                           const Eigen::MatrixBase<DerivedG>& g) {
  const auto vtg = (v.transpose() * g).eval();
  return (vtg + vtg.transpose()).norm();
}

template <typename Scalar>
class StiefelPoint {
 public:
  static constexpr double kTolerance = 1e-8;

  template <typename Derived>
  explicit StiefelPoint(const Eigen::MatrixBase<Derived>& v) : v_(v) {
    if (v_.cols() < 1 || v_.rows() < v_.cols()) {
      throw DimensionError("Stiefel point needs rows >= cols >= 1");
    }
    if (!(stiefel_residual(v_) <= Scalar(kTolerance))) {
      throw NotOnManifold("matrix does not have orthonormal columns");
    }
  }

  const Mat<Scalar>& matrix() const noexcept { return v_; }
  Eigen::Index rows() const noexcept { return v_.rows(); }
  Eigen::Index cols() const noexcept { return v_.cols(); }

 private:
  Mat<Scalar> v_;
};

using StiefelPointd = StiefelPoint<double>;

// G - V sym(V^T G); identical to (I - VV^T)G + V(V^T G - G^T V)/2.
template <typename DerivedV, typename DerivedG>
Mat<typename DerivedV::Scalar> tangent_projection(const Eigen::MatrixBase<DerivedV>& v,
                                                  const Eigen::MatrixBase<DerivedG>& g) {
  if (v.rows() != g.rows() || v.cols() != g.cols()) {
    throw DimensionError("tangent projection: shape mismatch");
  }
  return g - v * symmetric_part(v.transpose() * g);
}

// Tangent vector at a Stiefel point. Inputs whose constraint residual
// (relative to max(1, ||G||_F)) lies in (1e-8, 1e-6] are re-projected;
// larger residuals are rejected.
template <typename Scalar>
class TangentVector {
 public:
  static constexpr double kAcceptTolerance = 1e-8;
  static constexpr double kReprojectTolerance = 1e-6;

  template <typename Derived>
  TangentVector(StiefelPoint<Scalar> base, const Eigen::MatrixBase<Derived>& g)
      : base_(std::move(base)), g_(g) {
    if (g_.rows() != base_.rows() || g_.cols() != base_.cols()) {
      throw DimensionError("tangent vector shape does not match its base point");
    }
    const Scalar scale = std::max(Scalar(1), g_.norm());
    const Scalar res = tangent_residual(base_.matrix(), g_) / scale;
    if (res > Scalar(kReprojectTolerance) || !std::isfinite(res)) {
      throw NotOnManifold("matrix is not a tangent vector at the base point");
    }
    if (res > Scalar(kAcceptTolerance)) g_ = tangent_projection(base_.matrix(), g_);
  }

  const StiefelPoint<Scalar>& base() const noexcept { return base_; }
  const Mat<Scalar>& matrix() const noexcept { return g_; }

 private:
  StiefelPoint<Scalar> base_;
  Mat<Scalar> g_;
};

template <typename Scalar, typename Derived>
TangentVector<Scalar> project_tangent(const StiefelPoint<Scalar>& v,
                                      const Eigen::MatrixBase<Derived>& g) {
  return TangentVector<Scalar>(v, tangent_projection(v.matrix(), g));
}

// The Riemannian gradient under the embedded metric is the tangent
// projection of the Euclidean gradient.
template <typename Scalar, typename Derived>
TangentVector<Scalar> riemannian_grad(const StiefelPoint<Scalar>& v,
                                      const Eigen::MatrixBase<Derived>& egrad) {
  return project_tangent(v, egrad);
}

// Retraction of a tangent step (assumed tangent at v). A step that is
// exactly zero returns v unchanged.
template <typename Scalar, typename Derived>
StiefelPoint<Scalar> retract(const StiefelPoint<Scalar>& v,
                             const Eigen::MatrixBase<Derived>& step, Retraction kind) {
  const auto& x = v.matrix();
  if (step.rows() != x.rows() || step.cols() != x.cols()) {
    throw DimensionError("retraction step shape mismatch");
  }
  if ((step.array() == Scalar(0)).all()) return v;
  switch (kind) {
    case Retraction::qr:
      return StiefelPoint<Scalar>(qr_q(x + step));
    case Retraction::polar:
      return StiefelPoint<Scalar>(polar(x + step).orthogonal);
    case Retraction::cayley: {
      const Eigen::Index l = x.rows();
      const Mat<Scalar> eye = Mat<Scalar>::Identity(l, l);
      const Mat<Scalar> p = eye - Scalar(0.5) * x * x.transpose();
      const Mat<Scalar> w = p * step * x.transpose() - x * step.transpose() * p;
      Eigen::PartialPivLU<Mat<Scalar>> lu(eye - Scalar(0.5) * w);
      Mat<Scalar> y = lu.solve((eye + Scalar(0.5) * w) * x);
      // Cayley is exactly orthogonality-preserving; clean roundoff drift.
      if (stiefel_residual(y) > Scalar(1e-12)) y = qr_q(y);
      return StiefelPoint<Scalar>(y);
    }
  }
  throw PreconditionError("unknown retraction");
}

template <typename Scalar>
StiefelPoint<Scalar> retract(const StiefelPoint<Scalar>& v, const TangentVector<Scalar>& g,
                             Retraction kind) {
  return retract(v, g.matrix(), kind);
}

// Basis {V E_ij : 1 <= i <= j <= h} of the normal space, where E_ij is the
// symmetric 0/1 matrix with ones at (i,j) and (j,i). Ordered by i, then j.
template <typename Scalar>
std::vector<Mat<Scalar>> normal_basis(const StiefelPoint<Scalar>& v) {
  const Eigen::Index h = v.cols();
  std::vector<Mat<Scalar>> out;
  out.reserve(static_cast<std::size_t>(h * (h + 1) / 2));
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = i; j < h; ++j) {
      Mat<Scalar> e = Mat<Scalar>::Zero(h, h);
      e(i, j) = Scalar(1);
      e(j, i) = Scalar(1);
      out.push_back(v.matrix() * e);
    }
  }
  return out;
}

// qr_q of an l x h standard-normal matrix drawn from a generator seeded
// with `seed`.
template <typename Scalar = double>
StiefelPoint<Scalar> random_point(Eigen::Index l, Eigen::Index h, std::uint64_t seed) {
  if (h < 1 || l <= h) throw DimensionError("random_point needs l > h >= 1");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 2; ++attempt) {
    Mat<Scalar> g(l, h);
    for (Eigen::Index j = 0; j < h; ++j)
      for (Eigen::Index i = 0; i < l; ++i) g(i, j) = Scalar(normal(gen));
    try {
      return StiefelPoint<Scalar>(qr_q(g));
    } catch (const DegenerateInput&) {
    }
  }
  throw DegenerateInput("random_point drew a rank-deficient matrix twice");
}

}  // namespace calsep
