#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "calsep/numerics.hpp"

namespace calsep::test {

inline Matrix gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(gen);
  return m;
}

inline Matrix uniform(Eigen::Index r, Eigen::Index c, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = u(gen);
  return m;
}

inline Matrix random_spd(Eigen::Index n, std::uint64_t seed) {
  const Matrix g = gaussian(n, n, seed);
  return g * g.transpose() + Matrix::Identity(n, n);
}

// Central differences, one entry at a time.
inline Matrix central_diff(const std::function<double(const Matrix&)>& f, const Matrix& x,
                           double step = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Matrix xp = x, xm = x;
      xp(i, j) += step;
      xm(i, j) -= step;
      g(i, j) = (f(xp) - f(xm)) / (2.0 * step);
    }
  }
  return g;
}

inline double rel_err(const Matrix& approx, const Matrix& exact) {
  const double scale = std::max(exact.norm(), 1e-12);
  return (approx - exact).norm() / scale;
}

}  // namespace calsep::test
