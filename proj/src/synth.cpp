#include "calsep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace calsep {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, n) without relying on library distribution details.
Eigen::Index uniform_index(std::mt19937_64& gen, Eigen::Index n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t r;
  do {
    r = gen();
  } while (r >= limit);
  return static_cast<Eigen::Index>(r % range);
}

void shuffle(std::vector<Eigen::Index>& xs, std::mt19937_64& gen) {
  for (Eigen::Index i = static_cast<Eigen::Index>(xs.size()) - 1; i > 0; --i) {
    std::swap(xs[static_cast<std::size_t>(i)],
              xs[static_cast<std::size_t>(uniform_index(gen, i + 1))]);
  }
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(gen);
  return m;
}

Matrix sample_covariance(const SpdMatrix<double>& sigma, long n, std::mt19937_64& gen) {
  const Eigen::Index d = sigma.dim();
  const Matrix lower = sigma.llt().matrixL();
  const Matrix z = normal_matrix(d, n, gen);
  const Matrix x = lower * z;
  Matrix c = (x * x.transpose()) / static_cast<double>(n);
  c = symmetric_part(c);
  c += 1e-8 * Matrix::Identity(d, d);
  return c;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(master) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

ConstructiveMap gen_constructive_map(Eigen::Index l, Eigen::Index h, std::uint64_t seed) {
  if (h < 1 || l < h) throw DimensionError("constructive map needs l >= h >= 1");
  std::mt19937_64 gen(seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(h));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  shuffle(perm, gen);

  ConstructiveMap out;
  out.b = Matrix::Zero(l, h);
  for (Eigen::Index i = 0; i < h; ++i) out.b(i, perm[static_cast<std::size_t>(i)]) = 1.0;
  for (Eigen::Index i = h; i < l; ++i) out.b(i, uniform_index(gen, h)) = 1.0;

  std::normal_distribution<double> normal(0.0, 1.0);
  out.v = Matrix::Zero(l, h);
  for (Eigen::Index i = 0; i < l; ++i)
    for (Eigen::Index j = 0; j < h; ++j)
      if (out.b(i, j) != 0.0) out.v(i, j) = normal(gen);
  for (Eigen::Index j = 0; j < h; ++j) out.v.col(j) /= out.v.col(j).norm();
  return out;
}

GroundTruth gen_instance(Eigen::Index l, Eigen::Index h, std::uint64_t seed) {
  if (h < 1 || l <= h) throw DimensionError("instance needs l > h >= 1");
  ConstructiveMap map = gen_constructive_map(l, h, derive_seed(seed, 1, 0));
  std::mt19937_64 gen(derive_seed(seed, 2, 0));
  const Matrix g = normal_matrix(l, l, gen);
  Matrix sigma_l = g * g.transpose() + static_cast<double>(l) * Matrix::Identity(l, l);
  sigma_l /= sigma_l.diagonal().mean();
  sigma_l = symmetric_part(sigma_l);
  const Matrix sigma_h = symmetric_part(map.v.transpose() * sigma_l * map.v);
  return GroundTruth{StiefelPointd(map.v), map.b, CovariancePair(sigma_l, sigma_h), seed};
}

PriorMask degrade_prior(const Matrix& b_star, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw PreconditionError("fraction must lie in [0, 1]");
  const Eigen::Index l = b_star.rows();
  Eigen::Index count = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(l)));
  if (fraction > 0.0) count = std::max<Eigen::Index>(count, 1);
  std::mt19937_64 gen(seed);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(l));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  shuffle(rows, gen);
  Matrix b = b_star;
  for (Eigen::Index k = 0; k < count; ++k) b.row(rows[static_cast<std::size_t>(k)]).setOnes();
  return PriorMask(b);
}

CovariancePair sample_and_estimate(const CovariancePair& cov, long n_samples,
                                   std::uint64_t seed) {
  if (n_samples <= std::max(cov.l(), cov.h())) {
    throw PreconditionError("need more samples than variables");
  }
  std::mt19937_64 gen_l(derive_seed(seed, 11, 0));
  std::mt19937_64 gen_h(derive_seed(seed, 12, 0));
  const Matrix sl = sample_covariance(cov.sigma_l(), n_samples, gen_l);
  const Matrix sh = sample_covariance(cov.sigma_h(), n_samples, gen_h);
  return CovariancePair(sl, sh);
}

}  // namespace calsep
