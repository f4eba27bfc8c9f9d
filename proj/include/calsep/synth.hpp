#pragma once

// Synthetic ground truth: constructive maps, consistent covariance pairs,
// degraded priors, and independent per-level sampling.

#include <cstdint>

#include "calsep/objective.hpp"

namespace calsep {

struct ConstructiveMap {
  Matrix b;
  Matrix v;  // l x h, orthonormal columns (not wrapped when l == h)
};

struct GroundTruth {
  StiefelPointd v_star;
  Matrix b_star;
  CovariancePair cov;
  std::uint64_t seed;
};

ConstructiveMap gen_constructive_map(Eigen::Index l, Eigen::Index h, std::uint64_t seed);

GroundTruth gen_instance(Eigen::Index l, Eigen::Index h, std::uint64_t seed);

// floor(fraction * l) rows (at least one when fraction > 0) set to all-ones.
PriorMask degrade_prior(const Matrix& b_star, double fraction, std::uint64_t seed);

CovariancePair sample_and_estimate(const CovariancePair& cov, long n_samples,
                                   std::uint64_t seed);

// Deterministic 64-bit mixing of (master, a, b) into a child seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

}  // namespace calsep
