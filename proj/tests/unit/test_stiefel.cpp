#include <gtest/gtest.h>

#include <cmath>

#include "calsep/errors.hpp"
#include "calsep/stiefel.hpp"
#include "helpers.hpp"

using namespace calsep;
using calsep::test::gaussian;

namespace {

Matrix e1() {
  Matrix v = Matrix::Zero(2, 1);
  v(0, 0) = 1.0;
  return v;
}

}  // namespace

TEST(StiefelPoint, ConstructorChecksOrthonormality) {
  EXPECT_NO_THROW(StiefelPointd{Matrix::Identity(4, 2)});
  EXPECT_NO_THROW(StiefelPointd{Matrix::Identity(3, 3)});
  EXPECT_THROW(StiefelPointd{2.0 * Matrix::Identity(4, 2)}, NotOnManifold);
  EXPECT_THROW(StiefelPointd{Matrix::Identity(2, 3)}, DimensionError);
}

TEST(ProjectTangent, HandCases) {
  Matrix g(2, 1);
  g << 3, 4;
  const Matrix p = tangent_projection(e1(), g);
  EXPECT_NEAR(p(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(p(1, 0), 4.0, 1e-15);

  const StiefelPointd v = random_point(6, 3, 1);
  const Matrix t = tangent_projection(v.matrix(), gaussian(6, 3, 2));
  EXPECT_LT((tangent_projection(v.matrix(), t) - t).norm(), 1e-13);

  Matrix s = gaussian(3, 3, 3);
  s = symmetric_part(s);
  EXPECT_LT(tangent_projection(v.matrix(), Matrix(v.matrix() * s)).norm(), 1e-13);
}

TEST(ProjectTangent, RandomSweepIsTangent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StiefelPointd v = random_point(8, 3, seed);
    const auto g = riemannian_grad(v, gaussian(8, 3, 100 + seed));
    EXPECT_LT(tangent_residual(v.matrix(), g.matrix()), 1e-12);
  }
}

TEST(TangentVector, ReprojectsSmallDriftRejectsLarge) {
  const StiefelPointd v = random_point(5, 2, 4);
  const Matrix t = tangent_projection(v.matrix(), gaussian(5, 2, 5));
  Matrix sym = Matrix::Identity(2, 2);
  const Matrix drift = t + 1e-7 * v.matrix() * sym;
  const TangentVector<double> ok(v, drift);
  EXPECT_LT(tangent_residual(v.matrix(), ok.matrix()), 1e-12);
  EXPECT_THROW((TangentVector<double>(v, Matrix(t + 1e-2 * v.matrix() * sym))), NotOnManifold);
}

TEST(Retract, ZeroStepAndHandCase) {
  const StiefelPointd v(e1());
  for (auto kind : {Retraction::qr, Retraction::polar, Retraction::cayley}) {
    EXPECT_EQ(retract(v, Matrix::Zero(2, 1), kind).matrix(), v.matrix());
  }
  Matrix g(2, 1);
  g << 0, 1;
  const Matrix r = retract(v, g, Retraction::qr).matrix();
  EXPECT_NEAR(r(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Retract, StaysOnManifold) {
  for (auto kind : {Retraction::qr, Retraction::polar, Retraction::cayley}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const StiefelPointd v = random_point(7, 3, seed);
      const Matrix g = 2.0 * tangent_projection(v.matrix(), gaussian(7, 3, 50 + seed));
      EXPECT_LT(stiefel_residual(retract(v, g, kind).matrix()), 1e-12);
    }
  }
}

TEST(Retract, FirstOrderAgreement) {
  // R(tG) - (V + tG) is a second-order remainder: its size over ||tG||^2 stays bounded.
  for (auto kind : {Retraction::qr, Retraction::polar, Retraction::cayley}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const StiefelPointd v = random_point(6, 2, seed);
      const Matrix g = tangent_projection(v.matrix(), gaussian(6, 2, 70 + seed));
      for (double t : {1e-2, 1e-3, 1e-4}) {
        const Matrix step = t * g;
        const double rem = (retract(v, step, kind).matrix() - (v.matrix() + step)).norm();
        const double ratio = rem / step.squaredNorm();
        EXPECT_LT(ratio, 2.0);
        if (t == 1e-4) EXPECT_LT(rem / step.norm(), 1e-3);
      }
    }
  }
}

TEST(NormalBasis, SizesAndOrthogonality) {
  const StiefelPointd v1(e1());
  const auto b1 = normal_basis(v1);
  ASSERT_EQ(b1.size(), 1u);
  EXPECT_EQ(b1[0], v1.matrix());
  EXPECT_EQ(normal_basis(random_point(5, 2, 1)).size(), 3u);

  const StiefelPointd v = random_point(8, 3, 9);
  const auto basis = normal_basis(v);
  ASSERT_EQ(basis.size(), 6u);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix t = tangent_projection(v.matrix(), gaussian(8, 3, seed));
    for (const auto& n : basis) EXPECT_NEAR((n.array() * t.array()).sum(), 0.0, 1e-10);
  }
}

TEST(RandomPoint, DeterministicAndDistinct) {
  const auto a = random_point(6, 2, 42);
  const auto b = random_point(6, 2, 42);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_LT(stiefel_residual(a.matrix()), 1e-10);
  EXPECT_GT((a.matrix() - random_point(6, 2, 43).matrix()).norm(), 0.0);
  EXPECT_THROW(random_point(2, 2, 1), DimensionError);
}
