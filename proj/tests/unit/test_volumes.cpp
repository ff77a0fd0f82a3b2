#include <gtest/gtest.h>

#include "heisgeo/selftest.hpp"
#include "heisgeo/volumes.hpp"

using namespace heisgeo;

namespace {

/// Popp coefficient straight from the structure constants in the orthonormal frame.
double popp_from_structure(const Mat & A)
{
  const int n = static_cast<int>(A.rows() / 2);
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  const Mat S = A.transpose() * J * A;
  double b = 0;
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) b += S(i, j) * S(i, j);
  }
  return 1.0 / (std::sqrt(b) * std::abs(A.determinant()));
}

}  // namespace

TEST(Volume, RiemannianUnit) { EXPECT_DOUBLE_EQ(riemannian_coeff(MetricParam(Mat::Identity(2, 2), 1.0)), 1.0); }

TEST(Volume, RiemannianScaled)
{
  EXPECT_NEAR(riemannian_coeff(MetricParam(2 * Mat::Identity(2, 2), 1.0)), 0.25, 1e-15);
  for (double k : {1.0, 2.0, 3.0, 10.0}) EXPECT_NEAR(riemannian_coeff(selftest::appendix_B(k)), k * k * k, 1e-12 * k * k * k);
}

TEST(Volume, RiemannianNeedsRho) { EXPECT_THROW(riemannian_coeff(MetricParam(Mat::Identity(2, 2), 0.0)), RankDeficient); }

TEST(Volume, PoppExamples)
{
  EXPECT_NEAR(popp_coeff(MetricParam(Mat::Identity(2, 2), 0.0)), 1 / std::sqrt(2.0), 1e-15);
  for (double k : {1.0, 2.0, 3.0, 7.0}) {
    EXPECT_NEAR(popp_coeff(selftest::appendix_A(k)), 1 / (std::sqrt(2.0) * std::pow(k, 4)), 1e-14);
    EXPECT_NEAR(popp_coeff(selftest::appendix_B(k)), std::pow(k, 4) / std::sqrt(2.0), 1e-12 * std::pow(k, 4));
  }
}

TEST(Volume, PoppIndependentOfRho)
{
  selftest::Rng rng(1);
  const Mat A = selftest::random_matrix(rng, 4, -2, 2, 0.2);
  EXPECT_NEAR(popp_coeff(MetricParam(A, 0.0)), popp_coeff(MetricParam(A, 3.0)), 1e-12);
}

TEST(Volume, PoppAgreesWithStructureConstants)
{
  selftest::Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 4;
    const Mat A = selftest::random_matrix(rng, 2 * n, -2, 2, 0.2);
    const double want = popp_from_structure(A);
    EXPECT_NEAR(popp_coeff(MetricParam(A, 0.0)), want, 1e-9 * want);
  }
}

TEST(Volume, InvariantUnderOrthogonalFrameChange)
{
  selftest::Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 3;
    const Mat A = selftest::random_matrix(rng, 2 * n, -2, 2, 0.2);
    const Mat Q = selftest::random_orthogonal(rng, 2 * n);
    const MetricParam a(A, 0.5), b(A * Q, 0.5);
    for (VolumeKind k : {VolumeKind::riemannian, VolumeKind::popp, VolumeKind::minimal_popp}) {
      EXPECT_NEAR(volume_coeff(a, k), volume_coeff(b, k), 1e-9 * volume_coeff(a, k));
    }
  }
}

TEST(Volume, ScalingExponents)
{
  selftest::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 3;
    const Mat A = selftest::random_matrix(rng, 2 * n, -2, 2, 0.2);
    const double rho = selftest::uniform(rng, 0.1, 2);
    const double c = selftest::uniform(rng, 0.5, 3);
    const MetricParam a(A, rho), b(c * A, c * rho);
    EXPECT_NEAR(popp_coeff(b), popp_coeff(a) * std::pow(c, -2 * n - 2), 1e-9 * popp_coeff(b));
    EXPECT_NEAR(riemannian_coeff(b), riemannian_coeff(a) * std::pow(c, -2 * n - 1), 1e-9 * riemannian_coeff(b));
  }
}

TEST(Volume, MinimalPoppIsTheSmaller)
{
  selftest::Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 3;
    const MetricParam m(selftest::random_matrix(rng, 2 * n, -2, 2, 0.2), selftest::uniform(rng, 0.05, 5));
    const double mp = minimal_popp_coeff(m);
    EXPECT_LE(mp, popp_coeff(m));
    EXPECT_LE(mp, riemannian_coeff(m));
    EXPECT_DOUBLE_EQ(mp, std::min(popp_coeff(m), riemannian_coeff(m)));
  }
}

TEST(Volume, MinimalPoppAtRhoZeroIsPopp)
{
  const MetricParam m(Mat::Identity(4, 4) * 1.5, 0.0);
  EXPECT_DOUBLE_EQ(minimal_popp_coeff(m), popp_coeff(m));
}

TEST(Volume, AppendixBMinimalPopp)
{
  // min{k^3, k^4 / sqrt 2}: the Popp term wins at k = 1
  EXPECT_NEAR(minimal_popp_coeff(selftest::appendix_B(1)), 1 / std::sqrt(2.0), 1e-15);
  for (double k : {2.0, 3.0, 8.0}) EXPECT_NEAR(minimal_popp_coeff(selftest::appendix_B(k)), k * k * k, 1e-12 * k * k * k);
}

TEST(TotalMeasure, LinearInLatticeIndex)
{
  const MetricParam m(Mat::Identity(4, 4), 1.0);
  const double base = total_measure(validate_lattice(2, {1, 3}), m, VolumeKind::popp);
  EXPECT_NEAR(total_measure(validate_lattice(2, {2, 6}), m, VolumeKind::popp), 4 * base, 1e-14);
  EXPECT_NEAR(total_measure(validate_lattice(2, {1, 6}), m, VolumeKind::riemannian), 6.0, 1e-14);
}

TEST(TotalMeasure, DimensionMismatch)
{
  EXPECT_THROW(total_measure(validate_lattice(2, {1, 1}), MetricParam(Mat::Identity(2, 2), 1.0), VolumeKind::popp),
               DimensionMismatch);
}

TEST(VolumeKind, Names)
{
  for (VolumeKind k : {VolumeKind::riemannian, VolumeKind::popp, VolumeKind::minimal_popp}) {
    EXPECT_EQ(volume_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(volume_kind_from_string("lebesgue"), InvalidInput);
}
