#include <gtest/gtest.h>

#include "heisgeo/geodesics.hpp"
#include "heisgeo/selftest.hpp"
#include "support/oracles.hpp"

using namespace heisgeo;

namespace {

CanonicalForm unit_cf(double rho = 0.0) { return canonicalize(MetricParam(Mat::Identity(2, 2), rho)); }

Covector cov1(double px, double py, double pz) { return {Vec::Constant(1, px), Vec::Constant(1, py), pz}; }

Covector random_cov(selftest::Rng & rng, int n, double pz)
{
  Covector c{Vec(n), Vec(n), pz};
  for (int i = 0; i < n; ++i) {
    c.p_x(i) = selftest::uniform(rng, -1, 1);
    c.p_y(i) = selftest::uniform(rng, -1, 1);
  }
  return c;
}

}  // namespace

TEST(GeodesicPoint, StraightLine)
{
  selftest::Rng rng(1);
  const CanonicalForm cf = canonicalize(MetricParam(selftest::random_matrix(rng, 2, -2, 2, 0.2), 0.4));
  const GeodesicSample s = geodesic_point(cf, cov1(1, 0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.coords.x(0), 2.0);
  EXPECT_DOUBLE_EQ(s.coords.y(0), 0.0);
  EXPECT_DOUBLE_EQ(s.coords.z, 0.0);
}

TEST(GeodesicPoint, FullCircle)
{
  const GeodesicSample s = geodesic_point(unit_cf(), cov1(1, 0, 1), 2 * oracle::pi);
  EXPECT_NEAR(s.coords.x(0), 0.0, 1e-14);
  EXPECT_NEAR(s.coords.y(0), 0.0, 1e-14);
  EXPECT_NEAR(s.coords.z, oracle::pi, 1e-13);
  // independent integration of the state-costate system
  const auto g = oracle::rk4_geodesic(Vec::Ones(1), 0.0, Vec::Ones(1), Vec::Zero(1), 1.0, 2 * oracle::pi, 4000);
  EXPECT_NEAR(g.z, oracle::pi, 1e-10);
  // z as the swept area integral (1/2) int (x y' - y x') dt
  const double area = oracle::simpson(
    [](double t) {
      const double x = std::sin(t), y = 1 - std::cos(t);
      return 0.5 * (x * std::sin(t) - y * std::cos(t));
    },
    0, 2 * oracle::pi);
  EXPECT_NEAR(area, oracle::pi, 1e-10);
}

TEST(GeodesicPoint, OriginAtTimeZero)
{
  selftest::Rng rng(2);
  const CanonicalForm cf = canonicalize(MetricParam(selftest::random_matrix(rng, 4, -2, 2, 0.2), 0.0));
  const GeodesicSample s = geodesic_point(cf, random_cov(rng, 2, 0.8), 0.0);
  EXPECT_TRUE(s.coords.horizontal().isZero(0));
  EXPECT_EQ(s.coords.z, 0.0);
}

TEST(GeodesicPoint, MatchesRk4OnRandomData)
{
  selftest::Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 3;
    const double rho = t % 2 ? selftest::uniform(rng, 0.1, 2) : 0.0;
    const CanonicalForm cf = canonicalize(MetricParam(selftest::random_matrix(rng, 2 * n, -2, 2, 0.2), rho));
    const Covector cov = random_cov(rng, n, selftest::uniform(rng, -2, 2));
    const double T = 2.5;
    const GeodesicSample s = geodesic_point(cf, cov, T);
    const auto g = oracle::rk4_geodesic(cf.d, rho, cov.p_x, cov.p_y, cov.p_z, T, 16000);
    EXPECT_LE((s.coords.x - g.x).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((s.coords.y - g.y).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(s.coords.z, g.z, 1e-9);
  }
}

TEST(GeodesicPoint, ContinuousAcrossBranch)
{
  selftest::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 3;
    const CanonicalForm cf = canonicalize(MetricParam(selftest::random_matrix(rng, 2 * n, -2, 2, 0.2), 0.0));
    Covector c = random_cov(rng, n, 1e-6);
    const GeodesicSample a = geodesic_point(cf, c, 1.5);
    c.p_z = 0;
    const GeodesicSample b = geodesic_point(cf, c, 1.5);
    EXPECT_LE((a.coords.horizontal() - b.coords.horizontal()).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_NEAR(a.coords.z, b.coords.z, 1e-4);
  }
}

TEST(GeodesicPoint, SeriesFallbackAgreesWithDirectFormula)
{
  // either side of the |xi t| = 1e-5 switch, against the closed form in extended precision
  const CanonicalForm cf = unit_cf();
  for (double pz : {0.99e-5, 1.01e-5}) {
    const long double px = 0.7L, py = -0.3L, th = pz;
    const long double vers = 2 * std::sin(th / 2) * std::sin(th / 2);
    long double tms = 0, term = th;  // th - sin th by its Taylor series
    for (int k = 1; k < 8; ++k) {
      term *= -th * th / ((2 * k) * (2 * k + 1));
      tms -= term;
    }
    const long double x = (std::sin(th) * px - vers * py) / th;
    const long double y = (vers * px + std::sin(th) * py) / th;
    const long double z = 0.5L * (px * px + py * py) * tms / (th * th);
    const GeodesicSample s = geodesic_point(cf, cov1(0.7, -0.3, pz), 1.0);
    EXPECT_NEAR(s.coords.x(0), static_cast<double>(x), 1e-12);
    EXPECT_NEAR(s.coords.y(0), static_cast<double>(y), 1e-12);
    EXPECT_NEAR(s.coords.z, static_cast<double>(z), 1e-12 * std::abs(static_cast<double>(z)) + 1e-20);
  }
}

TEST(GeodesicPoint, PeriodicInTheSubRiemannianPlane)
{
  selftest::Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const CanonicalForm cf = canonicalize(MetricParam(selftest::random_matrix(rng, 2, -2, 2, 0.2), 0.0));
    const Covector c = random_cov(rng, 1, selftest::uniform(rng, 0.2, 2));
    const double period = 2 * oracle::pi / std::abs(c.p_z * cf.d(0));
    const GeodesicSample s = geodesic_point(cf, c, period);
    EXPECT_LE(s.coords.horizontal().cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HamiltonianResidual, StraightLineIsExact)
{
  const double r = hamiltonian_residual(unit_cf(0.5), cov1(0.3, -0.8, 0.0), 2.0, 1000);
  EXPECT_LE(r, 1e-8);
}

TEST(HamiltonianResidual, CircleCaseIsSmall)
{
  EXPECT_LE(hamiltonian_residual(unit_cf(), cov1(1, 0, 1), oracle::pi, 2000), 1e-5);
}

TEST(HamiltonianResidual, SecondOrderConvergence)
{
  const double r1 = hamiltonian_residual(unit_cf(), cov1(1, 0, 1), oracle::pi, 2000);
  const double r2 = hamiltonian_residual(unit_cf(), cov1(1, 0, 1), oracle::pi, 4000);
  EXPECT_GE(r1 / r2, 3.5);
  EXPECT_LE(r1 / r2, 4.5);
}

TEST(HamiltonianResidual, RejectsCoarseGrids) { EXPECT_THROW(hamiltonian_residual(unit_cf(), cov1(1, 0, 1), 1, 9), InvalidInput); }

TEST(GeodesicLength, UnitCovector) { EXPECT_DOUBLE_EQ(geodesic_length(cov1(1, 0, 0), unit_cf(), 1.0), 1.0); }

TEST(GeodesicLength, VerticalLoopReachesExpPZ)
{
  for (double p : {0.25, 1.0, 3.0}) {
    const double pz = std::sqrt(oracle::pi / p);
    const Covector c = cov1(1, 0, pz);
    const double T = 2 * oracle::pi / pz;
    const GeodesicSample s = geodesic_point(unit_cf(), c, T);
    EXPECT_NEAR(s.coords.z, p, 1e-12);
    EXPECT_NEAR(geodesic_length(c, unit_cf(), T), 2 * std::sqrt(oracle::pi * p), 1e-12);
  }
}

TEST(GeodesicLength, Homogeneous)
{
  selftest::Rng rng(8);
  const CanonicalForm cf = canonicalize(MetricParam(selftest::random_matrix(rng, 4, -2, 2, 0.2), 0.7));
  const Covector c = random_cov(rng, 2, 0.4);
  EXPECT_NEAR(geodesic_length(c.scaled(3.0), cf, 1.3), 3 * geodesic_length(c, cf, 1.3), 1e-12);
}

TEST(GeodesicPoint, ConstantSpeed)
{
  selftest::Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 3;
    const double rho = t % 2 ? 0.6 : 0.0;
    const CanonicalForm cf = canonicalize(MetricParam(selftest::random_matrix(rng, 2 * n, -2, 2, 0.2), rho));
    const Covector c = random_cov(rng, n, selftest::uniform(rng, -1.5, 1.5));
    const double h = 1e-5;
    for (int k = 1; k <= 50; ++k) {
      const double tk = 0.06 * k;
      const auto a = geodesic_point(cf, c, tk + h).coords;
      const auto b = geodesic_point(cf, c, tk - h).coords;
      const auto m = geodesic_point(cf, c, tk).coords;
      const Vec v = (a.horizontal() - b.horizontal()) / (2 * h);
      double vert = (a.z - b.z) / (2 * h);
      for (int i = 0; i < n; ++i) vert -= 0.5 * cf.d(i) * (m.x(i) * v(n + i) - m.y(i) * v(i));
      const double sp = std::sqrt(v.squaredNorm() + (rho > 0 ? vert * vert / (rho * rho) : 0.0));
      EXPECT_NEAR(sp, geodesic_speed(cf, c), 1e-6 * geodesic_speed(cf, c));
    }
  }
}
