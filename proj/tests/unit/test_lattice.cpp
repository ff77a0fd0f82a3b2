#include <gtest/gtest.h>

#include "heisgeo/lattice.hpp"
#include "heisgeo/selftest.hpp"
#include "support/oracles.hpp"

using namespace heisgeo;

namespace {

Mat random_gram(selftest::Rng & rng, int dim)
{
  const Mat B = selftest::random_matrix(rng, dim, -2, 2, 0.3);
  return B.transpose() * B;
}

}  // namespace

TEST(Lll, UnimodularAndConsistent)
{
  selftest::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const int dim = 2 + t % 5;
    const Mat G = random_gram(rng, dim);
    const lattice::Reduction red = lattice::lll(G);
    const Mat U = red.U.cast<double>();
    EXPECT_NEAR(std::abs(U.determinant()), 1.0, 1e-9);
    EXPECT_TRUE((red.U * red.U_inv).isIdentity());
    EXPECT_LE((lattice::transform_gram(G, red.U) - red.gram).cwiseAbs().maxCoeff(), 1e-9 * G.cwiseAbs().maxCoeff());
  }
}

TEST(Lll, SizeReducedAndLovasz)
{
  selftest::Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const int dim = 2 + t % 4;
    const Mat Gr = lattice::lll(random_gram(rng, dim)).gram;
    // Gram-Schmidt from the Cholesky factor of the reduced Gram matrix
    const Mat L = Eigen::LLT<Mat>(Gr).matrixL();
    for (int k = 1; k < dim; ++k) {
      for (int j = 0; j < k; ++j) EXPECT_LE(std::abs(L(k, j) / L(j, j)), 0.5 + 1e-9);
      const double mu = L(k, k - 1) / L(k - 1, k - 1);
      EXPECT_GE(L(k, k) * L(k, k), (0.99 - mu * mu) * L(k - 1, k - 1) * L(k - 1, k - 1) * (1 - 1e-9));
    }
  }
}

TEST(ShortestVector, MatchesExhaustiveSearch)
{
  selftest::Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    const int dim = 2 + t % 3;
    const Mat G = random_gram(rng, dim);
    const lattice::ShortVector sv = lattice::shortest_vector(G);
    const oracle::Svp want = oracle::brute_force_svp(G, oracle::gram_box(G, G.diagonal().minCoeff()));
    EXPECT_NEAR(sv.norm * sv.norm, want.norm2, 1e-9 * want.norm2);
    EXPECT_EQ(sv.v, want.v);
  }
}

TEST(ShortestVector, TieBreakIsLexicographic)
{
  // square lattice: (1, 0) and (0, 1) tie, the larger coefficient vector wins
  const lattice::ShortVector sv = lattice::shortest_vector(Mat::Identity(2, 2));
  IntVec want(2);
  want << 1, 0;
  EXPECT_EQ(sv.v, want);
  EXPECT_DOUBLE_EQ(sv.norm, 1.0);
}

TEST(ShortestVector, HexagonalLattice)
{
  Mat G(2, 2);
  G << 1, 0.5, 0.5, 1;
  const lattice::ShortVector sv = lattice::shortest_vector(G);
  EXPECT_NEAR(sv.norm, 1.0, 1e-14);
  IntVec want(2);
  want << 1, 0;
  EXPECT_EQ(sv.v, want);
}

TEST(ShortestVector, SkewedBasis)
{
  // basis (1, 0), (1000, 1) of Z^2
  Mat B(2, 2);
  B << 1, 1000, 0, 1;
  const lattice::ShortVector sv = lattice::shortest_vector(B.transpose() * B);
  EXPECT_NEAR(sv.norm, 1.0, 1e-9);
}

TEST(ClosestVector, MatchesExhaustiveSearch)
{
  selftest::Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const int dim = 2 + t % 3;
    const Mat G = random_gram(rng, dim);
    Vec c(dim);
    for (int i = 0; i < dim; ++i) c(i) = selftest::uniform(rng, -3, 3);
    const lattice::ShortVector cv = lattice::closest_vector(G, c);
    double best = oracle::pi * 1e9;
    const long long B = 8;
    IntVec v = IntVec::Constant(dim, -B);
    while (true) {
      const Vec d = v.cast<double>() - c;
      best = std::min(best, d.dot(G * d));
      int i = 0;
      while (i < dim && v(i) == B) v(i++) = -B;
      if (i == dim) break;
      ++v(i);
    }
    EXPECT_NEAR(cv.norm * cv.norm, best, 1e-9 * (1 + best));
    const Vec d = cv.v.cast<double>() - c;
    EXPECT_NEAR(d.dot(G * d), cv.norm * cv.norm, 1e-9 * (1 + best));
  }
}

TEST(PointsWithin, CountsUnitBall)
{
  // Z^2 points with norm^2 <= 2: origin, 4 axis, 4 diagonal
  EXPECT_EQ(lattice::points_within(Mat::Identity(2, 2), Vec::Zero(2), 2.0).size(), 9u);
  EXPECT_EQ(lattice::points_within(Mat::Identity(3, 3), Vec::Zero(3), 1.0).size(), 7u);
}

TEST(PointsWithin, EnforcesCap) { EXPECT_THROW(lattice::points_within(Mat::Identity(2, 2), Vec::Zero(2), 100.0, 10), NumericalInconsistency); }

TEST(SuccessiveMinima, DiagonalLattice)
{
  const Vec m = lattice::successive_minima(Vec(Eigen::Vector3d(9, 1, 4)).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(m(0), 1, 1e-12);
  EXPECT_NEAR(m(1), 2, 1e-12);
  EXPECT_NEAR(m(2), 3, 1e-12);
}

TEST(SuccessiveMinima, InvariantUnderBasisChangeAndOrdered)
{
  selftest::Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const int dim = 2 + t % 3;
    const Mat G = random_gram(rng, dim);
    const Vec m = lattice::successive_minima(G);
    for (int i = 1; i < dim; ++i) EXPECT_LE(m(i - 1), m(i) * (1 + 1e-12));
    EXPECT_NEAR(m(0), lattice::shortest_vector(G).norm, 1e-9 * m(0));
    IntMat E1 = IntMat::Identity(dim, dim), E2 = IntMat::Identity(dim, dim);
    E1(0, dim - 1) = 3;
    E2(1, 0) = -2;
    const IntMat U = E1 * E2;
    const Vec m2 = lattice::successive_minima(lattice::transform_gram(G, U));
    EXPECT_LE((m - m2).cwiseAbs().maxCoeff(), 1e-9 * m.maxCoeff());
    // Minkowski's second theorem, upper half: prod lambda_i^2 <= gamma_m^m det G with gamma_m <= m
    EXPECT_LE(m.array().square().prod(), std::pow(dim, dim) * G.determinant());
  }
}

TEST(EnumerateEllipsoid, VisitsEveryPointOnce)
{
  selftest::Rng rng(6);
  const Mat G = random_gram(rng, 3);
  const Vec c = Vec::Constant(3, 0.3);
  const double R2 = 4.0;
  std::size_t count = 0;
  lattice::enumerate_ellipsoid(G, c, R2, [&](const IntVec & v, double q) {
    const Vec d = v.cast<double>() - c;
    EXPECT_NEAR(q, d.dot(G * d), 1e-9);
    EXPECT_LE(q, R2 * (1 + 1e-12));
    ++count;
    return R2;
  });
  std::size_t brute = 0;
  const long long B = oracle::gram_box(G, R2) + 2;
  for (long long a = -B; a <= B; ++a) {
    for (long long b = -B; b <= B; ++b) {
      for (long long e = -B; e <= B; ++e) {
        const Vec d = Eigen::Vector3d(static_cast<double>(a), static_cast<double>(b), static_cast<double>(e)) - c;
        if (d.dot(G * d) <= R2) ++brute;
      }
    }
  }
  EXPECT_EQ(count, brute);
}
