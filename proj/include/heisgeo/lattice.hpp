#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "heisgeo/errors.hpp"
#include "heisgeo/linalg.hpp"

namespace heisgeo::lattice {

/// A unimodular change of basis U (new basis = old basis * U) and its inverse.
struct Reduction
{
  IntMat U;
  IntMat U_inv;
  Mat gram;  ///< U^T G U
};

inline Mat transform_gram(const Mat & G, const IntMat & U)
{
  const Mat Ud = U.cast<double>();
  return Ud.transpose() * G * Ud;
}

/// LLL reduction of the lattice with Gram matrix G.
inline Reduction lll(const Mat & G, double delta = 0.99)
{
  const auto m = G.rows();
  Reduction red{IntMat::Identity(m, m), IntMat::Identity(m, m), G};
  if (m <= 1) return red;

  Mat mu = Mat::Zero(m, m);
  Vec bstar(m);
  auto gso = [&]() {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        double s = red.gram(i, j);
        for (Eigen::Index k = 0; k < j; ++k) s -= mu(j, k) * mu(i, k) * bstar(k);
        mu(i, j) = s / bstar(j);
      }
      double s = red.gram(i, i);
      for (Eigen::Index k = 0; k < i; ++k) s -= mu(i, k) * mu(i, k) * bstar(k);
      bstar(i) = s;
    }
  };

  gso();
  Eigen::Index k = 1;
  for (int guard = 0; k < m && guard < 100000; ++guard) {
    for (Eigen::Index j = k - 1; j >= 0; --j) {
      const double q = std::round(mu(k, j));
      if (q != 0.0) {
        const auto qi = static_cast<long long>(q);
        red.U.col(k) -= qi * red.U.col(j);
        red.U_inv.row(j) += qi * red.U_inv.row(k);
        red.gram = transform_gram(G, red.U);
        gso();
      }
    }
    if (bstar(k) >= (delta - mu(k, k - 1) * mu(k, k - 1)) * bstar(k - 1)) {
      ++k;
    } else {
      red.U.col(k).swap(red.U.col(k - 1));
      red.U_inv.row(k).swap(red.U_inv.row(k - 1));
      red.gram = transform_gram(G, red.U);
      gso();
      k = std::max<Eigen::Index>(k - 1, 1);
    }
  }
  return red;
}

/**
 * @brief Fincke-Pohst enumeration of integer points v with (v-c)^T G (v-c) <= R2
 *
 * The lattice is LLL-reduced first; visit(v, q) receives points in the
 * original coordinates and returns the bound to continue with, so callers can
 * shrink the ellipsoid as they go.
 */
template <class Visit>
void enumerate_ellipsoid(const Mat & G, const Vec & center, double R2, Visit && visit)
{
  const auto m = G.rows();
  if (m == 0 || !(R2 >= 0)) return;
  const Reduction red = lll(G);
  const Vec c = red.U_inv.cast<double>() * center;

  Eigen::LLT<Mat> llt(red.gram);
  if (llt.info() != Eigen::Success) throw SingularMatrix("Gram matrix is not positive definite");
  const Mat R = llt.matrixU();
  Vec diag2(m);
  Mat coef = Mat::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    diag2(i) = R(i, i) * R(i, i);
    for (Eigen::Index j = i + 1; j < m; ++j) coef(i, j) = R(i, j) / R(i, i);
  }

  IntVec w = IntVec::Zero(m);
  Vec partial = Vec::Zero(m + 1);  // partial(i) = sum of squared terms for levels >= i
  double bound = R2;

  auto level_center = [&](Eigen::Index i) {
    double s = c(i);
    for (Eigen::Index j = i + 1; j < m; ++j) s -= coef(i, j) * (static_cast<double>(w(j)) - c(j));
    return s;
  };

  // iterative depth-first walk over levels m-1 .. 0
  std::vector<long long> hi(static_cast<std::size_t>(m));
  Eigen::Index i = m - 1;
  auto open_level = [&](Eigen::Index lvl) {
    const double ctr = level_center(lvl);
    const double room = bound - partial(lvl + 1);
    if (room < 0) return false;
    const double half = std::sqrt(room / diag2(lvl)) + 1e-12;
    const double lo = std::ceil(ctr - half);
    const double up = std::floor(ctr + half);
    if (lo > up) return false;
    w(lvl) = static_cast<long long>(lo);
    hi[static_cast<std::size_t>(lvl)] = static_cast<long long>(up);
    return true;
  };

  if (!open_level(i)) return;
  while (true) {
    const auto ui = static_cast<std::size_t>(i);
    if (w(i) > hi[ui]) {
      if (i == m - 1) return;
      ++i;
      ++w(i);
      continue;
    }
    const double diff = static_cast<double>(w(i)) - level_center(i);
    const double val = partial(i + 1) + diag2(i) * diff * diff;
    if (val > bound * (1 + 1e-12) + 1e-300) {
      ++w(i);
      continue;
    }
    partial(i) = val;
    if (i == 0) {
      const IntVec v = red.U * w;
      bound = visit(v, val);
      ++w(0);
      continue;
    }
    --i;
    if (!open_level(i)) {
      ++i;
      ++w(i);
    }
  }
}

inline double quadratic_form(const Mat & G, const IntVec & v)
{
  const Vec vd = v.cast<double>();
  return vd.dot(G * vd);
}

/// Flips v so its first nonzero entry is positive.
inline IntVec canonical_sign(IntVec v)
{
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) != 0) {
      if (v(k) < 0) v = -v;
      break;
    }
  }
  return v;
}

inline bool lex_greater(const IntVec & a, const IntVec & b)
{
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k) != b(k)) return a(k) > b(k);
  }
  return false;
}

struct ShortVector
{
  IntVec v;
  double norm = 0.0;
};

/// Relative slack under which two squared lengths count as a tie.
inline constexpr double kTieSlack = 1e-10;

/**
 * @brief Exact shortest nonzero vector of the lattice with Gram matrix G
 *
 * The witness has its first nonzero entry positive; ties in length are broken
 * towards the lexicographically largest witness.
 */
inline ShortVector shortest_vector(const Mat & G)
{
  const auto m = G.rows();
  const Reduction red = lll(G);
  double best = red.gram.diagonal().minCoeff();
  IntVec best_v;
  enumerate_ellipsoid(G, Vec::Zero(m), best * (1 + kTieSlack), [&](const IntVec & v, double q) {
    if (v.isZero()) return best * (1 + kTieSlack);
    const IntVec cv = canonical_sign(v);
    const double qe = quadratic_form(G, cv);
    (void)q;
    if (best_v.size() == 0 || qe < best * (1 - kTieSlack)) {
      best = qe;
      best_v = cv;
    } else if (qe <= best * (1 + kTieSlack) && lex_greater(cv, best_v)) {
      best = std::min(best, qe);
      best_v = cv;
    }
    return best * (1 + kTieSlack);
  });
  return {best_v, std::sqrt(std::max(best, 0.0))};
}

/// min over integer v of sqrt((v - c)^T G (v - c)), with the minimizer.
inline ShortVector closest_vector(const Mat & G, const Vec & c)
{
  IntVec babai(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) babai(k) = static_cast<long long>(std::llround(c(k)));
  const Reduction red = lll(G);
  // rounding in the reduced basis gives a much better starting radius
  const Vec cr = red.U_inv.cast<double>() * c;
  IntVec wr(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) wr(k) = static_cast<long long>(std::llround(cr(k)));
  IntVec best_v = red.U * wr;
  auto dist2 = [&](const IntVec & v) {
    const Vec d = v.cast<double>() - c;
    return d.dot(G * d);
  };
  double best = dist2(best_v);
  if (dist2(babai) < best) {
    best_v = babai;
    best = dist2(babai);
  }
  enumerate_ellipsoid(G, c, best * (1 + 1e-12), [&](const IntVec & v, double q) {
    if (q < best) {
      best = q;
      best_v = v;
    }
    return best * (1 + 1e-12);
  });
  return {best_v, std::sqrt(std::max(best, 0.0))};
}

/// All integer points with (v-c)^T G (v-c) <= R2; throws once more than cap points are found.
inline std::vector<ShortVector> points_within(const Mat & G, const Vec & c, double R2, std::size_t cap = 2'000'000)
{
  std::vector<ShortVector> out;
  enumerate_ellipsoid(G, c, R2, [&](const IntVec & v, double q) {
    if (out.size() >= cap) throw NumericalInconsistency("lattice point enumeration exceeded its cap");
    out.push_back({v, std::sqrt(std::max(q, 0.0))});
    return R2;
  });
  return out;
}

/**
 * @brief Successive minima lambda_1 <= ... <= lambda_m
 *
 * Every minimum is at most the longest vector of an LLL basis, so all points in
 * that ball are listed and taken greedily by increasing length whenever they
 * raise the rank.
 */
inline Vec successive_minima(const Mat & G)
{
  const auto m = G.rows();
  const Reduction red = lll(G);
  const double R2 = red.gram.diagonal().maxCoeff() * (1 + 1e-9);
  auto pts = points_within(G, Vec::Zero(m), R2);
  std::stable_sort(pts.begin(), pts.end(), [](const ShortVector & a, const ShortVector & b) { return a.norm < b.norm; });

  Vec minima(m);
  Mat chosen(m, 0);
  Eigen::Index rank = 0;
  for (const auto & p : pts) {
    if (rank == m) break;
    if (p.v.isZero()) continue;
    Mat trial(m, rank + 1);
    trial << chosen, p.v.cast<double>();
    Eigen::FullPivLU<Mat> lu(trial);
    lu.setThreshold(1e-9);
    if (lu.rank() == rank + 1) {
      chosen = trial;
      minima(rank++) = p.norm;
    }
  }
  if (rank != m) throw NumericalInconsistency("successive minima enumeration did not reach full rank");
  return minima;
}

}  // namespace heisgeo::lattice
