#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "heisgeo/geodesics.hpp"
#include "heisgeo/lattice.hpp"
#include "heisgeo/moduli.hpp"

namespace heisgeo {

/// Euclidean norm of A~_canonical^{-1} v, i.e. the length of v in the frame {A X_i}.
inline double norm_A(const CanonicalForm & cf, const Vec & v)
{
  if (v.size() != 2 * cf.n) throw DimensionMismatch("norm_A: vector must have 2n entries");
  return (cf.frame_inverse * v).norm();
}

/**
 * @brief dist(e, exp(pZ))
 *
 * Two families of geodesics reach exp(pZ): the vertical line, of length
 * |p| / rho, and the loops closing after one full turn in the top plane, of
 * length (2 / d_n) sqrt(|p| pi d_n - pi^2 rho^2). The loops only exist once
 * |p| d_n >= 2 pi rho^2; below that the vertical line is the only candidate.
 */
inline double vertical_distance(const CanonicalForm & cf, double p)
{
  const double ap = std::abs(p);
  if (ap == 0.0) return 0.0;
  const double dn = cf.d_max();
  const double rho = cf.rho;
  const double line = rho > 0 ? ap / rho : kInf;
  if (ap * dn < 2 * kPi * rho * rho) return line;
  const double loop = (2.0 / dn) * std::sqrt(std::max(0.0, ap * kPi * dn - kPi * kPi * rho * rho));
  return std::min(line, loop);
}

struct ShootingOptions
{
  int subintervals = 64;          ///< bracketing grid over the first period
  double margin = 1e-13;          ///< relative distance kept from the period boundary
  int max_iterations = 200;       ///< per root refinement
  double top_plane_tol = 1e-9;    ///< |c_top| below this admits full-turn loops
};

enum class DistanceMethod { vertical_formula, horizontal_formula, shooting, quotient_enumeration };

inline const char * to_string(DistanceMethod m)
{
  switch (m) {
    case DistanceMethod::vertical_formula: return "vertical_formula";
    case DistanceMethod::horizontal_formula: return "horizontal_formula";
    case DistanceMethod::shooting: return "shooting";
    case DistanceMethod::quotient_enumeration: return "quotient_enumeration";
  }
  return "unknown";
}

struct DistanceResult
{
  double value = 0.0;
  std::optional<Covector> witness_covector;
  std::optional<double> witness_time;
  DistanceMethod method = DistanceMethod::shooting;
  bool certified = true;         ///< false when a candidate fell back to an upper bound
  double endpoint_error = 0.0;   ///< max-norm mismatch of the witness endpoint (frame coordinates)
  std::optional<std::vector<long long>> gamma;  ///< (a, b, c) of the optimal lattice element
};

namespace detail {

// (xi - sin xi) / sin^2(xi / 2), odd and increasing on (-2 pi, 2 pi).
inline double loop_twist(double xi)
{
  if (std::abs(xi) < 1e-4) return (2.0 * xi / 3.0) * (1.0 + xi * xi / 30.0);
  const double s = std::sin(xi / 2);
  return theta_minus_sin(xi) / (s * s);
}

// (xi/2) cot(xi/2)
inline double half_cot(double xi)
{
  if (std::abs(xi) < 1e-4) return 1.0 - xi * xi / 12.0;
  return (xi / 2) / std::tan(xi / 2);
}

// Momentum reaching the frame point c_i in unit time at frequency xi.
inline std::pair<double, double> plane_momentum(double xi, double cx, double cy)
{
  const double a = half_cot(xi);
  const double b = xi / 2;
  return {a * cx + b * cy, -b * cx + a * cy};
}

struct Candidate
{
  Covector cov;  // unit-time parametrization
  double length = kInf;
};

inline double max_abs_diff(const FrameCoords & a, const FrameCoords & b)
{
  double e = std::abs(a.z - b.z);
  if (a.x.size() > 0) {
    e = std::max(e, (a.x - b.x).cwiseAbs().maxCoeff());
    e = std::max(e, (a.y - b.y).cwiseAbs().maxCoeff());
  }
  return e;
}

}  // namespace detail

/**
 * @brief Sub-Riemannian (rho = 0) or Riemannian distance from e to target
 *
 * In unit time the horizontal endpoint equations are linear in each plane's
 * momentum, so the momenta are eliminated and only the vertical equation
 *   rho^2 p_z + sum_i (d_i |c_i|^2 / 8) g(p_z d_i) = z,  g(xi) = (xi - sin xi) / sin^2(xi/2)
 * is left, monotone in p_z on the first period |p_z| < 2 pi / d_n. Full-turn
 * loops at the period boundary are added when the top planes have no horizontal
 * displacement.
 */
inline DistanceResult distance_group(const CanonicalForm & cf, const GroupPoint & target,
                                     const ShootingOptions & opts = {})
{
  require_same_n(cf.n, target.n(), "distance_group");
  if (!target.horizontal().allFinite() || !std::isfinite(target.z)) {
    throw InvalidInput("distance target must be finite");
  }
  const int n = cf.n;
  const FrameCoords c = fixed_to_frame(cf, target);
  const double z = target.z;
  const double rho2 = cf.rho * cf.rho;
  const double dn = cf.d_max();
  const double pz_edge = 2 * kPi / dn;

  Vec weight(n);  // d_i |c_i|^2 / 8
  for (int i = 0; i < n; ++i) weight(i) = cf.d(i) * (c.x(i) * c.x(i) + c.y(i) * c.y(i)) / 8.0;
  const double horiz = c.horizontal().norm();

  auto make_candidate = [&](double pz) {
    detail::Candidate cand;
    cand.cov = {Vec(n), Vec(n), pz};
    for (int i = 0; i < n; ++i) {
      const auto [px, py] = detail::plane_momentum(pz * cf.d(i), c.x(i), c.y(i));
      cand.cov.p_x(i) = px;
      cand.cov.p_y(i) = py;
    }
    cand.length = geodesic_speed(cf, cand.cov);
    return cand;
  };

  std::vector<detail::Candidate> cands;

  if (horiz == 0.0 && z == 0.0) {
    DistanceResult r;
    r.value = 0.0;
    r.witness_covector = Covector{Vec::Zero(n), Vec::Zero(n), 0.0};
    r.witness_time = 0.0;
    r.method = DistanceMethod::vertical_formula;
    return r;
  }

  const bool interior_possible = horiz > 0.0 || rho2 > 0.0;
  if (interior_possible) {
    auto F = [&](double pz) {
      double s = rho2 * pz - z;
      for (int i = 0; i < n; ++i) {
        if (weight(i) != 0.0) s += weight(i) * detail::loop_twist(pz * cf.d(i));
      }
      return s;
    };
    const double lim = pz_edge * (1 - opts.margin);
    // F is increasing, so the scan only serves to localize the sign change
    double a = -lim;
    double fa = F(a);
    for (int k = 1; k <= opts.subintervals; ++k) {
      const double b = -lim + 2 * lim * k / opts.subintervals;
      const double fb = F(b);
      if (fa == 0.0) {
        cands.push_back(make_candidate(a));
        break;
      }
      if ((fa < 0) != (fb < 0) || fb == 0.0) {
        if (fb == 0.0) {
          cands.push_back(make_candidate(b));
        } else {
          std::uintmax_t iters = static_cast<std::uintmax_t>(opts.max_iterations);
          const auto [lo, hi] = boost::math::tools::toms748_solve(
            F, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(), iters);
          const double root = std::abs(F(lo)) <= std::abs(F(hi)) ? lo : hi;
          cands.push_back(make_candidate(root));
        }
        break;
      }
      a = b;
      fa = fb;
    }
  }

  // full-turn loops in the top planes
  double top = 0.0;
  for (int i = 0; i < n; ++i) {
    if (cf.d(i) >= dn * (1 - 1e-12)) top = std::max(top, std::hypot(c.x(i), c.y(i)));
  }
  if (z != 0.0 && top <= opts.top_plane_tol * std::max(1.0, horiz)) {
    const double pz = std::copysign(pz_edge, z);
    detail::Candidate cand;
    cand.cov = {Vec::Zero(n), Vec::Zero(n), pz};
    double rest = rho2 * pz;
    int first_top = -1;
    for (int i = 0; i < n; ++i) {
      if (cf.d(i) >= dn * (1 - 1e-12)) {
        if (first_top < 0) first_top = i;
        continue;
      }
      const auto [px, py] = detail::plane_momentum(pz * cf.d(i), c.x(i), c.y(i));
      cand.cov.p_x(i) = px;
      cand.cov.p_y(i) = py;
      rest += weight(i) * detail::loop_twist(pz * cf.d(i));
    }
    const double free2 = 2 * pz * (z - rest);
    if (free2 >= 0 && first_top >= 0) {
      cand.cov.p_x(first_top) = std::sqrt(free2);
      cand.length = geodesic_speed(cf, cand.cov);
      cands.push_back(cand);
    }
  }

  if (cands.empty()) {
    throw ShootingFailure("no geodesic endpoint root bracketed", horiz + vertical_distance(cf, z));
  }
  const auto best = std::min_element(
    cands.begin(), cands.end(), [](const auto & u, const auto & v) { return u.length < v.length; });

  DistanceResult r;
  r.value = best->length;
  r.method = horiz == 0.0 ? DistanceMethod::vertical_formula
             : z == 0.0   ? DistanceMethod::horizontal_formula
                          : DistanceMethod::shooting;
  const GeodesicSample end = geodesic_point(cf, best->cov, 1.0);
  r.endpoint_error = detail::max_abs_diff(end.coords, c);
  if (best->length > 0) {
    r.witness_covector = best->cov.scaled(1.0 / best->length);
    r.witness_time = best->length;
  } else {
    r.witness_covector = best->cov;
    r.witness_time = 1.0;
  }
  return r;
}

/// exp-coordinates of exp(sum r_i a_i X_i) exp(sum b_i X_{n+i}) exp(c Z).
inline GroupPoint lattice_element(const LatticeParam & lat, const IntVec & a, const IntVec & b, long long c)
{
  const int n = lat.n;
  GroupPoint g = GroupPoint::identity(n);
  double twist = 0.0;
  for (int i = 0; i < n; ++i) {
    g.x(i) = static_cast<double>(lat.r[static_cast<std::size_t>(i)] * a(i));
    g.y(i) = static_cast<double>(b(i));
    twist += g.x(i) * g.y(i);
  }
  g.z = static_cast<double>(c) + 0.5 * twist;
  return g;
}

/// Gram matrix of {r_1 X_1, ..., r_n X_n, X_{n+1}, ..., X_{2n}} under the A-inner product.
inline Mat base_torus_gram(const LatticeParam & lat, const CanonicalForm & cf)
{
  require_same_n(lat.n, cf.n, "base_torus_gram");
  Mat B = Mat::Identity(2 * cf.n, 2 * cf.n);
  for (int i = 0; i < cf.n; ++i) B(i, i) = static_cast<double>(lat.r[static_cast<std::size_t>(i)]);
  const Mat FB = cf.frame_inverse * B;
  Mat G = FB.transpose() * FB;
  G = 0.5 * (G + G.transpose());
  if (Eigen::LLT<Mat>(G).info() != Eigen::Success) throw SingularMatrix("base torus Gram matrix is not positive definite");
  return G;
}

/**
 * @brief Distance between the classes of p and q in Gamma_r \ H_n
 *
 * Minimizes dist(e, p^{-1} gamma q) over gamma = (a, b, c). Horizontal parts
 * are enumerated inside the ellipsoid ||U||_A <= best; for each one the central
 * coordinate c is scanned outward from the nearest integer until the lower
 * bound max(||U||_A, dist(e, exp(zZ)) - ||U||_A) exceeds the best value.
 */
inline DistanceResult distance_quotient(const LatticeParam & lat, const CanonicalForm & cf, const GroupPoint & p,
                                        const GroupPoint & q, const ShootingOptions & opts = {})
{
  require_same_n(lat.n, cf.n, "distance_quotient");
  require_same_n(cf.n, p.n(), "distance_quotient");
  require_same_n(cf.n, q.n(), "distance_quotient");
  const int n = cf.n;
  const GroupPoint pinv = group_inverse(p);

  DistanceResult best;
  best.value = kInf;
  best.method = DistanceMethod::quotient_enumeration;
  bool certified = true;

  auto consider = [&](const IntVec & a, const IntVec & b, long long cz, const GroupPoint & rel) {
    double value;
    std::optional<Covector> cov;
    std::optional<double> time;
    double err = 0.0;
    bool ok = true;
    try {
      const DistanceResult d = distance_group(cf, rel, opts);
      value = d.value;
      cov = d.witness_covector;
      time = d.witness_time;
      err = d.endpoint_error;
    } catch (const ShootingFailure & f) {
      value = f.upper_bound();
      ok = false;
    }
    if (value < best.value) {
      best.value = value;
      best.witness_covector = cov;
      best.witness_time = time;
      best.endpoint_error = err;
      std::vector<long long> g(a.data(), a.data() + n);
      g.insert(g.end(), b.data(), b.data() + n);
      g.push_back(cz);
      best.gamma = std::move(g);
      certified = ok;
    }
  };

  const IntVec zero = IntVec::Zero(n);
  consider(zero, zero, 0, group_mul(pinv, q));

  const Mat G = base_torus_gram(lat, cf);
  // U(w) = B w + s with s = q_h - p_h; center of the ellipsoid in w-coordinates is -B^{-1} s
  const Vec s = q.horizontal() - p.horizontal();
  Vec center = -s;
  for (int i = 0; i < n; ++i) center(i) /= static_cast<double>(lat.r[static_cast<std::size_t>(i)]);

  lattice::enumerate_ellipsoid(G, center, best.value * best.value * (1 + 1e-9), [&](const IntVec & w, double) {
    const IntVec a = w.head(n);
    const IntVec b = w.tail(n);
    const GroupPoint rel0 = group_mul(group_mul(pinv, lattice_element(lat, a, b, 0)), q);
    const double un = norm_A(cf, rel0.horizontal());
    if (un <= best.value) {
      const long long c0 = std::llround(-rel0.z);
      for (int dir = 0; dir < 2; ++dir) {
        for (long long step = (dir == 0 ? 0 : 1);; ++step) {
          const long long cz = dir == 0 ? c0 + step : c0 - step;
          const double zz = rel0.z + static_cast<double>(cz);
          const double lb = std::max(un, vertical_distance(cf, zz) - un);
          if (lb > best.value * (1 + 1e-12)) break;
          if (cz == 0 && a.isZero() && b.isZero()) continue;
          GroupPoint rel = rel0;
          rel.z = zz;
          consider(a, b, cz, rel);
        }
      }
    }
    return best.value * best.value * (1 + 1e-9);
  });

  best.certified = certified;
  return best;
}

}  // namespace heisgeo
