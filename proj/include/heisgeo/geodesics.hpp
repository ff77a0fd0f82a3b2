#pragma once

#include <algorithm>
#include <cmath>

#include "heisgeo/moduli.hpp"

namespace heisgeo {

/// Initial momentum (h_x(0), h_y(0), h_z(0)) of a normal extremal in the canonical frame.
struct Covector
{
  Vec p_x;
  Vec p_y;
  double p_z = 0.0;

  int n() const { return static_cast<int>(p_x.size()); }

  Covector scaled(double c) const { return {c * p_x, c * p_y, c * p_z}; }
};

struct GeodesicSample
{
  double t = 0.0;
  FrameCoords coords;
  double speed = 0.0;
};

namespace detail {

// sin(xi t) / xi and (1 - cos(xi t)) / xi, continuous through xi = 0.
inline std::pair<double, double> rotation_integrals(double xi, double t)
{
  const double th = xi * t;
  if (std::abs(th) < 1e-5) {
    const double th2 = th * th;
    return {t * (1.0 - th2 / 6.0 + th2 * th2 / 120.0), t * (th / 2.0 - th * th2 / 24.0)};
  }
  const double h = std::sin(th / 2);
  return {std::sin(th) / xi, 2.0 * h * h / xi};
}

// (xi t - sin(xi t)) / xi^2, continuous through xi = 0.
inline double twist_integral(double xi, double t)
{
  const double th = xi * t;
  if (std::abs(th) < 1e-5) return t * t * (th / 6.0 - th * th * th / 120.0);
  return theta_minus_sin(th) / (xi * xi);
}

inline void check_covector(const CanonicalForm & cf, const Covector & cov)
{
  if (cov.p_x.size() != cf.n || cov.p_y.size() != cf.n) {
    throw DimensionMismatch("covector has " + std::to_string(cov.p_x.size()) + " planes, expected "
                            + std::to_string(cf.n));
  }
}

}  // namespace detail

/// sqrt(2H) = sqrt(|p_x|^2 + |p_y|^2 + rho^2 p_z^2).
inline double geodesic_speed(const CanonicalForm & cf, const Covector & cov)
{
  return std::sqrt(cov.p_x.squaredNorm() + cov.p_y.squaredNorm() + cf.rho * cf.rho * cov.p_z * cov.p_z);
}

/**
 * @brief Closed-form normal geodesic from the identity
 *
 * Each plane (A X_i, A X_{n+i}) rotates with frequency xi_i = p_z d_i:
 *   x_i = (sin(xi t) p_x - (1 - cos(xi t)) p_y) / xi
 *   y_i = ((1 - cos(xi t)) p_x + sin(xi t) p_y) / xi
 *   z   = rho^2 p_z t + sum_i d_i |p_i|^2 (xi t - sin(xi t)) / (2 xi^2)
 * and p_z = 0 degenerates to straight lines.
 */
inline GeodesicSample geodesic_point(const CanonicalForm & cf, const Covector & cov, double t)
{
  detail::check_covector(cf, cov);
  const int n = cf.n;
  GeodesicSample s;
  s.t = t;
  s.coords.x.resize(n);
  s.coords.y.resize(n);
  double z = cf.rho * cf.rho * cov.p_z * t;
  for (int i = 0; i < n; ++i) {
    const double xi = cov.p_z * cf.d(i);
    const auto [sn, cs] = detail::rotation_integrals(xi, t);
    const double px = cov.p_x(i);
    const double py = cov.p_y(i);
    s.coords.x(i) = sn * px - cs * py;
    s.coords.y(i) = cs * px + sn * py;
    z += 0.5 * cf.d(i) * (px * px + py * py) * detail::twist_integral(xi, t);
  }
  s.coords.z = z;
  s.speed = geodesic_speed(cf, cov);
  return s;
}

/// Momentum (h_x(t), h_y(t)) along the extremal; h_z is conserved.
inline Covector momentum_at(const CanonicalForm & cf, const Covector & cov, double t)
{
  detail::check_covector(cf, cov);
  Covector h = cov;
  for (int i = 0; i < cf.n; ++i) {
    const double th = cov.p_z * cf.d(i) * t;
    const double c = std::cos(th);
    const double s = std::sin(th);
    h.p_x(i) = c * cov.p_x(i) - s * cov.p_y(i);
    h.p_y(i) = s * cov.p_x(i) + c * cov.p_y(i);
  }
  return h;
}

inline double geodesic_length(const Covector & cov, const CanonicalForm & cf, double T)
{
  return T * geodesic_speed(cf, cov);
}

/**
 * @brief Central-difference residual of the state equations along the closed form
 *
 * Checks x' = h_x, y' = h_y and z' = rho^2 h_z + (1/2) sum d_i (x_i h_{y_i} - y_i h_{x_i})
 * at the interior grid points t_k = k T / steps. The result is O(h^2).
 */
inline double hamiltonian_residual(const CanonicalForm & cf, const Covector & cov, double T, int steps)
{
  detail::check_covector(cf, cov);
  if (steps < 10) throw InvalidInput("hamiltonian_residual needs steps >= 10", "/steps");
  const double h = T / steps;
  double worst = 0.0;
  for (int k = 1; k < steps; ++k) {
    const double t = k * h;
    const GeodesicSample fwd = geodesic_point(cf, cov, t + h);
    const GeodesicSample bwd = geodesic_point(cf, cov, t - h);
    const GeodesicSample mid = geodesic_point(cf, cov, t);
    const Covector mom = momentum_at(cf, cov, t);

    const Vec dx = (fwd.coords.x - bwd.coords.x) / (2 * h);
    const Vec dy = (fwd.coords.y - bwd.coords.y) / (2 * h);
    const double dz = (fwd.coords.z - bwd.coords.z) / (2 * h);

    double zrate = cf.rho * cf.rho * cov.p_z;
    for (int i = 0; i < cf.n; ++i) {
      zrate += 0.5 * cf.d(i) * (mid.coords.x(i) * mom.p_y(i) - mid.coords.y(i) * mom.p_x(i));
    }
    worst = std::max(worst, (dx - mom.p_x).cwiseAbs().maxCoeff());
    worst = std::max(worst, (dy - mom.p_y).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(dz - zrate));
  }
  return worst;
}

}  // namespace heisgeo
