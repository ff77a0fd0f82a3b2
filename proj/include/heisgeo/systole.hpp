#pragma once

#include <cmath>
#include <string>

#include "heisgeo/lattice.hpp"
#include "heisgeo/metric.hpp"
#include "heisgeo/volumes.hpp"

namespace heisgeo {

/// Loewner's optimal systolic constant of 2-tori, sqrt(2 / sqrt 3).
inline double loewner_constant() { return std::sqrt(2.0 / std::sqrt(3.0)); }

/// Minkowski's bound 2 / omega_m^{1/m} for flat m-tori, omega_m the unit-ball volume.
inline double minkowski_constant(int m)
{
  const double omega = std::pow(kPi, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
  return 2.0 / std::pow(omega, 1.0 / m);
}

/// Loewner in dimension 2, Minkowski above.
inline double default_torus_constant(int n) { return n == 1 ? loewner_constant() : minkowski_constant(2 * n); }

/**
 * @brief Constant of sys <= C_n measure^{1/(2n+2)} for rho = 0
 *
 * From sys^{2n+2} <= s1^{2n} s2^2, the torus bound on s1 and
 * delta / d_n <= sqrt(2n): C_n^{2n+2} = 4 sqrt(2) pi sqrt(n) C~^{2n}.
 */
inline double systolic_constant(int n, double torus_constant)
{
  return std::pow(4.0 * std::sqrt(2.0) * kPi * std::sqrt(static_cast<double>(n)) * std::pow(torus_constant, 2 * n),
                  1.0 / (2 * n + 2));
}

/// (2 sqrt(2) pi C~^{2n} / sqrt(n))^{1/(2n+2)}, smaller than systolic_constant by (2n)^{1/(2n+2)}.
inline double published_systolic_constant(int n, double torus_constant)
{
  return std::pow(2.0 * std::sqrt(2.0) * kPi * std::pow(torus_constant, 2 * n) / std::sqrt(static_cast<double>(n)),
                  1.0 / (2 * n + 2));
}

struct ShortestLatticeVector
{
  IntVec witness;  ///< coefficients on {r_1 X_1, ..., r_n X_n, X_{n+1}, ..., X_{2n}}
  double s1 = 0.0;
};

inline ShortestLatticeVector shortest_lattice_vector(const LatticeParam & lat, const CanonicalForm & cf)
{
  const lattice::ShortVector sv = lattice::shortest_vector(base_torus_gram(lat, cf));
  return {sv.v, sv.norm};
}

/// dist(e, exp(Z)); 2 sqrt(pi / d_n) when rho = 0.
inline double vertical_systole(const CanonicalForm & cf) { return vertical_distance(cf, 1.0); }

struct Systole
{
  double s1 = 0.0;
  IntVec s1_witness;
  double s2 = 0.0;
  double systole = 0.0;
};

inline Systole compute_systole(const LatticeParam & lat, const CanonicalForm & cf)
{
  const ShortestLatticeVector sv = shortest_lattice_vector(lat, cf);
  Systole s;
  s.s1 = sv.s1;
  s.s1_witness = sv.witness;
  s.s2 = vertical_systole(cf);
  s.systole = std::min(s.s1, s.s2);
  return s;
}

struct SystoleReport
{
  double s1 = 0.0;
  IntVec s1_witness;
  double s2 = 0.0;
  double systole = 0.0;
  double measure = 0.0;            ///< total Popp measure
  double torus_constant = 0.0;
  double constant_used = 0.0;
  double bound_rhs = 0.0;
  bool holds = false;
  double equality_gap = 0.0;       ///< bound_rhs - systole
  double published_constant = 0.0;
  double published_rhs = 0.0;
  bool holds_with_published = false;
};

inline SystoleReport systolic_bound(const LatticeParam & lat, const MetricParam & m, std::optional<double> torus_constant = {})
{
  require_same_n(lat.n, m.n(), "systolic_bound");
  if (m.rho() != 0.0) throw RankError("systolic inequality applies to rho = 0 only", "/rho");
  const int n = m.n();
  const CanonicalForm cf = canonicalize(m);
  const Systole s = compute_systole(lat, cf);

  SystoleReport rep;
  rep.s1 = s.s1;
  rep.s1_witness = s.s1_witness;
  rep.s2 = s.s2;
  rep.systole = s.systole;
  rep.measure = total_measure(lat, m, VolumeKind::popp);
  rep.torus_constant = torus_constant.value_or(default_torus_constant(n));
  if (!(rep.torus_constant > 0)) throw NonPositiveEntry("torus constant must be positive", "/constant");
  const double scale = std::pow(rep.measure, 1.0 / (2 * n + 2));
  rep.constant_used = systolic_constant(n, rep.torus_constant);
  rep.bound_rhs = rep.constant_used * scale;
  rep.holds = rep.systole <= rep.bound_rhs * (1 + tol::ident);
  rep.equality_gap = rep.bound_rhs - rep.systole;
  rep.published_constant = published_systolic_constant(n, rep.torus_constant);
  rep.published_rhs = rep.published_constant * scale;
  rep.holds_with_published = rep.systole <= rep.published_rhs * (1 + tol::ident);
  return rep;
}

/// Gauss-reduced 2x2 Gram matrix: |2 g12| <= g11 <= g22.
inline Mat gauss_reduce(Mat G)
{
  for (int guard = 0; guard < 1000; ++guard) {
    if (G(0, 0) > G(1, 1)) {
      std::swap(G(0, 0), G(1, 1));
    }
    const double q = std::round(G(0, 1) / G(0, 0));
    if (q == 0.0) break;
    // b2 <- b2 - q b1
    G(1, 1) = G(1, 1) - 2 * q * G(0, 1) + q * q * G(0, 0);
    G(0, 1) = G(1, 0) = G(0, 1) - q * G(0, 0);
  }
  if (G(0, 0) > G(1, 1)) std::swap(G(0, 0), G(1, 1));
  return G;
}

/// Reduced form of a hexagonal lattice: g11 = g22 and |g12| = g11 / 2.
inline bool is_hexagonal(const Mat & G, double rel_tol = 1e-6)
{
  const Mat R = gauss_reduce(G);
  const double a = R(0, 0);
  return std::abs(R(1, 1) - a) <= rel_tol * a && std::abs(2 * std::abs(R(0, 1)) - a) <= rel_tol * a;
}

struct ClassificationReport
{
  long long r = 1;
  double threshold = 0.0;        ///< 4 pi C~_2^2
  std::string case_label;        ///< "1", "2" or "boundary"
  double C_case1 = 0.0;          ///< C~_2 r^{1/4}
  double C_case2 = 0.0;          ///< 2 sqrt(pi) r^{-1/4}
  double C_r = 0.0;              ///< constant of the reported case (case 1 at the boundary)
  double s1 = 0.0;
  double s2 = 0.0;
  double systole = 0.0;
  double measure = 0.0;
  double ratio = 0.0;            ///< systole / measure^{1/4}
  bool base_hexagonal = false;
  bool equality_condition = false;  ///< case 1: hexagonal base and s1 <= s2; case 2: s1 >= s2
  bool attains_bound = false;       ///< |ratio - C_r| <= 1e-6 C_r
  double sharp_case1 = 0.0;      ///< 2^{1/8} C~_2 r^{1/4}, attained by a hexagonal base
  double sharp_case2 = 0.0;      ///< 2^{9/8} sqrt(pi) r^{-1/4} = s2 / measure^{1/4} exactly
};

inline ClassificationReport classify_3d(long long r, const MetricParam & m)
{
  if (m.n() != 1) throw DimensionMismatch("classify_3d needs n = 1", "/A_tilde");
  if (m.rho() != 0.0) throw RankError("classify_3d needs rho = 0", "/rho");
  const LatticeParam lat = validate_lattice(1, {r});
  const CanonicalForm cf = canonicalize(m);
  const double C2 = loewner_constant();
  const double rr = static_cast<double>(r);

  ClassificationReport rep;
  rep.r = r;
  rep.threshold = 4 * kPi * C2 * C2;
  rep.case_label = std::abs(rr - rep.threshold) <= 1e-12 * rep.threshold ? "boundary"
                   : rr < rep.threshold                                   ? "1"
                                                                          : "2";
  rep.C_case1 = C2 * std::pow(rr, 0.25);
  rep.C_case2 = 2 * std::sqrt(kPi) * std::pow(rr, -0.25);
  rep.C_r = rep.case_label == "2" ? rep.C_case2 : rep.C_case1;
  rep.sharp_case1 = std::pow(2.0, 0.125) * rep.C_case1;
  rep.sharp_case2 = std::pow(2.0, 0.125) * rep.C_case2;

  const Systole s = compute_systole(lat, cf);
  rep.s1 = s.s1;
  rep.s2 = s.s2;
  rep.systole = s.systole;
  rep.measure = total_measure(lat, m, VolumeKind::popp);
  rep.ratio = rep.systole / std::pow(rep.measure, 0.25);
  rep.base_hexagonal = is_hexagonal(base_torus_gram(lat, cf));
  rep.equality_condition = rep.case_label == "2" ? rep.s1 >= rep.s2 : rep.base_hexagonal && rep.s1 <= rep.s2;
  rep.attains_bound = std::abs(rep.ratio - rep.C_r) <= 1e-6 * rep.C_r;
  return rep;
}

}  // namespace heisgeo
