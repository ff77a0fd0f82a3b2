#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "heisgeo/moduli.hpp"

namespace heisgeo {

enum class VolumeKind { riemannian, popp, minimal_popp };

inline const char * to_string(VolumeKind k)
{
  switch (k) {
    case VolumeKind::riemannian: return "riemannian";
    case VolumeKind::popp: return "popp";
    case VolumeKind::minimal_popp: return "minimal_popp";
  }
  return "unknown";
}

/// Accepts both "minimal_popp" and the CLI spelling "minimal-popp".
inline VolumeKind volume_kind_from_string(const std::string & s)
{
  if (s == "riemannian") return VolumeKind::riemannian;
  if (s == "popp") return VolumeKind::popp;
  if (s == "minimal_popp" || s == "minimal-popp") return VolumeKind::minimal_popp;
  throw InvalidInput("unknown volume kind '" + s + "'", "/kind");
}

/// Coefficient of X_1* ^ ... ^ X_2n* ^ Z* for the Riemannian volume of (h_n, A).
inline double riemannian_coeff(const MetricParam & m)
{
  if (m.rho() == 0.0) throw RankDeficient("Riemannian volume needs rho > 0", "/rho");
  return 1.0 / (m.rho() * m.abs_det());
}

/**
 * @brief Popp volume coefficient
 *
 * General route: with a single vertical direction, B = sum_ij c_ij^2 for the
 * structure constants c_ij = (A~^T J A~)_ij of the orthonormal frame, and the
 * coefficient is det(B)^{-1/2} |det A~|^{-1}. It must agree with the closed
 * form (delta |det A~|)^{-1} computed from the canonical invariants.
 */
inline double popp_coeff(const MetricParam & m)
{
  const Mat S = m.structure_matrix();
  const double detB = S.array().square().sum();
  const double general = 1.0 / (std::sqrt(detB) * m.abs_det());

  const CanonicalForm cf = canonicalize(m);
  const double delta = std::sqrt(2.0 * cf.d.squaredNorm());
  const double closed = 1.0 / (delta * cf.d.prod());

  if (std::abs(general - closed) > tol::ident * closed) {
    throw NumericalInconsistency("Popp coefficient routes disagree: " + std::to_string(general) + " vs "
                                 + std::to_string(closed));
  }
  return closed;
}

/// min{|rho|^{-1}, delta^{-1}} |det A~|^{-1}, with |rho|^{-1} = inf at rho = 0.
inline double minimal_popp_coeff(const MetricParam & m)
{
  const double popp = popp_coeff(m);
  if (m.rho() == 0.0) return popp;
  return std::min(popp, riemannian_coeff(m));
}

inline double volume_coeff(const MetricParam & m, VolumeKind kind)
{
  switch (kind) {
    case VolumeKind::riemannian: return riemannian_coeff(m);
    case VolumeKind::popp: return popp_coeff(m);
    case VolumeKind::minimal_popp: return minimal_popp_coeff(m);
  }
  return kInf;
}

/// Total measure of Gamma_r \ H_n: the coefficient times prod r_i.
inline double total_measure(const LatticeParam & lat, const MetricParam & m, VolumeKind kind)
{
  require_same_n(lat.n, m.n(), "total_measure");
  return volume_coeff(m, kind) * static_cast<double>(lat.product());
}

}  // namespace heisgeo
