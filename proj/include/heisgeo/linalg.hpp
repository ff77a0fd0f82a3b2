#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace heisgeo {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IntVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.141592653589793238462643383279502884;

namespace tol {
inline constexpr double det = 1e-10;    ///< |det A~| at or below this is singular
inline constexpr double canon = 1e-9;   ///< block-form residual of a canonical form
inline constexpr double ident = 1e-9;   ///< relative slack for the delta / det identities
inline constexpr double shoot = 1e-6;   ///< absolute distance accuracy of the shooting solver
}  // namespace tol

/// J_n = [[0, I_n], [-I_n, 0]].
inline Mat symplectic_form(int n)
{
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return J;
}

/// Block form [[0, diag(d)], [-diag(d), 0]].
inline Mat paired_block_form(const Vec & d)
{
  const auto n = d.size();
  Mat M = Mat::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    M(i, n + i) = d(i);
    M(n + i, i) = -d(i);
  }
  return M;
}

inline bool all_finite(const Mat & m) { return m.allFinite(); }

/// theta - sin(theta) without cancellation for small |theta|.
inline double theta_minus_sin(double theta)
{
  if (std::abs(theta) >= 1.0) return theta - std::sin(theta);
  // alternating series theta^3/3! - theta^5/5! + ...
  const double t2 = theta * theta;
  double term = theta * t2 / 6.0;
  double sum = term;
  for (int k = 2; k < 12; ++k) {
    term *= -t2 / static_cast<double>((2 * k) * (2 * k + 1));
    sum += term;
  }
  return sum;
}

}  // namespace heisgeo
