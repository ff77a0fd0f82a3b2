#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heisgeo/errors.hpp"
#include "heisgeo/linalg.hpp"

namespace heisgeo {

/**
 * @brief Divisibility tuple r = (r_1, ..., r_n) of the lattice
 *
 * Gamma_r is generated by exp(r_i X_i), exp(X_{n+i}) and exp(Z), with
 * r_i | r_{i+1}. Construct through validate_lattice().
 */
struct LatticeParam
{
  int n = 1;
  std::vector<long long> r{1};

  long long product() const
  {
    return std::accumulate(r.begin(), r.end(), 1LL, std::multiplies<>{});
  }

  long long last() const { return r.back(); }

  bool operator==(const LatticeParam &) const = default;
};

inline LatticeParam validate_lattice(int n, std::span<const long long> r)
{
  if (n < 1) throw NonPositiveEntry("Heisenberg index n must be >= 1, got " + std::to_string(n), "/n");
  if (static_cast<int>(r.size()) != n) {
    throw DimensionMismatch(
      "lattice tuple has " + std::to_string(r.size()) + " entries, expected n = " + std::to_string(n), "/r");
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < 1) {
      throw NonPositiveEntry(
        "r_" + std::to_string(i + 1) + " = " + std::to_string(r[i]) + " is not positive", "/r/" + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    if (r[i + 1] % r[i] != 0) {
      throw DivisibilityError("r_" + std::to_string(i + 1) + " = " + std::to_string(r[i]) + " does not divide r_"
                                + std::to_string(i + 2) + " = " + std::to_string(r[i + 1]) + " (index "
                                + std::to_string(i + 1) + ")",
                              i + 1,
                              "/r/" + std::to_string(i + 1));
    }
  }
  return LatticeParam{n, std::vector<long long>(r.begin(), r.end())};
}

inline LatticeParam validate_lattice(int n, std::initializer_list<long long> r)
{
  return validate_lattice(n, std::span<const long long>(r.begin(), r.size()));
}

/**
 * @brief Left-invariant metric parameter A = diag(A~, rho)
 *
 * The columns of A~ are the orthonormal horizontal frame {A X_i} written in
 * the fixed basis. rho is stored as |rho|; the sign is not an invariant.
 */
class MetricParam
{
public:
  MetricParam(Mat A_tilde, double rho) : A_(std::move(A_tilde)), rho_(std::abs(rho))
  {
    if (A_.rows() != A_.cols() || A_.rows() < 2 || A_.rows() % 2 != 0) {
      throw DimensionMismatch("A_tilde must be a square 2n x 2n matrix", "/A_tilde");
    }
    if (!A_.allFinite()) throw InvalidInput("A_tilde has non-finite entries", "/A_tilde");
    if (!std::isfinite(rho)) throw InvalidInput("rho must be finite", "/rho");
    abs_det_ = std::abs(A_.partialPivLu().determinant());
    if (!(abs_det_ > tol::det)) {
      throw SingularMatrix("A_tilde is singular (|det| = " + std::to_string(abs_det_) + ")", "/A_tilde");
    }
  }

  int n() const { return static_cast<int>(A_.rows() / 2); }
  const Mat & A_tilde() const { return A_; }
  double rho() const { return rho_; }
  double abs_det() const { return abs_det_; }

  /// S = A~^T J_n A~, the matrix of j(A) in the frame {A X_i}.
  Mat structure_matrix() const { return A_.transpose() * symplectic_form(n()) * A_; }

private:
  Mat A_;
  double rho_;
  double abs_det_;
};

/// Metric in canonical form: A~_canonical^T J A~_canonical = [[0, D], [-D, 0]].
struct CanonicalForm
{
  int n = 1;
  Vec d;                  ///< d_1 <= ... <= d_n
  double rho = 0.0;
  Mat R_used;             ///< orthogonal, A~_canonical = A~ R_used
  Mat A_tilde_canonical;
  Mat frame_inverse;      ///< inverse of A~_canonical

  double d_max() const { return d(n - 1); }
};

/// Point exp(sum x_i X_i + sum y_i X_{n+i} + z Z) in the fixed basis.
struct GroupPoint
{
  Vec x;
  Vec y;
  double z = 0.0;

  int n() const { return static_cast<int>(x.size()); }

  Vec horizontal() const
  {
    Vec u(2 * x.size());
    u << x, y;
    return u;
  }

  static GroupPoint identity(int n) { return {Vec::Zero(n), Vec::Zero(n), 0.0}; }

  static GroupPoint from_horizontal(const Vec & u, double z)
  {
    const auto n = u.size() / 2;
    return {u.head(n), u.tail(n), z};
  }
};

/// Exponential coordinates with respect to the orthonormal frame {A X_i, Z}.
struct FrameCoords
{
  Vec x;
  Vec y;
  double z = 0.0;

  int n() const { return static_cast<int>(x.size()); }

  Vec horizontal() const
  {
    Vec u(2 * x.size());
    u << x, y;
    return u;
  }
};

struct InvariantFingerprint
{
  Vec d;
  double delta = 0.0;
  double abs_det = 0.0;
  double rho = 0.0;
};

namespace detail {

inline void orient_first_nonzero_positive(Vec & v)
{
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12) {
      if (v(k) < 0) v = -v;
      return;
    }
  }
}

inline void project_out(Vec & v, const std::vector<Vec> & basis)
{
  // twice is enough for numerical orthogonality
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto & q : basis) v -= q.dot(v) * q;
  }
}

}  // namespace detail

/**
 * @brief Reduce A~ to canonical form by an orthogonal change of frame
 *
 * The skew matrix S = A~^T J A~ is paired through the symmetric eigenproblem of
 * -S^2 = S^T S: every eigenvalue d_i^2 appears twice, with eigenvectors u and
 * v = -S u / d_i spanning an S-invariant plane. Inside a degenerate cluster the
 * eigenvector with the largest residual after projecting out earlier choices
 * is taken first; each u is oriented so its first nonzero entry is positive.
 */
inline CanonicalForm canonicalize(const MetricParam & m)
{
  const int n = m.n();
  const int dim = 2 * n;
  const Mat S = m.structure_matrix();
  const Mat gram = S.transpose() * S;

  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalInconsistency("eigen-decomposition of -S^2 failed");
  const Vec & mu = eig.eigenvalues();
  const Mat & W = eig.eigenvectors();

  const double scale = std::max(mu(dim - 1), std::numeric_limits<double>::min());
  std::vector<std::pair<int, int>> clusters;  // [begin, end)
  for (int i = 0; i < dim;) {
    int j = i + 1;
    while (j < dim && std::abs(mu(j) - mu(i)) <= 1e-10 * scale) ++j;
    if ((j - i) % 2 != 0 && j < dim) ++j;
    clusters.emplace_back(i, j);
    i = j;
  }

  std::vector<Vec> chosen;
  std::vector<Vec> us;
  std::vector<Vec> vs;
  std::vector<double> ds;
  for (const auto & [begin, end] : clusters) {
    std::vector<bool> used(static_cast<std::size_t>(end - begin), false);
    for (int pick = 0; pick < (end - begin) / 2; ++pick) {
      int best = -1;
      double best_norm = -1.0;
      Vec best_res;
      for (int c = begin; c < end; ++c) {
        if (used[static_cast<std::size_t>(c - begin)]) continue;
        Vec res = W.col(c);
        detail::project_out(res, chosen);
        const double nr = res.norm();
        if (nr > best_norm + 1e-12) {
          best = c;
          best_norm = nr;
          best_res = std::move(res);
        }
      }
      if (best < 0 || best_norm < 1e-6) throw NumericalInconsistency("could not pair eigenvectors of -S^2");
      used[static_cast<std::size_t>(best - begin)] = true;

      Vec u = best_res / best_norm;
      detail::orient_first_nonzero_positive(u);
      Vec su = S * u;
      const double dn = su.norm();
      if (!(dn > 0)) throw SingularMatrix("structure matrix has a zero eigenvalue");
      Vec v = -su / dn;
      detail::project_out(v, chosen);
      v.normalize();

      chosen.push_back(u);
      chosen.push_back(v);
      ds.push_back(u.dot(S * v));
      us.push_back(std::move(u));
      vs.push_back(std::move(v));
    }
  }
  if (static_cast<int>(ds.size()) != n) throw NumericalInconsistency("eigenvalue pairing produced wrong count");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ds[a] < ds[b]; });

  CanonicalForm cf;
  cf.n = n;
  cf.rho = m.rho();
  cf.d.resize(n);
  cf.R_used.resize(dim, dim);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    cf.d(i) = ds[k];
    cf.R_used.col(i) = us[k];
    cf.R_used.col(n + i) = vs[k];
  }
  cf.A_tilde_canonical = m.A_tilde() * cf.R_used;
  cf.frame_inverse = cf.A_tilde_canonical.inverse();

  const Mat blocked = cf.R_used.transpose() * S * cf.R_used;
  const double err = (blocked - paired_block_form(cf.d)).cwiseAbs().maxCoeff();
  if (err > tol::canon * std::max(1.0, cf.d_max()) || (cf.d.array() <= 0).any()) {
    throw NumericalInconsistency("canonical form residual " + std::to_string(err) + " exceeds tolerance");
  }
  return cf;
}

/// Rebuilds a CanonicalForm from serialized parts, checking the block-form invariant.
inline CanonicalForm make_canonical_form(Vec d, double rho, Mat R_used, Mat A_tilde_canonical)
{
  const auto n = d.size();
  if (n < 1 || A_tilde_canonical.rows() != 2 * n || A_tilde_canonical.cols() != 2 * n) {
    throw DimensionMismatch("canonical form: A_tilde_canonical must be 2n x 2n", "/A_tilde_canonical");
  }
  if (R_used.rows() != 2 * n || R_used.cols() != 2 * n) {
    throw DimensionMismatch("canonical form: R_used must be 2n x 2n", "/R_used");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(d(i) > 0)) throw NonPositiveEntry("canonical form: d entries must be positive", "/d/" + std::to_string(i));
    if (i > 0 && d(i) < d(i - 1)) throw InvalidInput("canonical form: d must be sorted ascending", "/d");
  }
  if (!std::isfinite(rho) || rho < 0) throw InvalidInput("canonical form: rho must be finite and >= 0", "/rho");

  const Mat blocked = A_tilde_canonical.transpose() * symplectic_form(static_cast<int>(n)) * A_tilde_canonical;
  const double err = (blocked - paired_block_form(d)).cwiseAbs().maxCoeff();
  if (!(err <= tol::canon * std::max(1.0, d(n - 1)))) {
    throw InvalidInput("A_tilde_canonical is not in canonical form for the given d", "/A_tilde_canonical");
  }

  CanonicalForm cf;
  cf.n = static_cast<int>(n);
  cf.d = std::move(d);
  cf.rho = rho;
  cf.R_used = std::move(R_used);
  cf.A_tilde_canonical = std::move(A_tilde_canonical);
  cf.frame_inverse = cf.A_tilde_canonical.inverse();
  return cf;
}

inline InvariantFingerprint fingerprint(const MetricParam & m)
{
  const CanonicalForm cf = canonicalize(m);
  InvariantFingerprint fp;
  fp.d = cf.d;
  fp.delta = m.structure_matrix().norm();  // Hilbert-Schmidt
  fp.abs_det = m.abs_det();
  fp.rho = m.rho();

  const double delta_from_d = std::sqrt(2.0 * cf.d.squaredNorm());
  const double det_from_d = cf.d.prod();
  if (std::abs(fp.delta - delta_from_d) > tol::ident * fp.delta
      || std::abs(fp.abs_det - det_from_d) > tol::ident * fp.abs_det) {
    throw NumericalInconsistency("delta / determinant identities violated beyond tolerance");
  }
  return fp;
}

inline void require_same_n(int a, int b, const char * what)
{
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs "
                            + std::to_string(b) + ")");
  }
}

/// Group law in exponential coordinates: z'' = z + z' + (x.y' - y.x') / 2.
inline GroupPoint group_mul(const GroupPoint & p, const GroupPoint & q)
{
  require_same_n(p.n(), q.n(), "group_mul");
  if (p.y.size() != p.x.size() || q.y.size() != q.x.size()) throw DimensionMismatch("group_mul: x/y length differ");
  return {p.x + q.x, p.y + q.y, p.z + q.z + 0.5 * (p.x.dot(q.y) - p.y.dot(q.x))};
}

inline GroupPoint group_inverse(const GroupPoint & p) { return {-p.x, -p.y, -p.z}; }

inline GroupPoint frame_to_fixed(const CanonicalForm & cf, const FrameCoords & c)
{
  require_same_n(cf.n, c.n(), "frame_to_fixed");
  return GroupPoint::from_horizontal(cf.A_tilde_canonical * c.horizontal(), c.z);
}

inline FrameCoords fixed_to_frame(const CanonicalForm & cf, const GroupPoint & p)
{
  require_same_n(cf.n, p.n(), "fixed_to_frame");
  const Vec c = cf.frame_inverse * p.horizontal();
  return {c.head(cf.n), c.tail(cf.n), p.z};
}

}  // namespace heisgeo
