#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "heisgeo/collapse.hpp"
#include "heisgeo/geodesics.hpp"
#include "heisgeo/metric.hpp"
#include "heisgeo/moduli.hpp"
#include "heisgeo/systole.hpp"
#include "heisgeo/volumes.hpp"

namespace heisgeo::selftest {

struct CheckResult
{
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  ///< seconds; 0 means unbudgeted
};

using Rng = std::mt19937_64;

inline double uniform(Rng & rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline long long uniform_int(Rng & rng, long long lo, long long hi)
{
  return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

/// Entries uniform in [lo, hi], redrawn while |det| < min_det.
inline Mat random_matrix(Rng & rng, int dim, double lo, double hi, double min_det)
{
  while (true) {
    Mat A(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) A(i, j) = uniform(rng, lo, hi);
    }
    if (std::abs(A.determinant()) >= min_det) return A;
  }
}

inline Mat random_orthogonal(Rng & rng, int dim)
{
  const Mat M = random_matrix(rng, dim, -1, 1, 1e-3);
  Eigen::HouseholderQR<Mat> qr(M);
  Mat Q = qr.householderQ();
  return Q;
}

/// A~ = diag(k, k) for n = 1.
inline MetricParam appendix_A(double k, double rho = 0.0) { return MetricParam(k * Mat::Identity(2, 2), rho); }
/// A~ = diag(1/k, 1/k), rho = 1/k.
inline MetricParam appendix_B(double k) { return MetricParam(Mat::Identity(2, 2) / k, 1.0 / k); }

inline double rel_err(double a, double b)
{
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

namespace oracle {

/// d_i from the complex spectrum of S = A~^T J A~ (general eigen-solver, independent of canonicalize).
inline Vec invariants_from_spectrum(const Mat & A)
{
  const int n = static_cast<int>(A.rows() / 2);
  const Mat S = A.transpose() * symplectic_form(n) * A;
  Eigen::EigenSolver<Mat> es(S, false);
  std::vector<double> im;
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    const double v = es.eigenvalues()(i).imag();
    if (v > 0) im.push_back(v);
  }
  std::sort(im.begin(), im.end());
  Vec d(n);
  for (int i = 0; i < n && i < static_cast<int>(im.size()); ++i) d(i) = im[static_cast<std::size_t>(i)];
  return d;
}

/// Exhaustive shortest vector over the box |v_i| <= R sqrt((G^{-1})_ii), R^2 = min_i G_ii.
inline lattice::ShortVector brute_force_svp(const Mat & G)
{
  const auto m = G.rows();
  const double R2 = G.diagonal().minCoeff();
  const Mat Ginv = G.inverse();
  std::vector<long long> bound(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) bound[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(std::sqrt(R2 * Ginv(i, i)) + 1e-9));

  IntVec v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = -bound[static_cast<std::size_t>(i)];
  double best = kInf;
  IntVec best_v;
  while (true) {
    if (!v.isZero()) {
      const IntVec cv = lattice::canonical_sign(v);
      const double q = lattice::quadratic_form(G, cv);
      if (best_v.size() == 0 || q < best * (1 - lattice::kTieSlack)) {
        best = q;
        best_v = cv;
      } else if (q <= best * (1 + lattice::kTieSlack) && lattice::lex_greater(cv, best_v)) {
        best = std::min(best, q);
        best_v = cv;
      }
    }
    Eigen::Index i = 0;
    while (i < m && v(i) == bound[static_cast<std::size_t>(i)]) {
      v(i) = -bound[static_cast<std::size_t>(i)];
      ++i;
    }
    if (i == m) break;
    ++v(i);
  }
  return {best_v, std::sqrt(best)};
}

/// RK4 integration of the state-costate system in the canonical frame.
inline FrameCoords integrate_geodesic(const CanonicalForm & cf, const Covector & cov, double T, int steps)
{
  const int n = cf.n;
  // state: x(n), y(n), z, hx(n), hy(n)
  const int dim = 4 * n + 1;
  auto rhs = [&](const Vec & s) {
    Vec ds(dim);
    double dz = cf.rho * cf.rho * cov.p_z;
    for (int i = 0; i < n; ++i) {
      const double x = s(i), y = s(n + i), hx = s(2 * n + 1 + i), hy = s(3 * n + 1 + i);
      ds(i) = hx;
      ds(n + i) = hy;
      dz += 0.5 * cf.d(i) * (x * hy - y * hx);
      const double xi = cov.p_z * cf.d(i);
      ds(2 * n + 1 + i) = -xi * hy;
      ds(3 * n + 1 + i) = xi * hx;
    }
    ds(2 * n) = dz;
    return ds;
  };
  Vec s = Vec::Zero(dim);
  s.segment(2 * n + 1, n) = cov.p_x;
  s.segment(3 * n + 1, n) = cov.p_y;
  const double h = T / steps;
  for (int k = 0; k < steps; ++k) {
    const Vec k1 = rhs(s);
    const Vec k2 = rhs(s + 0.5 * h * k1);
    const Vec k3 = rhs(s + 0.5 * h * k2);
    const Vec k4 = rhs(s + h * k3);
    s += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return {s.head(n), s.segment(n, n), s(2 * n)};
}

}  // namespace oracle

namespace detail {

template <class Body>
CheckResult timed(std::string id, std::string name, double budget, Body && body)
{
  CheckResult r;
  r.id = std::move(id);
  r.name = std::move(name);
  r.budget = budget;
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  detail.precision(6);
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception & e) {
    detail << "exception: " << e.what();
    ok = false;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget > 0 && r.seconds >= budget) {
    detail << "; runtime " << r.seconds << " s exceeds budget " << budget << " s";
    ok = false;
  }
  r.passed = ok;
  r.detail = detail.str();
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Acceptance criteria
// ---------------------------------------------------------------------------

/// Appendix golden values for A_k and B_k, k = 1..8, relative tolerance 1e-9.
inline CheckResult criterion_1(std::uint64_t)
{
  return detail::timed("1", "appendix golden values", 1.0, [](std::ostream & out) {
    const auto lat = validate_lattice(1, {1});
    bool ok = true;
    std::vector<std::string> misses;
    for (int k = 1; k <= 8; ++k) {
      const double kd = k;
      const MetricParam A = appendix_A(kd);
      const double sysA = compute_systole(lat, canonicalize(A)).systole;
      const double measA = total_measure(lat, A, VolumeKind::minimal_popp);
      const MetricParam B = appendix_B(kd);
      const double sysB = compute_systole(lat, canonicalize(B)).systole;
      const double measB = total_measure(lat, B, VolumeKind::minimal_popp);
      // the appendix also states the A_k values for rho = 1
      const MetricParam A1 = appendix_A(kd, 1.0);
      const double sysA1 = compute_systole(lat, canonicalize(A1)).systole;
      const double measA1 = total_measure(lat, A1, VolumeKind::minimal_popp);

      const struct
      {
        const char * what;
        double got, want;
      } rows[] = {{"sys(A_k)", sysA, 1 / kd},
                  {"measure(A_k)", measA, std::pow(kd, -4) / std::sqrt(2.0)},
                  {"sys(A_k, rho=1)", sysA1, 1 / kd},
                  {"measure(A_k, rho=1)", measA1, std::pow(kd, -4) / std::sqrt(2.0)},
                  {"sys(B_k)", sysB, kd},
                  {"measure(B_k)", measB, kd * kd * kd}};
      for (const auto & row : rows) {
        if (rel_err(row.got, row.want) > 1e-9) {
          ok = false;
          std::ostringstream m;
          m.precision(12);
          m << row.what << " at k=" << k << ": got " << row.got << ", expected " << row.want;
          misses.push_back(m.str());
        }
      }
    }
    if (ok) {
      out << "48 values within 1e-9";
    } else {
      out << misses.size() << " mismatches: ";
      for (std::size_t i = 0; i < misses.size(); ++i) out << (i ? "; " : "") << misses[i];
      out << " (B_1 has rho = 1 = 1/rho and delta = sqrt 2 > 1, so the minimal Popp branch is 1/sqrt 2)";
    }
    return ok;
  });
}

/// delta = sqrt(2 sum d^2) and |det A~| = prod d on 200 random metrics, n in {1, 2, 3}.
inline CheckResult criterion_2(std::uint64_t seed)
{
  return detail::timed("2", "delta / determinant identities", 5.0, [seed](std::ostream & out) {
    Rng rng(seed ^ 0x2222);
    double worst_delta = 0, worst_det = 0, worst_spec = 0;
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + t % 3;
      const MetricParam m(random_matrix(rng, 2 * n, -3, 3, 0.1), 0.0);
      const CanonicalForm cf = canonicalize(m);
      const double delta = m.structure_matrix().norm();
      worst_delta = std::max(worst_delta, rel_err(std::sqrt(2 * cf.d.squaredNorm()), delta));
      worst_det = std::max(worst_det, rel_err(cf.d.prod(), m.abs_det()));
      const Vec spec = oracle::invariants_from_spectrum(m.A_tilde());
      worst_spec = std::max(worst_spec, ((spec - cf.d).cwiseAbs().array() / spec.array()).maxCoeff());
    }
    out << "max rel err: delta " << worst_delta << ", det " << worst_det << ", d vs complex spectrum " << worst_spec;
    return worst_delta <= 1e-9 && worst_det <= 1e-9 && worst_spec <= 1e-9;
  });
}

/// Random canonical forms for the distance checks; half with rho = 0.
inline CanonicalForm random_canonical(Rng & rng, int n, bool riemannian)
{
  const double rho = riemannian ? uniform(rng, 0.1, 2.0) : 0.0;
  return canonicalize(MetricParam(random_matrix(rng, 2 * n, -2, 2, 0.2), rho));
}

/// Shooting against the closed vertical distance at 8 values of p on 20 canonical forms.
inline CheckResult criterion_3(std::uint64_t seed)
{
  return detail::timed("3", "vertical distance by shooting", 30.0, [seed](std::ostream & out) {
    Rng rng(seed ^ 0x3333);
    double worst_value = 0, worst_len = 0, worst_end = 0;
    int published_band = 0;
    for (int t = 0; t < 20; ++t) {
      const int n = 1 + t % 2;
      const CanonicalForm cf = random_canonical(rng, n, t % 4 >= 2);
      for (double p : {0.1, -0.1, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0}) {
        GroupPoint target = GroupPoint::identity(n);
        target.z = p;
        const DistanceResult r = distance_group(cf, target);
        const double formula = vertical_distance(cf, p);
        worst_value = std::max(worst_value, rel_err(r.value, formula));
        worst_len = std::max(worst_len, rel_err(geodesic_length(*r.witness_covector, cf, *r.witness_time), formula));
        const GeodesicSample end = geodesic_point(cf, *r.witness_covector, *r.witness_time);
        worst_end = std::max(worst_end, std::abs(end.coords.z - p) + end.coords.horizontal().cwiseAbs().maxCoeff());
        const double dn = cf.d_max(), rho = cf.rho;
        if (rho > 0 && std::abs(p) * dn > kPi * rho * rho && std::abs(p) * dn < 2 * kPi * rho * rho) ++published_band;
      }
    }
    out << "max rel err value " << worst_value << ", witness length " << worst_len << ", endpoint " << worst_end
        << "; " << published_band << "/160 samples lie where the published threshold pi rho^2 < |p| d_n < 2 pi rho^2 "
        << "would give a loop that does not exist";
    return worst_value <= 1e-6 && worst_len <= 1e-6 && worst_end <= 1e-8;
  });
}

/// Second-order convergence of the state-equation residual on 20 random geodesics.
inline CheckResult criterion_4(std::uint64_t seed)
{
  return detail::timed("4", "Hamiltonian residual convergence", 10.0, [seed](std::ostream & out) {
    Rng rng(seed ^ 0x4444);
    double lo = kInf, hi = 0, worst_res = 0;
    for (int t = 0; t < 20; ++t) {
      const int n = 1 + t % 3;
      const CanonicalForm cf = random_canonical(rng, n, t % 2 == 1);
      Covector cov{Vec(n), Vec(n), std::copysign(uniform(rng, 0.3, 1.5), uniform(rng, -1, 1))};
      for (int i = 0; i < n; ++i) {
        cov.p_x(i) = uniform(rng, -1, 1);
        cov.p_y(i) = uniform(rng, -1, 1);
      }
      const double T = 2.0;
      const double r1 = hamiltonian_residual(cf, cov, T, 400);
      const double r2 = hamiltonian_residual(cf, cov, T, 800);
      const double ratio = r1 / r2;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      worst_res = std::max(worst_res, r2);
    }
    out << "residual ratio under step halving in [" << lo << ", " << hi << "], max fine residual " << worst_res;
    return lo >= 3.5 && hi <= 4.5;
  });
}

/// Systolic inequality on 200 random rho = 0 instances and the vertical ratio identity for n = 1.
inline CheckResult criterion_5(std::uint64_t seed)
{
  return detail::timed("5", "systolic inequality", 60.0, [seed](std::ostream & out) {
    Rng rng(seed ^ 0x5555);
    int holds = 0, holds_pub = 0, total = 0;
    double worst_margin = kInf;
    double worst_identity = 0, observed_factor = 0;
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + t % 2;
      std::vector<long long> r;
      if (n == 1) {
        r = {uniform_int(rng, 1, 20)};
      } else {
        const long long r1 = uniform_int(rng, 1, 4);
        r = {r1, r1 * uniform_int(rng, 1, 4)};
      }
      const LatticeParam lat = validate_lattice(n, r);
      const MetricParam m(random_matrix(rng, 2 * n, -3, 3, 0.1), 0.0);
      const SystoleReport rep = systolic_bound(lat, m);
      ++total;
      holds += rep.holds;
      holds_pub += rep.holds_with_published;
      worst_margin = std::min(worst_margin, rep.bound_rhs / rep.systole);
      if (n == 1) {
        const double ratio = rep.s2 / std::pow(rep.measure, 0.25);
        const double want = 2 * std::sqrt(kPi) * std::pow(static_cast<double>(r[0]), -0.25);
        worst_identity = std::max(worst_identity, rel_err(ratio, want));
        observed_factor = ratio / want;
      }
    }
    const bool part_a = holds == total;
    const bool part_b = worst_identity <= 1e-9;
    out << "(a) inequality holds on " << holds << "/" << total << " with the computed C_n (min rhs/sys "
        << worst_margin << "); published C_n holds on " << holds_pub << "/" << total
        << ". (b) s2/measure^(1/4) vs 2 sqrt(pi) r^(-1/4): max rel err " << worst_identity << ", observed factor "
        << observed_factor << " = 2^(1/8) since delta = sqrt(2) d_1 for n = 1";
    return part_a && part_b;
  });
}

/// Case threshold 4 pi C~_2^2 and attainment of the case-(2) constant at r = 100.
inline CheckResult criterion_6(std::uint64_t)
{
  return detail::timed("6", "3-dimensional classification", 5.0, [](std::ostream & out) {
    bool threshold_ok = true;
    for (long long r = 1; r <= 30; ++r) {
      const ClassificationReport c = classify_3d(r, MetricParam(Mat::Identity(2, 2), 0.0));
      const std::string want = r <= 14 ? "1" : "2";
      if (c.case_label != want) threshold_ok = false;
    }
    // A~ = diag(100, 1): base torus is the unit square, d = 100, s1 = 1 > s2 = sqrt(pi) / 5
    Mat A = Mat::Identity(2, 2);
    A(0, 0) = 100;
    const ClassificationReport c = classify_3d(100, MetricParam(A, 0.0));
    const double gap = rel_err(c.ratio, c.C_r);
    out << "threshold " << c.threshold << " splits r<=14 / r>=15: " << (threshold_ok ? "yes" : "no")
        << "; r=100 instance s1=" << c.s1 << " s2=" << c.s2 << " ratio " << c.ratio << " vs C_r " << c.C_r
        << " (rel gap " << gap << "); sharp constant 2^(1/8) C_r = " << c.sharp_case2 << " attained to "
        << rel_err(c.ratio, c.sharp_case2);
    return threshold_ok && c.case_label == "2" && c.s1 >= c.s2 && gap <= 1e-6;
  });
}

/// Random well-conditioned Gram matrix of dimension dim.
inline Mat random_gram(Rng & rng, int dim)
{
  Mat M = Mat::Identity(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) M(i, j) += uniform(rng, -0.6, 0.6);
  }
  return uniform(rng, 0.5, 2.0) * M.transpose() * M;
}

/// Enumeration against exhaustive search on 100 random Gram matrices.
inline CheckResult criterion_7(std::uint64_t seed)
{
  return detail::timed("7", "shortest vector vs brute force", 30.0, [seed](std::ostream & out) {
    Rng rng(seed ^ 0x7777);
    int agree = 0, witness_agree = 0;
    for (int t = 0; t < 100; ++t) {
      const int dim = 2 * (1 + t % 3);
      Mat G;
      do {
        G = random_gram(rng, dim);
      } while (G.ldlt().vectorD().minCoeff() < 1e-3 * G.diagonal().maxCoeff());
      const auto fast = lattice::shortest_vector(G);
      const auto slow = oracle::brute_force_svp(G);
      agree += rel_err(fast.norm, slow.norm) <= 1e-12;
      witness_agree += fast.v == slow.v;
    }
    out << "length agrees on " << agree << "/100, integer witness identical on " << witness_agree << "/100";
    return agree == 100 && witness_agree == 100;
  });
}

/// Collapse verdicts for A_k and B_k and the four-segment bound on A~ = diag(r/D, 1/D), r = k^2.
inline CheckResult criterion_8(std::uint64_t)
{
  return detail::timed("8", "collapse dichotomy", 10.0, [](std::ostream & out) {
    std::vector<SequenceEntry> a_seq, b_seq;
    const auto lat1 = validate_lattice(1, {1});
    for (int k = 1; k <= 10; ++k) {
      a_seq.push_back({lat1, appendix_A(k), k});
      b_seq.push_back({lat1, appendix_B(k), k});
    }
    const SequenceReport ra = classify_sequence(a_seq, 10.0);
    const SequenceReport rb = classify_sequence(b_seq, 10.0);
    double fiber_err = 0;
    for (int k = 1; k <= 10; ++k) {
      fiber_err = std::max(fiber_err, rel_err(ra.fiber_diams[static_cast<std::size_t>(k - 1)], std::sqrt(2 * kPi) / k));
    }
    auto has = [](const SequenceReport & r, const char * c) {
      return std::find(r.dichotomy_case.begin(), r.dichotomy_case.end(), c) != r.dichotomy_case.end();
    };
    const bool a_ok = ra.verdict == Verdict::collapsed && has(ra, "a") && has(ra, "b") && fiber_err <= 1e-9;
    const bool b_ok = rb.verdict == Verdict::non_collapsed;

    const double D = 1.0;
    int dominated = 0;
    double worst = 0;
    for (int k = 1; k <= 10; ++k) {
      const long long r = static_cast<long long>(k) * k;
      Mat A = Mat::Identity(2, 2) / D;
      A(0, 0) = static_cast<double>(r) / D;
      const CanonicalForm cf = canonicalize(MetricParam(A, 0.0));
      const DivergenceBound b = lattice_divergence_bound(r, cf, D);
      dominated += b.fiber_diameter <= b.bound && b.fiber_diameter <= b.path_length;
      worst = std::max(worst, b.fiber_diameter / b.bound);
    }
    std::string cases;
    for (const auto & c : ra.dichotomy_case) cases += (cases.empty() ? "" : ",") + c;
    out << "A_k: " << to_string(ra.verdict) << ", cases {" << cases << "}, fiber max rel err "
        << fiber_err << "; B_k: " << to_string(rb.verdict) << "; four-segment bound dominates on " << dominated
        << "/10 (max fiber/bound " << worst << ")";
    return a_ok && b_ok && dominated == 10;
  });
}

/// dist_torus <= dist_quotient <= dist_torus + 2 fiber on 50 pairs for 5 random instances.
inline CheckResult criterion_9(std::uint64_t seed)
{
  return detail::timed("9", "projection sandwich", 120.0, [seed](std::ostream & out) {
    Rng rng(seed ^ 0x9999);
    double lower = 0, upper = 0, tight = 0;
    int uncertified = 0;
    for (int inst = 0; inst < 5; ++inst) {
      const int n = inst < 3 ? 1 : 2;
      std::vector<long long> r = n == 1 ? std::vector<long long>{uniform_int(rng, 1, 5)}
                                        : std::vector<long long>{1, uniform_int(rng, 1, 3)};
      const LatticeParam lat = validate_lattice(n, r);
      const CanonicalForm cf = random_canonical(rng, n, inst % 2 == 1);
      std::vector<std::pair<GroupPoint, GroupPoint>> pairs;
      for (int k = 0; k < 50; ++k) {
        auto point = [&]() {
          GroupPoint p = GroupPoint::identity(n);
          for (int i = 0; i < n; ++i) {
            p.x(i) = uniform(rng, 0, static_cast<double>(r[static_cast<std::size_t>(i)]));
            p.y(i) = uniform(rng, 0, 1);
          }
          p.z = uniform(rng, 0, 1);
          return p;
        };
        GroupPoint p = point();
        GroupPoint q = point();
        pairs.emplace_back(p, q);
      }
      const ProjectionReport rep = projection_comparison(lat, cf, pairs);
      lower = std::max(lower, rep.max_lower_violation);
      upper = std::max(upper, rep.max_upper_violation);
      tight = std::max(tight, rep.max_tight_violation);
      uncertified += rep.uncertified;
    }
    out << "max violation: lower " << lower << ", upper (2 fiber) " << upper << ", upper (1 fiber) " << tight
        << "; uncertified quotient distances " << uncertified;
    return lower <= 1e-6 && upper <= 1e-6 && uncertified == 0;
  });
}

inline CheckResult run_criterion(int id, std::uint64_t seed)
{
  switch (id) {
    case 1: return criterion_1(seed);
    case 2: return criterion_2(seed);
    case 3: return criterion_3(seed);
    case 4: return criterion_4(seed);
    case 5: return criterion_5(seed);
    case 6: return criterion_6(seed);
    case 7: return criterion_7(seed);
    case 8: return criterion_8(seed);
    case 9: return criterion_9(seed);
    default: throw InvalidInput("unknown criterion " + std::to_string(id), "/criterion");
  }
}

// ---------------------------------------------------------------------------
// Property checks
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> property_checks(std::uint64_t seed)
{
  std::vector<CheckResult> out;

  out.push_back(detail::timed("P1", "canonicalize idempotent, fingerprint invariant under orthogonal frames", 0,
                              [seed](std::ostream & o) {
                                Rng rng(seed ^ 0x1001);
                                double idem = 0, inv = 0;
                                for (int t = 0; t < 100; ++t) {
                                  const int n = 1 + t % 3;
                                  const MetricParam m(random_matrix(rng, 2 * n, -3, 3, 0.1), uniform(rng, 0, 1));
                                  const CanonicalForm cf = canonicalize(m);
                                  const CanonicalForm again = canonicalize(MetricParam(cf.A_tilde_canonical, cf.rho));
                                  idem = std::max(idem, (again.d - cf.d).cwiseAbs().maxCoeff() / cf.d_max());
                                  const auto f1 = fingerprint(m);
                                  const auto f2 = fingerprint(MetricParam(m.A_tilde() * random_orthogonal(rng, 2 * n), m.rho()));
                                  inv = std::max({inv, ((f1.d - f2.d).cwiseAbs().array() / f1.d.array()).maxCoeff(),
                                                  rel_err(f2.delta, f1.delta), rel_err(f2.abs_det, f1.abs_det)});
                                }
                                o << "re-canonicalization drift " << idem << ", fingerprint drift " << inv;
                                return idem <= 1e-12 && inv <= 1e-9;
                              }));

  out.push_back(detail::timed("P2", "group law associative, commutator realizes the bracket", 0, [seed](std::ostream & o) {
    Rng rng(seed ^ 0x1002);
    double worst = 0;
    auto rp = [&](int n) {
      GroupPoint p = GroupPoint::identity(n);
      for (int i = 0; i < n; ++i) {
        p.x(i) = uniform(rng, -2, 2);
        p.y(i) = uniform(rng, -2, 2);
      }
      p.z = uniform(rng, -2, 2);
      return p;
    };
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + t % 3;
      const GroupPoint a = rp(n), b = rp(n), c = rp(n);
      const GroupPoint l = group_mul(group_mul(a, b), c);
      const GroupPoint r = group_mul(a, group_mul(b, c));
      worst = std::max({worst, (l.horizontal() - r.horizontal()).cwiseAbs().maxCoeff(), std::abs(l.z - r.z)});
    }
    bool bracket = true;
    for (int n = 1; n <= 3; ++n) {
      for (int i = 0; i < n; ++i) {
        GroupPoint X = GroupPoint::identity(n), Y = GroupPoint::identity(n);
        X.x(i) = 1;
        Y.y(i) = 1;
        const GroupPoint c = group_mul(group_mul(group_mul(X, Y), group_inverse(X)), group_inverse(Y));
        bracket = bracket && c.horizontal().isZero(0) && c.z == 1.0;
      }
    }
    o << "associativity defect " << worst << ", commutator exact: " << (bracket ? "yes" : "no");
    return worst <= 1e-12 && bracket;
  }));

  out.push_back(detail::timed("P3", "closed-form geodesic matches RK4 integration, constant speed", 0, [seed](std::ostream & o) {
    Rng rng(seed ^ 0x1003);
    double worst = 0, speed = 0;
    for (int t = 0; t < 20; ++t) {
      const int n = 1 + t % 3;
      const CanonicalForm cf = random_canonical(rng, n, t % 2 == 0);
      Covector cov{Vec(n), Vec(n), uniform(rng, -1.5, 1.5)};
      for (int i = 0; i < n; ++i) {
        cov.p_x(i) = uniform(rng, -1, 1);
        cov.p_y(i) = uniform(rng, -1, 1);
      }
      const double T = 3.0;
      const FrameCoords ode = oracle::integrate_geodesic(cf, cov, T, 4000);
      const FrameCoords cls = geodesic_point(cf, cov, T).coords;
      worst = std::max({worst, (ode.x - cls.x).cwiseAbs().maxCoeff(), (ode.y - cls.y).cwiseAbs().maxCoeff(),
                        std::abs(ode.z - cls.z)});
      const double h = 1e-5;
      for (int k = 1; k <= 50; ++k) {
        const double tk = T * k / 51.0;
        const FrameCoords a = geodesic_point(cf, cov, tk + h).coords;
        const FrameCoords b = geodesic_point(cf, cov, tk - h).coords;
        const FrameCoords m = geodesic_point(cf, cov, tk).coords;
        const Vec v = (a.horizontal() - b.horizontal()) / (2 * h);
        double vert = (a.z - b.z) / (2 * h);
        for (int i = 0; i < n; ++i) vert -= 0.5 * cf.d(i) * (m.x(i) * v(n + i) - m.y(i) * v(i));
        // |Z| = 1 / rho
        const double sp = std::sqrt(v.squaredNorm() + (cf.rho > 0 ? vert * vert / (cf.rho * cf.rho) : 0.0));
        speed = std::max(speed, rel_err(sp, geodesic_speed(cf, cov)));
      }
    }
    o << "max closed-form vs RK4 gap " << worst << ", max speed deviation " << speed;
    return worst <= 1e-9 && speed <= 1e-6;
  }));

  out.push_back(detail::timed("P4", "Popp routes agree, minimal Popp below both", 0, [seed](std::ostream & o) {
    Rng rng(seed ^ 0x1004);
    bool ok = true;
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + t % 3;
      const MetricParam m(random_matrix(rng, 2 * n, -3, 3, 0.1), t % 3 == 0 ? 0.0 : uniform(rng, 0.05, 5));
      const double popp = popp_coeff(m);  // throws if the two routes disagree beyond 1e-9
      const double minp = minimal_popp_coeff(m);
      ok = ok && minp <= popp;
      if (m.rho() > 0) ok = ok && minp <= riemannian_coeff(m);
      if (m.rho() == 0) ok = ok && minp == popp;
    }
    o << "200 metrics checked";
    return ok;
  }));

  out.push_back(detail::timed("P5", "scale invariance of sys / measure^(1/(2n+2))", 0, [seed](std::ostream & o) {
    Rng rng(seed ^ 0x1005);
    double worst = 0;
    for (int t = 0; t < 40; ++t) {
      const int n = 1 + t % 2;
      const LatticeParam lat = validate_lattice(n, n == 1 ? std::vector<long long>{2} : std::vector<long long>{1, 2});
      const Mat A = random_matrix(rng, 2 * n, -2, 2, 0.2);
      const double c = uniform(rng, 1.5, 4);
      const auto r1 = systolic_bound(lat, MetricParam(A, 0));
      const auto r2 = systolic_bound(lat, MetricParam(c * A, 0));
      worst = std::max(worst, rel_err(r2.systole / std::pow(r2.measure, 1.0 / (2 * n + 2)),
                                      r1.systole / std::pow(r1.measure, 1.0 / (2 * n + 2))));
      worst = std::max(worst, rel_err(r2.systole * c, r1.systole));
    }
    o << "max relative drift " << worst;
    return worst <= 1e-9;
  }));

  out.push_back(detail::timed("P6", "fixed-exponent ratios diverge for A_k and B_k", 0, [](std::ostream & o) {
    const auto lat = validate_lattice(1, {1});
    double prevA = 0, prevB = 0;
    bool mono = true;
    for (int k = 1; k <= 20; ++k) {
      const MetricParam A = appendix_A(k), B = appendix_B(k);
      const double ra = compute_systole(lat, canonicalize(A)).systole /
                        std::pow(total_measure(lat, A, VolumeKind::minimal_popp), 1.0 / 3);
      const double rb = compute_systole(lat, canonicalize(B)).systole /
                        std::pow(total_measure(lat, B, VolumeKind::minimal_popp), 1.0 / 4);
      if (k > 1) mono = mono && ra > prevA && rb > prevB;
      prevA = ra;
      prevB = rb;
    }
    o << "at k=20: A ratio " << prevA << ", B ratio " << prevB;
    return mono;
  }));

  out.push_back(detail::timed("P7", "horizontal targets and witnesses", 0, [seed](std::ostream & o) {
    Rng rng(seed ^ 0x1007);
    double worst = 0, end = 0;
    for (int t = 0; t < 50; ++t) {
      const int n = 1 + t % 3;
      const CanonicalForm cf = random_canonical(rng, n, t % 2 == 0);
      GroupPoint g = GroupPoint::identity(n);
      for (int i = 0; i < n; ++i) {
        g.x(i) = uniform(rng, -2, 2);
        g.y(i) = uniform(rng, -2, 2);
      }
      const DistanceResult r = distance_group(cf, g);
      worst = std::max(worst, rel_err(r.value, norm_A(cf, g.horizontal())));
      g.z = uniform(rng, -2, 2);
      end = std::max(end, distance_group(cf, g).endpoint_error);
    }
    o << "horizontal rel err " << worst << ", general-target endpoint mismatch " << end;
    return worst <= 1e-8 && end <= 1e-8;
  }));

  return out;
}

inline std::vector<CheckResult> run_all(std::uint64_t seed)
{
  std::vector<CheckResult> out;
  for (int i = 1; i <= 9; ++i) out.push_back(run_criterion(i, seed));
  for (auto & p : property_checks(seed)) out.push_back(std::move(p));
  return out;
}

}  // namespace heisgeo::selftest
