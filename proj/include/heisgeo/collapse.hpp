#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heisgeo/lattice.hpp"
#include "heisgeo/metric.hpp"
#include "heisgeo/parallel.hpp"
#include "heisgeo/volumes.hpp"

namespace heisgeo {

/// dist(e, exp(Z/2)) in H_n, the fiber diameter of Gamma_r \ H_n -> T^{2n}.
inline double fiber_diameter(const CanonicalForm & cf) { return vertical_distance(cf, 0.5); }

struct DivergenceBound
{
  double path_length = 0.0;  ///< sqrt(2 r_n) ||X_n||_A + sqrt(2 / r_n) ||X_{2n}||_A
  double bound = 0.0;        ///< 4 sqrt(2) D / sqrt(r_n)
  double fiber_diameter = 0.0;
};

/**
 * @brief Length of the four-segment path reaching the fiber point exp(Z/2)
 *
 * Requires ||(r_n / 2) X_n||_A <= D and ||X_{2n} / 2||_A <= D.
 */
inline DivergenceBound lattice_divergence_bound(long long r_n, const CanonicalForm & cf, double D)
{
  if (r_n < 1) throw NonPositiveEntry("r_n must be positive", "/r_n");
  if (!(D > 0)) throw NonPositiveEntry("diameter bound D must be positive", "/D");
  const int n = cf.n;
  const double rn = static_cast<double>(r_n);
  const double xn = norm_A(cf, Vec::Unit(2 * n, n - 1));
  const double x2n = norm_A(cf, Vec::Unit(2 * n, 2 * n - 1));

  std::string failed;
  if (rn / 2 * xn > D * (1 + 1e-12)) failed += "||(r_n/2) X_n||_A = " + std::to_string(rn / 2 * xn) + " > D; ";
  if (x2n / 2 > D * (1 + 1e-12)) failed += "||X_2n / 2||_A = " + std::to_string(x2n / 2) + " > D; ";
  if (!failed.empty()) throw HypothesisViolated(failed + "D = " + std::to_string(D));

  DivergenceBound out;
  out.path_length = std::sqrt(2 * rn) * xn + std::sqrt(2 / rn) * x2n;
  out.bound = 4 * std::sqrt(2.0) * D / std::sqrt(rn);
  out.fiber_diameter = fiber_diameter(cf);
  if (out.path_length > out.bound * (1 + 1e-12)) {
    throw NumericalInconsistency("four-segment path exceeds 4 sqrt(2) D / sqrt(r_n)");
  }
  if (out.fiber_diameter > out.path_length * (1 + 1e-12)) {
    throw NumericalInconsistency("fiber diameter exceeds the four-segment path length");
  }
  return out;
}

/// Flat distance between the projections of p and q on the base torus.
inline double torus_distance(const LatticeParam & lat, const CanonicalForm & cf, const GroupPoint & p,
                             const GroupPoint & q)
{
  const int n = cf.n;
  const Vec s = q.horizontal() - p.horizontal();
  Vec center = -s;
  for (int i = 0; i < n; ++i) center(i) /= static_cast<double>(lat.r[static_cast<std::size_t>(i)]);
  return lattice::closest_vector(base_torus_gram(lat, cf), center).norm;
}

struct SequenceEntry
{
  LatticeParam lat;
  MetricParam m;
  long long k = 0;
};

enum class Verdict { collapsed, non_collapsed, inconclusive };

inline const char * to_string(Verdict v)
{
  switch (v) {
    case Verdict::collapsed: return "collapsed";
    case Verdict::non_collapsed: return "non_collapsed";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct LimitTorus
{
  Mat gram;        ///< LLL-reduced Gram matrix of the last entry's base torus
  int dimension = 0;
  std::vector<int> kept;  ///< indices of the successive minima that survive
};

struct SequenceReport
{
  std::vector<long long> ks;
  std::vector<double> measures;
  std::vector<double> fiber_diams;
  std::vector<double> case_a_series;   ///< min{1/|rho|, 1/delta}
  std::vector<double> case_b_series;   ///< 1/|det A~|
  std::vector<long long> r_n_series;
  std::vector<Vec> successive_minima;
  double diam_bound_used = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> dichotomy_case;  ///< subset of {"a", "b", "lattice_divergence"}
  LimitTorus limit_torus;
};

/// Last ceil(N/2) values strictly decreasing and the final one at most 0.1 x the first.
inline bool tends_to_zero(const std::vector<double> & v)
{
  const std::size_t N = v.size();
  if (N < 2) return false;
  const std::size_t start = N - (N + 1) / 2;
  for (std::size_t i = start + 1; i < N; ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return std::isfinite(v.front()) && v.back() <= 0.1 * v.front() * (1 + 1e-12);
}

inline bool tail_decreasing(const std::vector<double> & v)
{
  const std::size_t N = v.size();
  const std::size_t start = N - (N + 1) / 2;
  for (std::size_t i = start + 1; i < N; ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return N >= 2;
}

/// Ratio of the smallest kept minimum to the largest below which a direction is dropped.
inline constexpr double kDimDrop = 1e-3;

/**
 * @brief Measure-collapse classification of a sequence of compact Heisenberg manifolds
 *
 * Verdict is collapsed when both the minimal-Popp measure and the fiber
 * diameter tend to zero, non_collapsed when the measure does not decrease, and
 * inconclusive otherwise.
 */
inline SequenceReport classify_sequence(const std::vector<SequenceEntry> & entries, double D)
{
  if (entries.size() < 3) throw TooFewEntries("classify_sequence needs at least 3 entries", "/entries");
  if (!(D > 0)) throw NonPositiveEntry("diameter bound must be positive", "/diameter_bound");
  const int n = entries.front().m.n();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].m.n() != n || entries[i].lat.n != n) {
      throw MixedDimension("entry " + std::to_string(i) + " has a different n", "/entries/" + std::to_string(i));
    }
  }

  struct PerEntry
  {
    double measure, fiber, case_a, case_b;
    Vec minima;
    Mat reduced;
  };
  const auto rows = parallel_map(entries.size(), [&](std::size_t i) {
    const SequenceEntry & e = entries[i];
    const CanonicalForm cf = canonicalize(e.m);
    const double delta = std::sqrt(2.0 * cf.d.squaredNorm());
    PerEntry p;
    p.measure = total_measure(e.lat, e.m, VolumeKind::minimal_popp);
    p.fiber = fiber_diameter(cf);
    p.case_a = std::min(e.m.rho() > 0 ? 1.0 / e.m.rho() : kInf, 1.0 / delta);
    p.case_b = 1.0 / e.m.abs_det();
    const Mat G = base_torus_gram(e.lat, cf);
    p.minima = lattice::successive_minima(G);
    p.reduced = lattice::lll(G).gram;
    return p;
  });

  SequenceReport rep;
  rep.diam_bound_used = D;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    rep.ks.push_back(entries[i].k);
    rep.measures.push_back(rows[i].measure);
    rep.fiber_diams.push_back(rows[i].fiber);
    rep.case_a_series.push_back(rows[i].case_a);
    rep.case_b_series.push_back(rows[i].case_b);
    rep.r_n_series.push_back(entries[i].lat.last());
    rep.successive_minima.push_back(rows[i].minima);
  }

  const bool measure_zero = tends_to_zero(rep.measures);
  const bool fiber_zero = tends_to_zero(rep.fiber_diams);
  if (measure_zero && fiber_zero) {
    rep.verdict = Verdict::collapsed;
  } else if (measure_zero || tail_decreasing(rep.measures)) {
    rep.verdict = Verdict::inconclusive;
  } else {
    rep.verdict = Verdict::non_collapsed;
  }

  if (tends_to_zero(rep.case_a_series)) rep.dichotomy_case.emplace_back("a");
  if (tends_to_zero(rep.case_b_series)) rep.dichotomy_case.emplace_back("b");
  {
    std::vector<double> inv_rn;
    for (long long r : rep.r_n_series) inv_rn.push_back(1.0 / static_cast<double>(r));
    if (tends_to_zero(inv_rn)) rep.dichotomy_case.emplace_back("lattice_divergence");
  }

  const int dim = 2 * n;
  const Vec & last = rep.successive_minima.back();
  const double largest = last.maxCoeff();
  rep.limit_torus.gram = rows.back().reduced;
  for (int j = 0; j < dim; ++j) {
    std::vector<double> series;
    for (const auto & mins : rep.successive_minima) series.push_back(mins(j));
    const bool tiny = last(j) < kDimDrop * largest;
    if (!tiny && !tends_to_zero(series)) rep.limit_torus.kept.push_back(j);
  }
  rep.limit_torus.dimension = static_cast<int>(rep.limit_torus.kept.size());
  return rep;
}

struct PairComparison
{
  double torus = 0.0;
  double quotient = 0.0;
  bool certified = true;
};

struct ProjectionReport
{
  double fiber_diameter = 0.0;
  std::vector<PairComparison> pairs;
  double max_lower_violation = 0.0;  ///< max(dist_torus - dist_quotient, 0)
  double max_upper_violation = 0.0;  ///< max(dist_quotient - dist_torus - 2 fiber, 0)
  double max_tight_violation = 0.0;  ///< max(dist_quotient - dist_torus - fiber, 0)
  int uncertified = 0;
};

/// Checks dist_torus <= dist_quotient <= dist_torus + 2 fiber_diameter on each pair.
inline ProjectionReport projection_comparison(const LatticeParam & lat, const CanonicalForm & cf,
                                              const std::vector<std::pair<GroupPoint, GroupPoint>> & samples)
{
  ProjectionReport rep;
  rep.fiber_diameter = fiber_diameter(cf);
  rep.pairs = parallel_map(samples.size(), [&](std::size_t i) {
    const auto & [p, q] = samples[i];
    const DistanceResult dq = distance_quotient(lat, cf, p, q);
    return PairComparison{torus_distance(lat, cf, p, q), dq.value, dq.certified};
  });
  for (const auto & pc : rep.pairs) {
    rep.max_lower_violation = std::max(rep.max_lower_violation, pc.torus - pc.quotient);
    rep.max_upper_violation = std::max(rep.max_upper_violation, pc.quotient - pc.torus - 2 * rep.fiber_diameter);
    rep.max_tight_violation = std::max(rep.max_tight_violation, pc.quotient - pc.torus - rep.fiber_diameter);
    if (!pc.certified) ++rep.uncertified;
  }
  return rep;
}

}  // namespace heisgeo
