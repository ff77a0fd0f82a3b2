#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "heisgeo/collapse.hpp"
#include "heisgeo/geodesics.hpp"
#include "heisgeo/metric.hpp"
#include "heisgeo/moduli.hpp"
#include "heisgeo/systole.hpp"
#include "heisgeo/volumes.hpp"

namespace heisgeo::io {

using json = nlohmann::ordered_json;

inline constexpr const char * kSchemaVersion = "heisgeo.v1";

// ---------- scalars ----------

/// Non-finite values are written as the strings "inf" / "-inf" / "nan".
inline json number(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline std::string child(const std::string & ptr, const std::string & key) { return ptr + "/" + key; }
inline std::string child(const std::string & ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline const json & field(const json & j, const std::string & key, const std::string & ptr)
{
  if (!j.is_object()) throw InvalidInput("expected an object", ptr);
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidInput("missing field '" + key + "'", child(ptr, key));
  return *it;
}

inline double get_double(const json & j, const std::string & ptr)
{
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw InvalidInput("expected a number", ptr);
}

inline long long get_int(const json & j, const std::string & ptr)
{
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  throw InvalidInput("expected an integer", ptr);
}

inline bool get_bool(const json & j, const std::string & ptr)
{
  if (!j.is_boolean()) throw InvalidInput("expected a boolean", ptr);
  return j.get<bool>();
}

inline std::string get_string(const json & j, const std::string & ptr)
{
  if (!j.is_string()) throw InvalidInput("expected a string", ptr);
  return j.get<std::string>();
}

// ---------- vectors and matrices ----------

inline json vec(const Vec & v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

inline json ivec(const IntVec & v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Row-major nested arrays.
inline json mat(const Mat & m)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

inline Vec get_vec(const json & j, const std::string & ptr, Eigen::Index expected = -1)
{
  if (!j.is_array()) throw InvalidInput("expected an array of numbers", ptr);
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected) {
    throw DimensionMismatch("expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()), ptr);
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_double(j[i], child(ptr, i));
  return v;
}

inline IntVec get_ivec(const json & j, const std::string & ptr)
{
  if (!j.is_array()) throw InvalidInput("expected an array of integers", ptr);
  IntVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_int(j[i], child(ptr, i));
  return v;
}

inline Mat get_mat(const json & j, const std::string & ptr)
{
  if (!j.is_array() || j.empty()) throw InvalidInput("expected a non-empty array of rows", ptr);
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw InvalidInput("expected an array of numbers", child(ptr, std::size_t{0}));
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Vec row = get_vec(j[i], child(ptr, i), static_cast<Eigen::Index>(cols));
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

// ---------- moduli ----------

inline json to_json(const LatticeParam & l)
{
  return {{"n", l.n}, {"r", l.r}};
}

inline LatticeParam parse_lattice(const json & j, const std::string & ptr = "")
{
  const long long n = get_int(field(j, "n", ptr), child(ptr, "n"));
  const json & r = field(j, "r", ptr);
  if (!r.is_array()) throw InvalidInput("expected an array of integers", child(ptr, "r"));
  std::vector<long long> rv;
  for (std::size_t i = 0; i < r.size(); ++i) rv.push_back(get_int(r[i], child(child(ptr, "r"), i)));
  try {
    return validate_lattice(static_cast<int>(n), rv);
  } catch (Error & e) {
    e.prefix_field(ptr);
    throw;
  }
}

inline json to_json(const MetricParam & m)
{
  return {{"n", m.n()}, {"A_tilde", mat(m.A_tilde())}, {"rho", number(m.rho())}};
}

/// Reads {"A_tilde", "rho"} and, when present, checks "n" against A_tilde.
inline MetricParam parse_metric(const json & j, const std::string & ptr = "")
{
  const Mat A = get_mat(field(j, "A_tilde", ptr), child(ptr, "A_tilde"));
  const double rho = get_double(field(j, "rho", ptr), child(ptr, "rho"));
  if (j.contains("n")) {
    const long long n = get_int(j["n"], child(ptr, "n"));
    if (A.rows() != 2 * n) {
      throw DimensionMismatch("A_tilde has " + std::to_string(A.rows()) + " rows, expected 2n = " + std::to_string(2 * n),
                              child(ptr, "A_tilde"));
    }
  }
  try {
    return MetricParam(A, rho);
  } catch (Error & e) {
    e.prefix_field(ptr);
    throw;
  }
}

inline json to_json(const CanonicalForm & cf)
{
  return {{"n", cf.n},
          {"d", vec(cf.d)},
          {"rho", number(cf.rho)},
          {"R_used", mat(cf.R_used)},
          {"A_tilde_canonical", mat(cf.A_tilde_canonical)}};
}

inline CanonicalForm parse_canonical(const json & j, const std::string & ptr = "")
{
  const Vec d = get_vec(field(j, "d", ptr), child(ptr, "d"));
  const double rho = get_double(field(j, "rho", ptr), child(ptr, "rho"));
  const Mat R = get_mat(field(j, "R_used", ptr), child(ptr, "R_used"));
  const Mat A = get_mat(field(j, "A_tilde_canonical", ptr), child(ptr, "A_tilde_canonical"));
  try {
    return make_canonical_form(d, rho, R, A);
  } catch (Error & e) {
    e.prefix_field(ptr);
    throw;
  }
}

/// Accepts either a canonical-form record or a metric record (canonicalized on the fly).
inline CanonicalForm parse_canonical_or_metric(const json & j, const std::string & ptr = "")
{
  if (j.is_object() && j.contains("A_tilde_canonical")) return parse_canonical(j, ptr);
  return canonicalize(parse_metric(j, ptr));
}

inline json to_json(const InvariantFingerprint & f)
{
  return {{"d", vec(f.d)}, {"delta", number(f.delta)}, {"abs_det", number(f.abs_det)}, {"rho", number(f.rho)}};
}

inline InvariantFingerprint parse_fingerprint(const json & j, const std::string & ptr = "")
{
  InvariantFingerprint f;
  f.d = get_vec(field(j, "d", ptr), child(ptr, "d"));
  f.delta = get_double(field(j, "delta", ptr), child(ptr, "delta"));
  f.abs_det = get_double(field(j, "abs_det", ptr), child(ptr, "abs_det"));
  f.rho = get_double(field(j, "rho", ptr), child(ptr, "rho"));
  return f;
}

inline json to_json(const GroupPoint & p)
{
  return {{"x", vec(p.x)}, {"y", vec(p.y)}, {"z", number(p.z)}};
}

inline GroupPoint parse_point(const json & j, const std::string & ptr = "")
{
  GroupPoint p;
  p.x = get_vec(field(j, "x", ptr), child(ptr, "x"));
  p.y = get_vec(field(j, "y", ptr), child(ptr, "y"), p.x.size());
  p.z = get_double(field(j, "z", ptr), child(ptr, "z"));
  if (!p.horizontal().allFinite() || !std::isfinite(p.z)) throw InvalidInput("point coordinates must be finite", ptr);
  return p;
}

inline json to_json(const FrameCoords & c)
{
  return {{"x", vec(c.x)}, {"y", vec(c.y)}, {"z", number(c.z)}};
}

// ---------- geodesics ----------

inline json to_json(const Covector & c)
{
  return {{"p_x", vec(c.p_x)}, {"p_y", vec(c.p_y)}, {"p_z", number(c.p_z)}};
}

inline Covector parse_covector(const json & j, const std::string & ptr = "")
{
  Covector c;
  c.p_x = get_vec(field(j, "p_x", ptr), child(ptr, "p_x"));
  c.p_y = get_vec(field(j, "p_y", ptr), child(ptr, "p_y"), c.p_x.size());
  c.p_z = get_double(field(j, "p_z", ptr), child(ptr, "p_z"));
  if (!c.p_x.allFinite() || !c.p_y.allFinite() || !std::isfinite(c.p_z)) {
    throw InvalidInput("covector entries must be finite", ptr);
  }
  return c;
}

inline json to_json(const GeodesicSample & s)
{
  return {{"t", number(s.t)}, {"coords", to_json(s.coords)}, {"speed", number(s.speed)}};
}

inline GeodesicSample parse_sample(const json & j, const std::string & ptr = "")
{
  GeodesicSample s;
  s.t = get_double(field(j, "t", ptr), child(ptr, "t"));
  const json & c = field(j, "coords", ptr);
  const std::string cp = child(ptr, "coords");
  s.coords.x = get_vec(field(c, "x", cp), child(cp, "x"));
  s.coords.y = get_vec(field(c, "y", cp), child(cp, "y"));
  s.coords.z = get_double(field(c, "z", cp), child(cp, "z"));
  s.speed = get_double(field(j, "speed", ptr), child(ptr, "speed"));
  return s;
}

// ---------- metric ----------

inline DistanceMethod parse_method(const std::string & s, const std::string & ptr)
{
  for (auto m : {DistanceMethod::vertical_formula, DistanceMethod::horizontal_formula, DistanceMethod::shooting,
                 DistanceMethod::quotient_enumeration}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidInput("unknown distance method '" + s + "'", ptr);
}

inline json to_json(const DistanceResult & r)
{
  json j;
  j["value"] = number(r.value);
  j["witness_covector"] = r.witness_covector ? to_json(*r.witness_covector) : json(nullptr);
  j["witness_time"] = r.witness_time ? number(*r.witness_time) : json(nullptr);
  j["method"] = to_string(r.method);
  j["certified"] = r.certified;
  j["endpoint_error"] = number(r.endpoint_error);
  j["gamma"] = r.gamma ? json(*r.gamma) : json(nullptr);
  return j;
}

inline DistanceResult parse_distance(const json & j, const std::string & ptr = "")
{
  DistanceResult r;
  r.value = get_double(field(j, "value", ptr), child(ptr, "value"));
  const json & w = field(j, "witness_covector", ptr);
  if (!w.is_null()) r.witness_covector = parse_covector(w, child(ptr, "witness_covector"));
  const json & t = field(j, "witness_time", ptr);
  if (!t.is_null()) r.witness_time = get_double(t, child(ptr, "witness_time"));
  r.method = parse_method(get_string(field(j, "method", ptr), child(ptr, "method")), child(ptr, "method"));
  r.certified = get_bool(field(j, "certified", ptr), child(ptr, "certified"));
  r.endpoint_error = get_double(field(j, "endpoint_error", ptr), child(ptr, "endpoint_error"));
  const json & g = field(j, "gamma", ptr);
  if (!g.is_null()) {
    const IntVec gv = get_ivec(g, child(ptr, "gamma"));
    r.gamma = std::vector<long long>(gv.data(), gv.data() + gv.size());
  }
  return r;
}

// ---------- systole ----------

inline json to_json(const SystoleReport & s)
{
  return {{"s1", number(s.s1)},
          {"s1_witness", ivec(s.s1_witness)},
          {"s2", number(s.s2)},
          {"systole", number(s.systole)},
          {"measure", number(s.measure)},
          {"torus_constant", number(s.torus_constant)},
          {"constant_used", number(s.constant_used)},
          {"bound_rhs", number(s.bound_rhs)},
          {"holds", s.holds},
          {"equality_gap", number(s.equality_gap)},
          {"published_constant", number(s.published_constant)},
          {"published_rhs", number(s.published_rhs)},
          {"holds_with_published", s.holds_with_published}};
}

inline SystoleReport parse_systole_report(const json & j, const std::string & ptr = "")
{
  auto d = [&](const char * k) { return get_double(field(j, k, ptr), child(ptr, k)); };
  auto b = [&](const char * k) { return get_bool(field(j, k, ptr), child(ptr, k)); };
  SystoleReport s;
  s.s1 = d("s1");
  s.s1_witness = get_ivec(field(j, "s1_witness", ptr), child(ptr, "s1_witness"));
  s.s2 = d("s2");
  s.systole = d("systole");
  s.measure = d("measure");
  s.torus_constant = d("torus_constant");
  s.constant_used = d("constant_used");
  s.bound_rhs = d("bound_rhs");
  s.holds = b("holds");
  s.equality_gap = d("equality_gap");
  s.published_constant = d("published_constant");
  s.published_rhs = d("published_rhs");
  s.holds_with_published = b("holds_with_published");
  return s;
}

inline json to_json(const ClassificationReport & c)
{
  return {{"r", c.r},
          {"threshold", number(c.threshold)},
          {"case", c.case_label},
          {"C_case1", number(c.C_case1)},
          {"C_case2", number(c.C_case2)},
          {"C_r", number(c.C_r)},
          {"s1", number(c.s1)},
          {"s2", number(c.s2)},
          {"systole", number(c.systole)},
          {"measure", number(c.measure)},
          {"ratio", number(c.ratio)},
          {"base_hexagonal", c.base_hexagonal},
          {"equality_condition", c.equality_condition},
          {"attains_bound", c.attains_bound},
          {"sharp_case1", number(c.sharp_case1)},
          {"sharp_case2", number(c.sharp_case2)}};
}

inline ClassificationReport parse_classification(const json & j, const std::string & ptr = "")
{
  auto d = [&](const char * k) { return get_double(field(j, k, ptr), child(ptr, k)); };
  auto b = [&](const char * k) { return get_bool(field(j, k, ptr), child(ptr, k)); };
  ClassificationReport c;
  c.r = get_int(field(j, "r", ptr), child(ptr, "r"));
  c.threshold = d("threshold");
  c.case_label = get_string(field(j, "case", ptr), child(ptr, "case"));
  c.C_case1 = d("C_case1");
  c.C_case2 = d("C_case2");
  c.C_r = d("C_r");
  c.s1 = d("s1");
  c.s2 = d("s2");
  c.systole = d("systole");
  c.measure = d("measure");
  c.ratio = d("ratio");
  c.base_hexagonal = b("base_hexagonal");
  c.equality_condition = b("equality_condition");
  c.attains_bound = b("attains_bound");
  c.sharp_case1 = d("sharp_case1");
  c.sharp_case2 = d("sharp_case2");
  return c;
}

// ---------- collapse ----------

inline json to_json(const SequenceReport & r)
{
  json minima = json::array();
  for (const auto & m : r.successive_minima) minima.push_back(vec(m));
  json measures = json::array();
  json fibers = json::array();
  json ca = json::array();
  json cb = json::array();
  for (double v : r.measures) measures.push_back(number(v));
  for (double v : r.fiber_diams) fibers.push_back(number(v));
  for (double v : r.case_a_series) ca.push_back(number(v));
  for (double v : r.case_b_series) cb.push_back(number(v));
  return {{"k", r.ks},
          {"measures", measures},
          {"fiber_diams", fibers},
          {"case_a_series", ca},
          {"case_b_series", cb},
          {"r_n_series", r.r_n_series},
          {"successive_minima", minima},
          {"diam_bound_used", number(r.diam_bound_used)},
          {"verdict", to_string(r.verdict)},
          {"dichotomy_case", r.dichotomy_case},
          {"limit_torus",
           {{"gram", mat(r.limit_torus.gram)}, {"dimension", r.limit_torus.dimension}, {"kept", r.limit_torus.kept}}}};
}

inline std::vector<double> get_series(const json & j, const std::string & ptr)
{
  const Vec v = get_vec(j, ptr);
  return {v.data(), v.data() + v.size()};
}

inline std::vector<long long> get_int_series(const json & j, const std::string & ptr)
{
  const IntVec v = get_ivec(j, ptr);
  return {v.data(), v.data() + v.size()};
}

inline SequenceReport parse_sequence_report(const json & j, const std::string & ptr = "")
{
  SequenceReport r;
  r.ks = get_int_series(field(j, "k", ptr), child(ptr, "k"));
  r.measures = get_series(field(j, "measures", ptr), child(ptr, "measures"));
  r.fiber_diams = get_series(field(j, "fiber_diams", ptr), child(ptr, "fiber_diams"));
  r.case_a_series = get_series(field(j, "case_a_series", ptr), child(ptr, "case_a_series"));
  r.case_b_series = get_series(field(j, "case_b_series", ptr), child(ptr, "case_b_series"));
  r.r_n_series = get_int_series(field(j, "r_n_series", ptr), child(ptr, "r_n_series"));
  const json & mins = field(j, "successive_minima", ptr);
  for (std::size_t i = 0; i < mins.size(); ++i) r.successive_minima.push_back(get_vec(mins[i], child(child(ptr, "successive_minima"), i)));
  r.diam_bound_used = get_double(field(j, "diam_bound_used", ptr), child(ptr, "diam_bound_used"));
  const std::string v = get_string(field(j, "verdict", ptr), child(ptr, "verdict"));
  if (v == "collapsed") r.verdict = Verdict::collapsed;
  else if (v == "non_collapsed") r.verdict = Verdict::non_collapsed;
  else if (v == "inconclusive") r.verdict = Verdict::inconclusive;
  else throw InvalidInput("unknown verdict '" + v + "'", child(ptr, "verdict"));
  const json & cases = field(j, "dichotomy_case", ptr);
  for (std::size_t i = 0; i < cases.size(); ++i) r.dichotomy_case.push_back(get_string(cases[i], child(child(ptr, "dichotomy_case"), i)));
  const json & lt = field(j, "limit_torus", ptr);
  const std::string lp = child(ptr, "limit_torus");
  r.limit_torus.gram = get_mat(field(lt, "gram", lp), child(lp, "gram"));
  r.limit_torus.dimension = static_cast<int>(get_int(field(lt, "dimension", lp), child(lp, "dimension")));
  for (long long k : get_int_series(field(lt, "kept", lp), child(lp, "kept"))) r.limit_torus.kept.push_back(static_cast<int>(k));
  return r;
}

/// One entry is {"k"?, "n", "r", "A_tilde", "rho"}; k defaults to the 1-based position.
inline std::vector<SequenceEntry> parse_sequence(const json & j, const std::string & ptr = "")
{
  const json & arr = j.is_object() && j.contains("entries") ? j["entries"] : j;
  const std::string ap = j.is_object() && j.contains("entries") ? child(ptr, "entries") : ptr;
  if (!arr.is_array()) throw InvalidInput("expected an array of sequence entries", ap);
  std::vector<SequenceEntry> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ep = child(ap, i);
    const long long k = arr[i].contains("k") ? get_int(arr[i]["k"], child(ep, "k")) : static_cast<long long>(i + 1);
    out.push_back(SequenceEntry{parse_lattice(arr[i], ep), parse_metric(arr[i], ep), k});
  }
  return out;
}

}  // namespace heisgeo::io
