// heisgeo: command-line front end with JSON in / JSON out.
//
// Exit status: 0 success, 1 failed assertion (JSON failure list on stdout),
// 2 malformed input (JSON error with a pointer to the offending field).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "heisgeo/heisgeo.hpp"

namespace {

using heisgeo::io::json;
namespace io = heisgeo::io;

/// Thrown for malformed command-line values; field names the flag.
struct UsageError : heisgeo::InvalidInput
{
  using heisgeo::InvalidInput::InvalidInput;
};

/// Inline JSON if the text starts with '{' or '[', otherwise a path to a JSON file.
json load(const std::string & text, const std::string & flag)
{
  std::string body = text;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw UsageError("empty value", flag);
  if (text[first] != '{' && text[first] != '[') {
    std::ifstream in(text);
    if (!in) throw UsageError("cannot open '" + text + "'", flag);
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return json::parse(body);
  } catch (const json::parse_error & e) {
    throw UsageError(std::string("invalid JSON: ") + e.what(), flag);
  }
}

/// A nested record under key if present, else the record itself (flat {"n","r","A_tilde","rho"} layout).
const json & sub(const json & j, const char * key) { return j.is_object() && j.contains(key) ? j[key] : j; }

std::string sub_ptr(const json & j, const char * key)
{
  return j.is_object() && j.contains(key) ? std::string("/") + key : std::string();
}

struct Sources
{
  std::string input, lattice, metric;

  json require(const std::string & which) const
  {
    if (which == "lattice" && !lattice.empty()) return load(lattice, "--lattice");
    if (which == "metric" && !metric.empty()) return load(metric, "--metric");
    if (!input.empty()) {
      return load(input, "--input");
    }
    throw UsageError("missing --" + which + " (or --input)", "--" + which);
  }

  json whole() const
  {
    if (input.empty()) throw UsageError("missing --input", "--input");
    return load(input, "--input");
  }
};

void emit(const json & j) { std::cout << j.dump(2) << '\n'; }

double parse_torus_constant(const std::string & s, int n)
{
  if (s.empty()) return heisgeo::default_torus_constant(n);
  if (s == "loewner") {
    if (n != 1) throw UsageError("the Loewner constant is for 2-tori (n = 1)", "--constant");
    return heisgeo::loewner_constant();
  }
  if (s == "minkowski") return heisgeo::minkowski_constant(2 * n);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !(v > 0)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw UsageError("--constant must be loewner, minkowski or a positive number", "--constant");
  }
}

json failure_list(const std::vector<heisgeo::selftest::CheckResult> & results, bool timings)
{
  json all = json::array();
  json failures = json::array();
  for (const auto & r : results) {
    json e = {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}};
    if (timings) {
      e["seconds"] = r.seconds;
      e["budget"] = r.budget;
    }
    if (!r.passed) failures.push_back(e);
    all.push_back(e);
  }
  return {{"schema", io::kSchemaVersion}, {"results", all}, {"failures", failures}};
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Geometry of compact Heisenberg manifolds"};
  app.require_subcommand(1);

  Sources src;
  auto add_sources = [&](CLI::App * cmd, bool lattice, bool metric) {
    cmd->add_option("--input", src.input, "JSON record (inline or file path)");
    if (lattice) cmd->add_option("--lattice", src.lattice, "lattice record {n, r}");
    if (metric) cmd->add_option("--metric", src.metric, "metric record {A_tilde, rho} or canonical form");
  };

  auto * c_canon = app.add_subcommand("canonicalize", "reduce a metric to canonical form");
  add_sources(c_canon, false, true);
  auto * c_fp = app.add_subcommand("fingerprint", "invariant fingerprint of a metric");
  add_sources(c_fp, false, true);

  auto * c_geo = app.add_subcommand("geodesic", "sample a normal geodesic from the identity");
  add_sources(c_geo, false, false);

  auto * c_dist = app.add_subcommand("distance", "group or quotient distance");
  add_sources(c_dist, true, true);
  std::string from_s, to_s;
  bool group_only = false;
  heisgeo::ShootingOptions shoot;
  c_dist->add_option("--from", from_s, "point {x, y, z}");
  c_dist->add_option("--to", to_s, "point {x, y, z}")->required();
  c_dist->add_flag("--group-only", group_only, "distance in H_n, ignoring the lattice");
  c_dist->add_option("--subintervals", shoot.subintervals, "root bracketing grid size")->check(CLI::PositiveNumber);
  c_dist->add_option("--max-iterations", shoot.max_iterations, "root refinement budget")->check(CLI::PositiveNumber);

  auto * c_vol = app.add_subcommand("volume", "volume coefficients and total measure");
  add_sources(c_vol, true, true);
  std::string kind_s = "all";
  c_vol->add_option("--kind", kind_s, "riemannian | popp | minimal-popp | all")
    ->check(CLI::IsMember({"riemannian", "popp", "minimal-popp", "minimal_popp", "all"}));

  auto * c_sys = app.add_subcommand("systole", "systole and systolic inequality");
  add_sources(c_sys, true, true);
  std::string constant_s;
  bool classify = false;
  c_sys->add_option("--constant", constant_s, "loewner | minkowski | <positive float>");
  c_sys->add_flag("--classify-3d", classify, "add the 3-dimensional case classification");

  auto * c_col = app.add_subcommand("collapse", "collapse classification of a metric sequence");
  add_sources(c_col, false, false);
  double D = 0;
  bool csv = false;
  std::string format = "json";
  c_col->add_option("--diameter-bound", D, "diameter bound D")->required();
  c_col->add_flag("--csv", csv, "emit the per-k series as CSV");
  c_col->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  auto * c_self = app.add_subcommand("selftest", "acceptance criteria and property checks");
  std::uint64_t seed = 42;
  int criterion = 0;
  bool timings = false;
  c_self->add_option("--seed", seed, "seed for the randomized checks");
  c_self->add_option("--criterion", criterion, "run a single acceptance criterion (1-9)")->check(CLI::Range(1, 9));
  c_self->add_flag("--timings", timings, "include wall-clock seconds (breaks byte-identical output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    emit({{"error", e.what()}, {"type", "usage"}, {"field", ""}});
    return 2;
  }

  try {
    if (c_canon->parsed()) {
      const json m = src.require("metric");
      emit(io::to_json(heisgeo::canonicalize(io::parse_metric(sub(m, "metric"), sub_ptr(m, "metric")))));
    } else if (c_fp->parsed()) {
      const json m = src.require("metric");
      emit(io::to_json(heisgeo::fingerprint(io::parse_metric(sub(m, "metric"), sub_ptr(m, "metric")))));
    } else if (c_geo->parsed()) {
      const json in = src.whole();
      const json & cfj = io::field(in, "cf", "");
      const heisgeo::CanonicalForm cf = io::parse_canonical_or_metric(cfj, "/cf");
      const heisgeo::Covector cov = io::parse_covector(io::field(in, "cov", ""), "/cov");
      const json & grid = io::field(in, "t_grid", "");
      const heisgeo::Vec ts = io::get_vec(grid, "/t_grid");
      json out = json::array();
      for (Eigen::Index i = 0; i < ts.size(); ++i) {
        if (!(ts(i) >= 0)) throw heisgeo::InvalidInput("times must be >= 0", "/t_grid/" + std::to_string(i));
        out.push_back(io::to_json(heisgeo::geodesic_point(cf, cov, ts(i))));
      }
      emit(out);
    } else if (c_dist->parsed()) {
      const json mj = src.require("metric");
      const heisgeo::CanonicalForm cf = io::parse_canonical_or_metric(sub(mj, "metric"), sub_ptr(mj, "metric"));
      const heisgeo::GroupPoint q = io::parse_point(load(to_s, "--to"), "");
      const heisgeo::GroupPoint p =
        from_s.empty() ? heisgeo::GroupPoint::identity(cf.n) : io::parse_point(load(from_s, "--from"), "");
      heisgeo::require_same_n(cf.n, p.n(), "--from");
      heisgeo::require_same_n(cf.n, q.n(), "--to");
      if (group_only) {
        emit(io::to_json(heisgeo::distance_group(cf, heisgeo::group_mul(heisgeo::group_inverse(p), q), shoot)));
      } else {
        const json lj = src.require("lattice");
        const heisgeo::LatticeParam lat = io::parse_lattice(sub(lj, "lattice"), sub_ptr(lj, "lattice"));
        emit(io::to_json(heisgeo::distance_quotient(lat, cf, p, q, shoot)));
      }
    } else if (c_vol->parsed()) {
      const json mj = src.require("metric");
      const json lj = src.require("lattice");
      const heisgeo::MetricParam m = io::parse_metric(sub(mj, "metric"), sub_ptr(mj, "metric"));
      const heisgeo::LatticeParam lat = io::parse_lattice(sub(lj, "lattice"), sub_ptr(lj, "lattice"));
      auto one = [&](heisgeo::VolumeKind k) {
        // the Riemannian coefficient is infinite in the corank-one case
        const bool inf = k == heisgeo::VolumeKind::riemannian && m.rho() == 0.0;
        const double coeff = inf ? heisgeo::kInf : heisgeo::volume_coeff(m, k);
        return json{{"kind", heisgeo::to_string(k)},
                    {"coeff", io::number(coeff)},
                    {"total_measure", io::number(coeff * static_cast<double>(lat.product()))}};
      };
      if (kind_s == "all") {
        emit(json::array({one(heisgeo::VolumeKind::riemannian), one(heisgeo::VolumeKind::popp),
                          one(heisgeo::VolumeKind::minimal_popp)}));
      } else {
        const auto k = heisgeo::volume_kind_from_string(kind_s);
        if (k == heisgeo::VolumeKind::riemannian) heisgeo::riemannian_coeff(m);  // rho = 0 is an input error here
        emit(one(k));
      }
    } else if (c_sys->parsed()) {
      const json mj = src.require("metric");
      const json lj = src.require("lattice");
      const heisgeo::MetricParam m = io::parse_metric(sub(mj, "metric"), sub_ptr(mj, "metric"));
      const heisgeo::LatticeParam lat = io::parse_lattice(sub(lj, "lattice"), sub_ptr(lj, "lattice"));
      json out;
      if (m.rho() == 0.0) {
        out = io::to_json(heisgeo::systolic_bound(lat, m, parse_torus_constant(constant_s, m.n())));
      } else {
        // the inequality is for rho = 0; the systole itself is still defined
        const heisgeo::Systole s = heisgeo::compute_systole(lat, heisgeo::canonicalize(m));
        if (!constant_s.empty()) throw heisgeo::RankError("systolic inequality applies to rho = 0 only", "/rho");
        out = {{"s1", io::number(s.s1)}, {"s1_witness", io::ivec(s.s1_witness)}, {"s2", io::number(s.s2)},
               {"systole", io::number(s.systole)}};
      }
      if (classify) {
        if (lat.n != 1) throw heisgeo::DimensionMismatch("--classify-3d needs n = 1", "/n");
        out["classification"] = io::to_json(heisgeo::classify_3d(lat.r[0], m));
      }
      emit(out);
    } else if (c_col->parsed()) {
      const json in = src.whole();
      const auto entries = io::parse_sequence(in);
      const heisgeo::SequenceReport rep = heisgeo::classify_sequence(entries, D);
      if (csv || format == "csv") {
        std::cout << "k,measure,fiber_diam";
        const auto dim = rep.successive_minima.front().size();
        for (Eigen::Index j = 0; j < dim; ++j) std::cout << ",minima_" << (j + 1);
        std::cout << '\n';
        std::cout.precision(17);
        for (std::size_t i = 0; i < rep.ks.size(); ++i) {
          std::cout << rep.ks[i] << ',' << rep.measures[i] << ',' << rep.fiber_diams[i];
          for (Eigen::Index j = 0; j < dim; ++j) std::cout << ',' << rep.successive_minima[i](j);
          std::cout << '\n';
        }
      } else {
        emit(io::to_json(rep));
      }
    } else if (c_self->parsed()) {
      std::vector<heisgeo::selftest::CheckResult> results;
      if (criterion > 0) {
        results.push_back(heisgeo::selftest::run_criterion(criterion, seed));
      } else {
        results = heisgeo::selftest::run_all(seed);
      }
      const json report = failure_list(results, timings);
      emit(report);
      return report["failures"].empty() ? 0 : 1;
    }
  } catch (const heisgeo::InvalidInput & e) {
    emit({{"error", e.what()}, {"type", "invalid_input"}, {"field", e.field()}});
    return 2;
  } catch (const heisgeo::Error & e) {
    emit({{"schema", io::kSchemaVersion}, {"failures", json::array({{{"error", e.what()}, {"field", e.field()}}})}});
    return 1;
  }
  return 0;
}
