#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

using json = nlohmann::ordered_json;

namespace {

struct Invocation
{
  int status = -1;
  std::string out;
  json parsed() const { return json::parse(out); }
};

Invocation heisgeo(const std::string & args)
{
  const std::string cmd = std::string(HEISGEO_CLI) + " " + args + " 2>/dev/null";
  Invocation r;
  FILE * pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int st = ::pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string sample(const std::string & name) { return std::string(HEISGEO_SAMPLES) + "/" + name; }

/// Single-quoted for the shell.
std::string quoted(const json & j) { return "'" + j.dump() + "'"; }

const double kPi = 3.141592653589793;

}  // namespace

TEST(Cli, PoppVolumeOfA2)
{
  const Invocation r = heisgeo("volume --kind popp --input " + sample("heisenberg3_A2.json"));
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = r.parsed();
  EXPECT_EQ(j["kind"], "popp");
  EXPECT_NEAR(j["coeff"].get<double>(), 1 / (16 * std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(j["total_measure"].get<double>(), 1 / (16 * std::sqrt(2.0)), 1e-15);
}

TEST(Cli, VolumeAllReportsInfiniteRiemannianAtRhoZero)
{
  const Invocation r = heisgeo("volume --input " + sample("heisenberg3_A2.json"));
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = r.parsed();
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["coeff"], "inf");
  EXPECT_EQ(j[2]["kind"], "minimal_popp");
}

TEST(Cli, RiemannianAtRhoZeroIsInvalid)
{
  const Invocation r = heisgeo("volume --kind riemannian --input " + sample("heisenberg3_A2.json"));
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.parsed()["field"], "/rho");
}

TEST(Cli, DivisibilityFailureNamesField)
{
  const json in = {{"n", 2}, {"r", {2, 3}}, {"A_tilde", json::parse("[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]")}, {"rho", 0}};
  const Invocation r = heisgeo("volume --input " + quoted(in));
  EXPECT_EQ(r.status, 2);
  const json j = r.parsed();
  EXPECT_EQ(j["field"], "/r/1");
  EXPECT_EQ(j["type"], "invalid_input");
}

TEST(Cli, NestedRecordPointers)
{
  json in = json::parse(R"({"lattice": {"n": 1, "r": [0]}, "metric": {"A_tilde": [[1, 0], [0, 1]], "rho": 0}})");
  const Invocation r = heisgeo("systole --input " + quoted(in));
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.parsed()["field"], "/lattice/r/0");
}

TEST(Cli, MalformedJsonAndMissingFlags)
{
  EXPECT_EQ(heisgeo("canonicalize --metric '{\"A_tilde\": [[1, 0]'").status, 2);
  EXPECT_EQ(heisgeo("canonicalize").status, 2);
  EXPECT_EQ(heisgeo("distance --input " + sample("heisenberg3_A2.json")).status, 2);
  EXPECT_EQ(heisgeo("nonsense").status, 2);
  EXPECT_EQ(heisgeo("volume --input /nonexistent/file.json").status, 2);
}

TEST(Cli, CanonicalizeAndFingerprint)
{
  const Invocation c = heisgeo("canonicalize --metric " + sample("heisenberg3_A2.json"));
  ASSERT_EQ(c.status, 0) << c.out;
  EXPECT_NEAR(c.parsed()["d"][0].get<double>(), 4.0, 1e-12);
  const Invocation f = heisgeo("fingerprint --input " + sample("heisenberg5_riemannian.json"));
  ASSERT_EQ(f.status, 0) << f.out;
  EXPECT_EQ(f.parsed()["d"].size(), 2u);
  EXPECT_NEAR(f.parsed()["rho"].get<double>(), 0.7, 1e-15);
}

TEST(Cli, CanonicalFormFeedsBackIn)
{
  const Invocation c = heisgeo("canonicalize --metric " + sample("heisenberg5_riemannian.json"));
  ASSERT_EQ(c.status, 0);
  const Invocation a = heisgeo("distance --group-only --metric " + quoted(c.parsed()) + " --to '{\"x\":[0.1,0.2],\"y\":[0.3,-0.1],\"z\":0.4}'");
  const Invocation b = heisgeo("distance --group-only --input " + sample("heisenberg5_riemannian.json")
                        + " --to '{\"x\":[0.1,0.2],\"y\":[0.3,-0.1],\"z\":0.4}'");
  ASSERT_EQ(a.status, 0) << a.out;
  ASSERT_EQ(b.status, 0) << b.out;
  EXPECT_NEAR(a.parsed()["value"].get<double>(), b.parsed()["value"].get<double>(), 1e-9);
}

TEST(Cli, GeodesicCircle)
{
  const Invocation r = heisgeo("geodesic --input " + sample("geodesic_circle.json"));
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = r.parsed();
  ASSERT_EQ(j.size(), 5u);
  EXPECT_NEAR(j[4]["coords"]["z"].get<double>(), kPi, 1e-12);
  EXPECT_NEAR(j[4]["coords"]["x"][0].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(j[2]["speed"].get<double>(), 1.0, 1e-15);
}

TEST(Cli, DistanceGroupAndQuotient)
{
  const std::string m = " --metric '{\"A_tilde\": [[1, 0], [0, 1]], \"rho\": 0}'";
  const Invocation g = heisgeo("distance --group-only" + m + " --to " + sample("point_exp_z.json"));
  ASSERT_EQ(g.status, 0) << g.out;
  EXPECT_NEAR(g.parsed()["value"].get<double>(), 2 * std::sqrt(kPi), 1e-9);
  EXPECT_EQ(g.parsed()["method"], "vertical_formula");

  const Invocation q = heisgeo("distance --input " + sample("heisenberg3_A2.json") + " --to " + sample("point_half_x1.json"));
  ASSERT_EQ(q.status, 0) << q.out;
  EXPECT_NEAR(q.parsed()["value"].get<double>(), 0.25, 1e-12);
  EXPECT_EQ(q.parsed()["method"], "quotient_enumeration");
  EXPECT_EQ(q.parsed()["certified"], true);
}

TEST(Cli, Systole)
{
  const Invocation r = heisgeo("systole --classify-3d --input " + sample("heisenberg3_A2.json"));
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = r.parsed();
  EXPECT_NEAR(j["s1"].get<double>(), 0.5, 1e-14);
  EXPECT_EQ(j["holds"], true);
  EXPECT_EQ(j["classification"]["case"], "1");

  const Invocation riem = heisgeo("systole --input " + sample("heisenberg3_B3.json"));
  ASSERT_EQ(riem.status, 0) << riem.out;
  EXPECT_NEAR(riem.parsed()["s2"].get<double>(), 3.0, 1e-9);
  EXPECT_FALSE(riem.parsed().contains("holds"));
  EXPECT_EQ(heisgeo("systole --constant loewner --input " + sample("heisenberg3_B3.json")).status, 2);
  EXPECT_EQ(heisgeo("systole --constant -1 --input " + sample("heisenberg3_A2.json")).status, 2);
  EXPECT_EQ(heisgeo("systole --constant 1.5 --input " + sample("heisenberg3_A2.json")).parsed()["torus_constant"], 1.5);
}

TEST(Cli, Collapse)
{
  const Invocation a = heisgeo("collapse --diameter-bound 10 --input " + sample("sequence_A.json"));
  ASSERT_EQ(a.status, 0) << a.out;
  EXPECT_EQ(a.parsed()["verdict"], "collapsed");
  const Invocation b = heisgeo("collapse --diameter-bound 10 --input " + sample("sequence_B.json"));
  EXPECT_EQ(b.parsed()["verdict"], "non_collapsed");
  const Invocation l = heisgeo("collapse --diameter-bound 1 --input " + sample("sequence_lattice_divergence.json"));
  EXPECT_EQ(l.parsed()["verdict"], "collapsed");
  const Invocation csv = heisgeo("collapse --diameter-bound 10 --format csv --input " + sample("sequence_A.json"));
  ASSERT_EQ(csv.status, 0);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "k,measure,fiber_diam,minima_1,minima_2");
  EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 11);
}

TEST(Cli, SelftestSingleCriterion)
{
  const Invocation r = heisgeo("selftest --criterion 2");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(r.parsed()["failures"].empty());
  EXPECT_EQ(r.parsed()["schema"], "heisgeo.v1");
}

TEST(Cli, OutputIsByteIdenticalAcrossRuns)
{
  for (const std::string & args : {"collapse --diameter-bound 10 --input " + sample("sequence_A.json"),
                                 "distance --input " + sample("heisenberg5_riemannian.json")
                                   + " --from '{\"x\":[0.2,0.1],\"y\":[0,0.3],\"z\":0.1}' --to '{\"x\":[0.5,-0.4],\"y\":[1.1,0.3],\"z\":0.9}'",
                                 std::string("selftest --criterion 7")}) {
    const Invocation a = heisgeo(args), b = heisgeo(args);
    EXPECT_EQ(a.out, b.out) << args;
    EXPECT_FALSE(a.out.empty());
  }
}
