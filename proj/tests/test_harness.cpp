// End-to-end checks of the command-line tool, plus the I/O helpers it uses.

#include "hyperbary/commands.hpp"
#include "hyperbary/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace hyperbary;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HYPERBARY_CLI;
const std::string kData = HYPERBARY_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("hyperbary_harness_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Run run_cli(const std::string& args, const std::string& env = "") {
  static int n = 0;
  const auto out = scratch() / ("out" + std::to_string(n) + ".txt");
  const auto err = scratch() / ("err" + std::to_string(n++) + ".txt");
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + kCli + "' " + args + " >'" + out.string() +
                          "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string data(const std::string& name) { return "'" + kData + "/" + name + "'"; }

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

}  // namespace

TEST(Cli, BarycenterSucceeds) {
  const auto r = run_cli("barycenter " + data("triangle.json"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("barycenter ("), std::string::npos);
}

TEST(Cli, RejectsMalformedJsonWithPosition) {
  const auto r = run_cli("barycenter " + data("malformed.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("malformed.json:7:3"), std::string::npos) << r.err;
}

TEST(Cli, UnnormalizedWeightsNeedRenormalize) {
  EXPECT_EQ(run_cli("barycenter " + data("unnormalized.json")).code, 2);
  EXPECT_EQ(run_cli("barycenter --renormalize " + data("unnormalized.json")).code, 0);
}

TEST(Cli, SchemaErrorsCitePointer) {
  const auto p = write_temp("neg.json", R"({"model":"half-space","d":2,"atoms":[{"w":1.5,"x":[0,1]},{"w":-0.5,"x":[1,1]}]})");
  const auto r = run_cli("barycenter '" + p.string() + "'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/atoms/1/w"), std::string::npos) << r.err;

  const auto q = write_temp("extra.json", R"({"model":"half-space","d":2,"atoms":[{"w":1,"x":[0,1]}],"color":1})");
  EXPECT_EQ(run_cli("barycenter '" + q.string() + "'").code, 2);
}

TEST(Cli, ClassUViolationNamesTheAtom) {
  const auto r = run_cli("busemann " + data("boundary_heavy.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("atom 0"), std::string::npos) << r.err;
}

TEST(Cli, BadArgumentsAreRejected) {
  EXPECT_EQ(run_cli("verify --suite nonsense").code, 2);
  EXPECT_EQ(run_cli("simulate three-body").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("--help").code, 0);
}

TEST(Cli, BusemannOracleAgrees) {
  const auto r = run_cli("busemann --oracle --json " + data("boundary_square.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::json::parse(r.out);
  EXPECT_LT(j["oracle"]["distance"].get<double>(), 1e-8);
  EXPECT_TRUE(j["certificate"]["held"].get<bool>());
}

TEST(Cli, JsonOutputMatchesLibraryBitForBit) {
  const auto r = run_cli("barycenter --json " + data("triangle.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::json::parse(r.out);

  const auto mu = std::get<DiscreteMeasure>(io::load_measure(kData + "/triangle.json", false));
  const auto lib = solve_exp_barycenter(mu);
  const auto coords = j["barycenter"].get<std::vector<double>>();
  ASSERT_EQ(coords.size(), 2u);
  EXPECT_EQ(coords[0], lib.point[0]);
  EXPECT_EQ(coords[1], lib.point[1]);

  // the embedded Dirac measure is itself a valid input
  const auto p = write_temp("dirac.json", j["measure"].dump());
  const auto again = run_cli("barycenter --json '" + p.string() + "'");
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(io::json::parse(again.out)["barycenter"], j["barycenter"]);
}

TEST(Cli, MeasureJsonRoundTrip) {
  const auto mu = std::get<DiscreteMeasure>(io::load_measure(kData + "/triangle.json", false));
  const auto back = std::get<DiscreteMeasure>(io::measure_from_json(io::to_json(mu), false));
  ASSERT_EQ(back.size(), mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    EXPECT_EQ(back.atoms()[i].weight, mu.atoms()[i].weight);
    EXPECT_EQ(back.atoms()[i].point.coords(), mu.atoms()[i].point.coords());
  }
  const auto nu = std::get<BoundaryMeasure>(io::load_measure(kData + "/boundary_square.json", false));
  const auto nu2 = std::get<BoundaryMeasure>(io::measure_from_json(io::to_json(nu), false));
  EXPECT_EQ(io::to_json(nu2), io::to_json(nu));
}

TEST(Cli, SimulateWritesCsvAndReport) {
  const auto csv = scratch() / "two.csv";
  const auto r = run_cli("simulate two-particle --config " + data("two_particle.json") + " --seed 5 --out '" +
                     csv.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = io::parse_csv(slurp(csv));
  // header + paths * (t_end / (dt * record_every) + 1)
  ASSERT_EQ(rows.size(), 1u + 2u * 21u);
  EXPECT_EQ(rows[0][0], "path");
  EXPECT_EQ(rows[0][1], "t");
  for (const auto& row : rows) EXPECT_EQ(row.size(), rows[0].size());

  const auto report = io::json::parse(slurp(scratch() / "two.json"));
  EXPECT_EQ(report["seed"], 5);
  EXPECT_EQ(report["csv_schema"], "hyperbary.two-particle/1");
  EXPECT_EQ(report["csv_columns"].size(), rows[0].size());
  EXPECT_FALSE(report.contains("wall_clock_seconds"));
}

TEST(Cli, SimulateIsDeterministicAcrossThreadCounts) {
  const std::string args = "simulate n-particle --config " + data("n_particle.json") + " --seed 11";
  const auto one = run_cli(args, "HYPERBARY_THREADS=1");
  const auto three = run_cli(args, "HYPERBARY_THREADS=3");
  const auto again = run_cli(args, "HYPERBARY_THREADS=1");
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, three.out);
  EXPECT_EQ(one.out, again.out);
  EXPECT_NE(one.out, run_cli("simulate n-particle --config " + data("n_particle.json") + " --seed 12").out);
}

TEST(Cli, VerifyGeometrySuitePasses) {
  const auto r = run_cli("verify --suite geometry --json");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto j = io::json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_GE(j["checks"].size(), 2u);
}

// A deliberately wrong jdot must be caught by the finite-difference check.
TEST(Mutation, BrokenJdotIsDetected) {
  verify::Options broken;
  broken.jdot_left = [](const TangentVector& u, const Point& y) { return jdot_left(u, y) * 1.01; };
  cli::VerifyArgs args;
  args.suite = "jacobi";
  args.common.json = true;
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_verify(args, out, err, &broken), cli::kFailed);
  const auto j = io::json::parse(out.str());
  bool caught = false;
  for (const auto& c : j["checks"]) {
    if (c["name"] == "jacobi.jdot_finite_difference") caught = !c["pass"].get<bool>();
  }
  EXPECT_TRUE(caught);

  std::ostringstream out2;
  EXPECT_EQ(cli::cmd_verify(args, out2, err), cli::kOk);
}

TEST(Csv, QuotingRoundTrip) {
  const std::vector<std::vector<std::string>> rows = {
      {"plain", "with,comma", "with \"quote\""}, {"multi\nline", "", "1e-300"}};
  std::ostringstream ss;
  io::CsvWriter w(ss);
  for (const auto& r : rows) w.row(r);
  EXPECT_NE(ss.str().find("\r\n"), std::string::npos);
  EXPECT_EQ(io::parse_csv(ss.str()), rows);
}

TEST(Csv, NumbersRoundTripExactly) {
  for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 1.0}) {
    EXPECT_EQ(std::strtod(io::fmt(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(io::fmt(std::numeric_limits<double>::quiet_NaN()), "");
}
