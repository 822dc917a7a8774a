// Runs the datri-lab executable named by the DATRI_LAB environment variable.

#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const double kPi = 3.14159265358979323846;

std::string exe() {
  const char* p = std::getenv("DATRI_LAB");
  return p ? p : "datri-lab";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("datri_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = "\"" + exe() + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> preamble;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("no column " + name);
  }
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

Csv read_csv(const fs::path& p) {
  Csv c;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      c.preamble.push_back(line.substr(2));
    } else if (c.header.empty()) {
      c.header = split(line);
    } else {
      std::vector<double> row;
      for (const auto& f : split(line)) row.push_back(std::stod(f));
      c.rows.push_back(row);
    }
  }
  return c;
}

TEST(Cli, HelpAndUsageErrors) {
  const fs::path out = scratch("usage");
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("report --model no_such_model --out " + out.string()), 1);
  EXPECT_EQ(run("report --model heisenberg --param kappa=1 --out " + out.string()), 1);
  EXPECT_EQ(run("sweep --model euclidean --kind sphere-total --param x --out " + out.string()), 1);
  EXPECT_EQ(run("sweep --model euclidean --kind no-such-kind --out " + out.string()), 1);
  EXPECT_EQ(run("sweep --model euclidean --kind sphere-total --r 0.2,2.0 --out " + out.string()), 1);
  EXPECT_EQ(run("sweep --model euclidean --out " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out / "sweep_sphere-total.csv"));
}

TEST(Cli, UnknownConfigKeyIsAnError) {
  const fs::path out = scratch("config_bad");
  std::ofstream(out / "cfg.json") << R"({"model": "euclidean", "kind": "sphere-total", "radius": 0.3})";
  EXPECT_EQ(run("sweep --config " + (out / "cfg.json").string() + " --out " + out.string()), 1);
  std::ofstream(out / "cfg2.json") << R"({"model": "euclidean", "ode": {"rel_tol": 1e-11, "order": 5}})";
  EXPECT_EQ(run("series --config " + (out / "cfg2.json").string() + " --out " + out.string()), 1);
}

TEST(Cli, SphereTotalSweepIsEightPiAndDeterministic) {
  const fs::path out = scratch("sphere_sweep");
  const std::string args =
      "sweep --model euclidean --kind sphere-total --r 0.1,0.2,0.3,0.4,0.5 --no-timestamp --out " + out.string();
  ASSERT_EQ(run(args), 0);
  const fs::path file = out / "sweep_sphere-total.csv";
  const std::string first = slurp(file);
  const Csv c = read_csv(file);
  ASSERT_EQ(c.rows.size(), 5u);
  EXPECT_EQ(c.header.front(), "r");
  for (const auto& row : c.rows) EXPECT_NEAR(row[c.column("total")], 8 * kPi, 1e-8);
  // provenance: the resolved config sits in the preamble
  ASSERT_EQ(c.preamble.size(), 2u);
  EXPECT_EQ(c.preamble[0].rfind("generated:", 0), 0u);
  ASSERT_EQ(c.preamble[1].rfind("config: ", 0), 0u);
  const Json cfg = Json::parse(c.preamble[1].substr(8));
  EXPECT_EQ(cfg["model"], "euclidean");
  EXPECT_EQ(cfg["kind"], "sphere-total");
  EXPECT_EQ(cfg["quadrature"]["sphere_polar"], 24);
  EXPECT_DOUBLE_EQ(cfg["ode"]["rel_tol"].get<double>(), 1e-11);
  // identical config gives identical bytes
  ASSERT_EQ(run(args), 0);
  EXPECT_EQ(slurp(file), first);
}

TEST(Cli, TimestampIsIsolatedToOneLine) {
  const fs::path out = scratch("stamp");
  const std::string args = "sweep --model euclidean --kind sphere-total --r 0.2 --out " + out.string();
  ASSERT_EQ(run(args), 0);
  const Csv a = read_csv(out / "sweep_sphere-total.csv");
  ASSERT_EQ(run(args + " --no-timestamp"), 0);
  const Csv b = read_csv(out / "sweep_sphere-total.csv");
  EXPECT_NE(a.preamble[0], b.preamble[0]);
  EXPECT_EQ(a.preamble[1], b.preamble[1]);
  EXPECT_EQ(a.rows, b.rows);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path out = scratch("config_ok");
  std::ofstream(out / "cfg.json") << R"({"command": "sweep", "model": "round_sphere", "kind": "sphere-total",
                                        "r": [0.3], "quadrature": {"sphere_polar": 16, "sphere_azimuth": 32}})";
  ASSERT_EQ(run("sweep --config " + (out / "cfg.json").string() + " --r 0.25 --no-timestamp --out " + out.string()), 0);
  const Csv c = read_csv(out / "sweep_sphere-total.csv");
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(c.rows[0][0], 0.25);
  EXPECT_NEAR(c.rows[0][c.column("total")] / (8 * kPi), 1.0, 1e-5);
  const Json cfg = Json::parse(c.preamble[1].substr(8));
  EXPECT_EQ(cfg["quadrature"]["sphere_polar"], 16);
  EXPECT_DOUBLE_EQ(cfg["params"]["kappa"].get<double>(), 1.0);
}

TEST(Cli, HemisphereSweepOnBerger) {
  const fs::path out = scratch("hemi");
  ASSERT_EQ(run("sweep --model berger_sphere --kind hemisphere-total --r 0.1,0.2,0.3 --out " + out.string()), 0);
  const Csv c = read_csv(out / "sweep_hemisphere-total.csv");
  ASSERT_EQ(c.rows.size(), 3u);
  for (const auto& row : c.rows) {
    EXPECT_NEAR(row[c.column("plus")] / (4 * kPi), 1.0, 1e-5);
    EXPECT_NEAR(row[c.column("minus")] / (4 * kPi), 1.0, 1e-5);
  }
}

TEST(Cli, TubeSweepOnPerturbedGrowsLikeCube) {
  const fs::path out = scratch("tube");
  ASSERT_EQ(run("sweep --model perturbed_conformal --kind tube-total --param cubic=0 --at 0.3,0.2,0 --axis 1,0,0 "
                "--out " + out.string()),
            0);
  const Csv c = read_csv(out / "sweep_tube-total.csv");
  ASSERT_GE(c.rows.size(), 3u);
  const std::size_t r = c.column("r"), t = c.column("total");
  const double first = c.rows.front()[t] / std::pow(c.rows.front()[r], 3);
  EXPECT_GT(std::abs(c.rows.back()[t]), 1e-4);
  for (const auto& row : c.rows) EXPECT_NEAR(row[t] / std::pow(row[r], 3) / first, 1.0, 0.1);
}

TEST(Cli, KnuAndThetaProfiles) {
  const fs::path out = scratch("profiles");
  ASSERT_EQ(run("sweep --model round_sphere --kind knu-profile --out " + out.string()), 0);
  const Csv k = read_csv(out / "sweep_knu-profile.csv");
  ASSERT_EQ(k.rows.size(), 9u);
  for (const auto& row : k.rows) EXPECT_NEAR(row[k.column("knu")], 1.0, 1e-9);
  ASSERT_EQ(run("sweep --model heisenberg --kind theta-profile --r 0.1,0.3 --out " + out.string()), 0);
  const Csv th = read_csv(out / "sweep_theta-profile.csv");
  for (const auto& row : th.rows) EXPECT_NEAR(row[th.column("theta_plus")], row[th.column("theta_minus")], 1e-8);
}

TEST(Cli, SeriesOutputs) {
  const fs::path out = scratch("series");
  ASSERT_EQ(run("series --model round_sphere --out " + out.string()), 0);
  const Json j = Json::parse(slurp(out / "series.json"));
  ASSERT_TRUE(j.contains("config"));
  ASSERT_TRUE(j.contains("timestamp"));
  const Json& s = j["series"];
  for (const auto& row : s["comparison"]) {
    if (row["coefficient"] == "a2") {
      EXPECT_NEAR(row["fitted"].get<double>(), -1.0 / 3.0, 1e-8);
      EXPECT_NEAR(row["predicted"].get<double>(), -1.0 / 3.0, 1e-12);
      EXPECT_GE(row["uncertainty"].get<double>(), 0.0);
    }
  }
  ASSERT_TRUE(s["recursion"].contains("residuals"));
  for (const auto& r : s["recursion"]["residuals"]) EXPECT_LT(std::abs(r["residual"].get<double>()), 1e-4);

  ASSERT_EQ(run("series --model perturbed_conformal --param cubic=0 --at 0.3,0.2,0 --axis 1,0,0 --out " + out.string()), 0);
  const Json p = Json::parse(slurp(out / "series.json"))["series"];
  for (const auto& row : p["comparison"]) {
    if (row["coefficient"] == "a3") {
      EXPECT_GT(std::abs(row["fitted"].get<double>()), 1e-4);
      EXPECT_NEAR(row["fitted"].get<double>(), row["predicted"].get<double>(), 1e-5);
    }
  }
  EXPECT_TRUE(p["recursion"].contains("refused"));
}

TEST(Cli, ReportExitCodes) {
  const fs::path out = scratch("report");
  ASSERT_EQ(run("report --model euclidean --out " + out.string()), 0);
  const Json j = Json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["report"]["classification"], "D'ATRI-CONSISTENT");
  EXPECT_EQ(j["report"]["matches_expected"], true);
  EXPECT_TRUE(j.contains("config"));
  EXPECT_NE(slurp(out / "report.txt").find("D'ATRI-CONSISTENT"), std::string::npos);

  // the perturbation switched off is flat space, which contradicts the registered expectation
  const fs::path out3 = scratch("report_mismatch");
  EXPECT_EQ(run("report --model perturbed_conformal --param eps=0 --param cubic=0 --out " + out3.string()), 3);
  const Json m = Json::parse(slurp(out3 / "report.json"));
  EXPECT_EQ(m["report"]["classification"], "D'ATRI-CONSISTENT");
  EXPECT_EQ(m["report"]["matches_expected"], false);
}

TEST(Cli, ComputationFailureExitsTwo) {
  const fs::path out = scratch("failure");
  // a base point near the chart edge sends the sphere geodesics out of the chart
  EXPECT_EQ(run("sweep --model round_sphere --kind sphere-total --at 1.95,0,0 --r 0.5 --out " + out.string()), 2);
}

}  // namespace
