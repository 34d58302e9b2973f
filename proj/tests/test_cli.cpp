#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "holoq/cli.hpp"

using namespace holoq;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("holoq_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "holoq");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

const char* kSmallGateAngle = R"({
  // two points on a coarse loop
  "circuit": { "e_sigma_ghz": 40.0, "e_c": 0.1 },
  "basis": { "n_max": 30 },
  "gate_angle": { "etas": [0.05, 0.1], "loop": { "d_phi_over_pi": 0.004, "d_q": 0.02 } }
})";

}  // namespace

TEST(Config, ParsesGateAngle) {
  const RunConfig c = parse_config(kSmallGateAngle, "gate-angle");
  ASSERT_TRUE(c.gate_angle.has_value());
  EXPECT_EQ(c.n_max, 30);
  EXPECT_EQ(c.gate_angle->etas, (std::vector<double>{0.05, 0.1}));
  EXPECT_DOUBLE_EQ(c.gate_angle->loop.d_q, 0.02);
  EXPECT_EQ(c.format, "csv");
}

TEST(Config, UnknownKeyReportsLine) {
  const std::string text = "{\n  \"circuit\": { \"e_c\": 0.1, \"delta\": 0.05 },\n  \"curvature_map\": {\n    \"presett\": \"zoom\"\n  }\n}";
  try {
    parse_config(text, "curvature-map");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line, 4);
    EXPECT_NE(std::string(e.what()).find("presett"), std::string::npos);
  }
}

TEST(Config, RejectsEmptyGrid) {
  const std::string text = R"({"circuit": {"delta": 0.05}, "curvature_map": {"grid":
    {"phi_min": 0, "phi_max": 1, "q_min": -1, "q_max": 1, "phi_cells": 0, "q_cells": 10}}})";
  EXPECT_THROW(parse_config(text, "curvature-map"), ConfigError);
}

TEST(Config, RejectsWrongTypeAndForeignBlock) {
  EXPECT_THROW(parse_config(R"({"gate_angle": {"etas": "0.1"}})", "gate-angle"), ConfigError);
  EXPECT_THROW(parse_config(R"({"gate_angle": {"etas": [0.1]}, "noise": {}})", "gate-angle"), ConfigError);
  EXPECT_THROW(parse_config("{ \"circuit\": ", "gate-angle"), ConfigError);
}

TEST(Config, DefaultTruncationPerCommand) {
  EXPECT_EQ(default_n_max("curvature-map", ""), 100);
  EXPECT_EQ(default_n_max("dynamics", "holonomic"), 14);
  EXPECT_EQ(default_n_max("noise", "monte_carlo"), 12);
}

TEST(Output, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.844059e-7, 1e300, 5e-324, 0.0}) {
    const std::string s = format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, x) << s;
  }
}

TEST(Output, CsvHasHeaderAndLfEndings) {
  Table t({"a", "b"});
  t.add({1.5, "ok"});
  t.add({-2.0, "failed"});
  EXPECT_EQ(t.to_csv(), "a,b\n1.5,ok\n-2,failed\n");
  EXPECT_EQ(t.to_json().size(), 2u);
  EXPECT_EQ(t.to_json()[0]["b"], "ok");
}

TEST(Cli, MissingConfigIsConfigError) {
  EXPECT_EQ(run({"gate-angle", "--config", "/nonexistent/holoq.json"}), kExitConfig);
  EXPECT_EQ(run({"no-such-command"}), kExitConfig);
}

TEST(Cli, GateAngleRunWritesDeterministicOutput) {
  const fs::path dir = scratch_dir("gate_angle");
  const fs::path cfg = dir / "config.jsonc";
  std::ofstream(cfg) << kSmallGateAngle;
  ASSERT_EQ(run({"gate-angle", "--config", cfg.string(), "--out", (dir / "a").string()}), kExitOk);
  ASSERT_EQ(run({"gate-angle", "--config", cfg.string(), "--out", (dir / "b").string()}), kExitOk);
  const std::string first = read_file(dir / "a" / "gate_angle.csv");
  EXPECT_EQ(first, read_file(dir / "b" / "gate_angle.csv"));
  EXPECT_EQ(first.substr(0, first.find('\n')), "eta,delta,theta,theta_predicted,min_gap,status");
  const auto meta = nlohmann::json::parse(read_file(dir / "a" / "gate_angle.meta.json"));
  EXPECT_EQ(meta["command"], "gate-angle");
  EXPECT_EQ(meta["version"], kVersion);
  EXPECT_TRUE(meta["results"].contains("A"));
  fs::remove_all(dir);
}

TEST(Cli, UnresolvedLoopGivesPhysicsExit) {
  // delta = 0 and a loop hugging q = 0: the states turn over faster than the
  // phi sampling resolves.
  const fs::path dir = scratch_dir("degenerate");
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"circuit": {"e_c": 0.1}, "basis": {"n_max": 20},
    "gate_angle": {"etas": [0.0], "loop": {"margin_q": 0.001, "d_phi_over_pi": 0.031, "d_q": 0.05}}})";
  EXPECT_EQ(run({"gate-angle", "--config", cfg.string(), "--out", (dir / "o").string()}), kExitPhysics);
  const std::string csv = read_file(dir / "o" / "gate_angle.csv");
  EXPECT_NE(csv.find("failed"), std::string::npos);
  fs::remove_all(dir);
}
