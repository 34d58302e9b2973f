// Run configuration, experiment drivers and output writers for the holoq
// command-line tool.

#ifndef HOLOQ_CLI_HPP
#define HOLOQ_CLI_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "holoq/berry.hpp"
#include "holoq/circuit.hpp"
#include "holoq/noise.hpp"

namespace holoq {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitConfig = 2, kExitPhysics = 3 };

/// Schema or syntax problem in a config file; line is 1-based, 0 if unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line);
  int line;
};

struct CircuitConfig {
  double e_sigma_ghz = 40.0;  // E2 + E2', converted x 2 pi to rad/ns
  double e_c = 0.1;           // dimensionless 2 E_C / E_sigma
  std::optional<double> delta;
  std::optional<double> eta;

  double e_sigma() const { return 2.0 * kPi * e_sigma_ghz; }
  /// Requires delta or eta.
  CircuitParams params() const;
};

struct LoopConfig {
  double margin_q = 0.5;
  double d_phi_over_pi = 0.001;
  double d_q = 0.01;
  ControlPath path() const { return standard_loop(margin_q, d_phi_over_pi * kPi, d_q); }
};

struct CurvatureConfig {
  GridSpec grid = default_curvature_grid();
  bool zoom = false;
};

struct GateAngleConfig {
  std::vector<double> etas;
  bool fit = true;
  LoopConfig loop;
};

struct DynamicsConfig {
  std::string mode;  // holonomic | discrete_z | lz_sweep
  std::vector<double> taus_ns;
  std::vector<double> hold_factors{1.0};  // hold time in units of pi / (2 E_C)
  double ramp_time_ns = 0.0;
  std::optional<double> dt_ns;
  LoopConfig loop;
};

struct NoiseConfig {
  std::string mode;  // static_offset | analytic_dephasing | monte_carlo
  std::vector<double> eps_q;
  OffsetShift shift = OffsetShift::symmetric;
  double tau_gate_ns = 15.0;
  std::vector<double> sqrt_A;
  std::optional<double> f_min_ghz;
  std::optional<double> f_max_ghz;
  std::size_t n_samples = 300;
  std::optional<double> dt_ns;
  LoopConfig loop;
};

struct RunConfig {
  std::string command;
  CircuitConfig circuit;
  int n_max = 100;
  std::string output_dir = "out";
  std::string format = "csv";  // csv | json
  std::uint64_t seed = 1;
  std::optional<CurvatureConfig> curvature_map;
  std::optional<GateAngleConfig> gate_angle;
  std::optional<DynamicsConfig> dynamics;
  std::optional<NoiseConfig> noise;
  nlohmann::json echo;  // the parsed document
};

inline const std::vector<std::string> kCommands = {"curvature-map", "gate-angle", "dynamics",
                                                   "noise"};

/// Default truncation per command: 100 for spectra, 14 for time evolution,
/// 12 for Monte Carlo.
int default_n_max(const std::string& command, const std::string& mode);

/// Parses a JSON config (// and /* */ comments allowed) for one command.
/// Unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const std::string& text, const std::string& command);
RunConfig load_config(const std::string& path, const std::string& command);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// Rows of named columns written as CSV (header, LF endings) or a JSON array.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);
  void add(std::vector<nlohmann::json> row);
  std::size_t rows() const { return rows_.size(); }
  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<nlohmann::json>> rows_;
};

struct CommandOutput {
  std::vector<std::pair<std::string, Table>> tables;  // file stem, data
  nlohmann::json results = nlohmann::json::object();  // fitted values, summaries
  std::vector<std::string> failures;
};

/// Runs one experiment. Physics failures in sweeps are recorded per row.
CommandOutput run_command(const RunConfig& config);

/// Writes data files and a <stem>.meta.json sidecar for each table.
void write_outputs(const RunConfig& config, const CommandOutput& out, double elapsed_seconds);

/// Entry point of the holoq tool.
int run_cli(int argc, char** argv);

}  // namespace holoq

#endif  // HOLOQ_CLI_HPP
