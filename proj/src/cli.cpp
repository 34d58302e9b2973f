#include "holoq/cli.hpp"

#include <omp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "holoq/dynamics.hpp"

namespace holoq {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add(std::vector<json> row) {
  if (row.size() != columns_.size()) throw std::logic_error("table row has the wrong width");
  rows_.push_back(std::move(row));
}

namespace {

std::string cell_text(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_null()) return "nan";
  return v.dump();
}

json cell_json(const json& v) {
  if (v.is_number_float() && !std::isfinite(v.get<double>())) return nullptr;
  return v;
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns_.size(); ++c) out += (c ? "," : "") + columns_[c];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + cell_text(row[c]);
    out += '\n';
  }
  return out;
}

json Table::to_json() const {
  json arr = json::array();
  for (const auto& row : rows_) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[columns_[c]] = cell_json(row[c]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_physics_failure(const std::exception& e) {
  return dynamic_cast<const DegeneracyError*>(&e) || dynamic_cast<const DiscretizationError*>(&e) ||
         dynamic_cast<const IntegrationError*>(&e);
}

// Runs one sweep row; physics failures mark the row, anything else propagates.
template <typename F>
bool guarded(CommandOutput& out, const std::string& row, F&& body) {
  try {
    body();
    return true;
  } catch (const std::exception& e) {
    if (!is_physics_failure(e)) throw;
    out.failures.push_back(row + ": " + e.what());
    return false;
  }
}

CommandOutput curvature_command(const RunConfig& cfg) {
  const auto params = cfg.circuit.params();
  const CurvatureGrid g = curvature_map(params, cfg.curvature_map->grid, ChargeBasis(cfg.n_max));
  CommandOutput out;
  Table t({"phi", "q", "omega_even", "omega_odd", "omega_diff", "valid"});
  double peak = -std::numeric_limits<double>::infinity();
  json peak_at = nullptr;
  for (int j = 0; j < g.q_cells; ++j) {
    for (int i = 0; i < g.phi_cells; ++i) {
      const auto k = g.index(i, j);
      t.add({g.phi_center(i), g.q_center(j), g.even[k], g.odd[k], g.difference[k],
             static_cast<int>(g.valid[k])});
      if (g.valid[k] && g.difference[k] > peak) {
        peak = g.difference[k];
        peak_at = {{"phi", g.phi_center(i)}, {"q", g.q_center(j)}};
      }
    }
  }
  std::size_t invalid = 0;
  for (bool v : g.valid) invalid += v ? 0 : 1;
  out.results["peak_omega_diff"] = std::isfinite(peak) ? json(peak) : json(nullptr);
  out.results["peak_location"] = peak_at;
  out.results["integral_omega_diff"] =
      g.integrate_difference(g.phi_axis.front(), g.phi_axis.back(), g.q_axis.front(), g.q_axis.back());
  out.results["invalid_plaquettes"] = invalid;
  out.tables.emplace_back("curvature_map", std::move(t));
  return out;
}

CommandOutput gate_angle_command(const RunConfig& cfg) {
  const auto& ga = *cfg.gate_angle;
  const ChargeBasis basis(cfg.n_max);
  const ControlPath path = ga.loop.path();
  CommandOutput out;
  Table t({"eta", "delta", "theta", "theta_predicted", "min_gap", "status"});
  std::vector<double> ok_eta, ok_theta;
  for (double eta : ga.etas) {
    const auto params = CircuitParams::from_eta(cfg.circuit.e_sigma(), cfg.circuit.e_c, eta);
    BerryResult br;
    const bool ok = guarded(out, "eta=" + format_double(eta), [&] { br = gate_angle(params, path, basis); });
    t.add({eta, params.delta(), ok ? br.gate_angle : kNaN, predicted_gate_angle(params, kReferenceA),
           ok ? br.min_gap_on_path : kNaN, ok ? "ok" : "failed"});
    if (ok) {
      ok_eta.push_back(eta);
      ok_theta.push_back(br.gate_angle);
    }
  }
  if (ga.fit && ok_eta.size() >= 2) {
    const FitAResult f = fit_A_from_angles(ok_eta, ok_theta);
    out.results["A"] = f.A;
    out.results["A_uncertainty"] = f.uncertainty ? json(*f.uncertainty) : json(nullptr);
    out.results["A_reference"] = kReferenceA;
  }
  out.tables.emplace_back("gate_angle", std::move(t));
  return out;
}

CommandOutput dynamics_command(const RunConfig& cfg) {
  const auto& d = *cfg.dynamics;
  const auto params = cfg.circuit.params();
  const ChargeBasis basis(cfg.n_max);
  EvolveOptions opts;
  if (d.dt_ns) opts.dt = *d.dt_ns;
  CommandOutput out;
  if (d.mode == "holonomic") {
    const ControlPath path = d.loop.path();
    Table t({"tau_gate", "leakage_even", "leakage_odd", "realized_theta", "wilson_theta",
             "angle_error", "p_lz", "non_adiabatic", "status"});
    for (double tau : d.taus_ns) {
      GateReport g;
      const bool ok = guarded(out, "tau=" + format_double(tau),
                              [&] { g = simulate_holonomic_gate(params, tau, basis, opts, path); });
      if (ok)
        t.add({tau, g.leakage_even, g.leakage_odd, g.realized_theta, g.wilson_theta, g.angle_error,
               g.p_lz, static_cast<int>(g.non_adiabatic), "ok"});
      else
        t.add({tau, kNaN, kNaN, kNaN, kNaN, kNaN, landau_zener_probability(params, tau), 1, "failed"});
    }
    out.tables.emplace_back("holonomic", std::move(t));
  } else if (d.mode == "discrete_z") {
    Table t({"hold_time", "phase_even", "phase_odd", "relative_phase", "leakage", "status"});
    for (double factor : d.hold_factors) {
      const double hold = factor * ideal_z_hold_time(params);
      DiscreteZResult z;
      const bool ok = guarded(out, "hold=" + format_double(hold),
                              [&] { z = discrete_z_gate(params, hold, d.ramp_time_ns, basis, opts); });
      if (ok)
        t.add({hold, z.phase_even, z.phase_odd, z.relative_phase,
               std::max(z.leakage_even, z.leakage_odd), "ok"});
      else
        t.add({hold, kNaN, kNaN, kNaN, kNaN, "failed"});
    }
    out.results["ideal_hold_time"] = ideal_z_hold_time(params);
    out.tables.emplace_back("discrete_z", std::move(t));
  } else {
    Table t({"tau", "p_measured", "p_lz", "ratio", "leakage_even", "leakage_odd", "status"});
    for (double tau : d.taus_ns) {
      LandauZenerPoint p;
      const bool ok = guarded(out, "tau=" + format_double(tau),
                              [&] { p = landau_zener_point(params, tau, basis, opts); });
      const double p_lz_pred = landau_zener_probability(params, tau);
      if (ok)
        t.add({tau, p.p_measured, p_lz_pred, p.p_measured / p_lz_pred, p.leakage_even, p.leakage_odd, "ok"});
      else
        t.add({tau, kNaN, p_lz_pred, kNaN, kNaN, kNaN, "failed"});
    }
    out.tables.emplace_back("lz_sweep", std::move(t));
  }
  return out;
}

NoiseSpec noise_spec_for(const NoiseConfig& n, double amplitude, double dt) {
  NoiseSpec s = default_noise_spec(amplitude, n.tau_gate_ns, dt);
  if (n.f_min_ghz) s.f_min = *n.f_min_ghz;
  if (n.f_max_ghz) s.f_max = *n.f_max_ghz;
  s.validate();
  return s;
}

// The Monte Carlo time step; also fixes the default upper noise cutoff.
double noise_time_step(const RunConfig& cfg, const CircuitParams& params, const Schedule& schedule) {
  if (cfg.noise->dt_ns) return *cfg.noise->dt_ns;
  return default_time_step(params, schedule, ChargeBasis(default_n_max("noise", "monte_carlo")), 0.05);
}

CommandOutput noise_command(const RunConfig& cfg) {
  const auto& n = *cfg.noise;
  const auto params = cfg.circuit.params();
  const ChargeBasis basis(cfg.n_max);
  const ControlPath path = n.loop.path();
  CommandOutput out;
  if (n.mode == "static_offset") {
    RectangleLoop loop;
    loop.q_top = n.loop.margin_q;
    loop.q_bottom = -n.loop.margin_q;
    loop.d_phi = n.loop.d_phi_over_pi * kPi;
    loop.d_q = n.loop.d_q;
    Table t({"eps_q", "theta_nominal", "theta_shifted", "delta_theta", "relative_error", "status"});
    std::vector<double> xs, ys;
    for (double eps : n.eps_q) {
      StaticOffsetResult r;
      const bool ok = guarded(out, "eps_q=" + format_double(eps),
                              [&] { r = static_offset_error(params, eps, basis, n.shift, loop); });
      if (ok) {
        t.add({eps, r.theta_nominal, r.theta_shifted, r.delta_theta, r.relative_error, "ok"});
        if (eps > 0.0 && r.delta_theta != 0.0) {
          xs.push_back(eps);
          ys.push_back(r.delta_theta);
        }
      } else {
        t.add({eps, kNaN, kNaN, kNaN, kNaN, "failed"});
      }
    }
    if (xs.size() >= 2) {
      const PowerLawFit f = fit_power_law(xs, ys);
      out.results["exponent"] = f.exponent;
      out.results["exponent_stderr"] = f.exponent_stderr;
      out.results["prefactor"] = f.prefactor;
    }
    out.results["shift"] = n.shift == OffsetShift::symmetric ? "symmetric" : "top_only";
    out.tables.emplace_back("static_offset", std::move(t));
    return out;
  }

  const Schedule schedule = Schedule::from_path(path, n.tau_gate_ns);
  const double dt = noise_time_step(cfg, params, schedule);
  if (n.mode == "analytic_dephasing") {
    const UnprotectedTime u = unprotected_time(params, schedule, basis);
    Table t({"sqrt_A", "slope", "tau_u", "tau_u_below_ec", "gamma_sq_closed", "gamma_sq_integral",
             "infidelity", "infidelity_integral"});
    for (double a : n.sqrt_A) {
      const NoiseSpec spec = noise_spec_for(n, a, dt);
      const DephasingEstimate e = dynamic_phase_variance_analytic(u.max_slope, u.dispersion_weighted, spec);
      t.add({a, u.max_slope, u.dispersion_weighted, u.below_charging_energy, e.closed_form,
             e.integral, 0.5 * e.closed_form, 0.5 * e.integral});
    }
    out.tables.emplace_back("analytic_dephasing", std::move(t));
    return out;
  }

  MonteCarloOptions mc;
  mc.n_samples = n.n_samples;
  mc.seed = cfg.seed;
  mc.evolve.dt = dt;
  const UnprotectedTime u = unprotected_time(params, schedule, ChargeBasis(100));
  Table summary({"sqrt_A", "samples", "gamma_sq_mean", "infidelity", "infidelity_lo",
                 "infidelity_hi", "infidelity_from_gamma", "gamma_sq_analytic", "status"});
  Table samples({"sqrt_A", "sample", "seed", "gamma", "infidelity", "leakage_even", "leakage_odd"});
  std::vector<double> xs, ys;
  for (double a : n.sqrt_A) {
    const NoiseSpec spec = noise_spec_for(n, a, dt);
    const double analytic =
        dynamic_phase_variance_analytic(u.max_slope, u.dispersion_weighted, spec).closed_form;
    ErrorReport r;
    const bool ok = guarded(out, "sqrt_A=" + format_double(a),
                            [&] { r = monte_carlo_infidelity(params, n.tau_gate_ns, spec, basis, mc, path); });
    if (!ok) {
      summary.add({a, 0, kNaN, kNaN, kNaN, kNaN, kNaN, analytic, "failed"});
      continue;
    }
    summary.add({a, r.samples, r.gamma_sq_mean, r.infidelity, r.infidelity_lo, r.infidelity_hi,
                 r.infidelity_from_gamma, analytic, "ok"});
    for (std::size_t k = 0; k < r.per_sample.size(); ++k) {
      const auto& s = r.per_sample[k];
      samples.add({a, k, s.seed, s.gamma, s.infidelity, s.leakage_even, s.leakage_odd});
    }
    if (a > 0.0 && r.gamma_sq_mean > 0.0) {
      xs.push_back(a * a);
      ys.push_back(r.gamma_sq_mean);
    }
  }
  if (xs.size() >= 2) {
    const PowerLawFit f = fit_power_law(xs, ys);
    out.results["gamma_sq_vs_A_exponent"] = f.exponent;
    out.results["gamma_sq_vs_A_exponent_stderr"] = f.exponent_stderr;
  }
  out.results["dt"] = dt;
  out.results["tau_u"] = u.dispersion_weighted;
  out.results["slope"] = u.max_slope;
  out.tables.emplace_back("monte_carlo", std::move(summary));
  out.tables.emplace_back("monte_carlo_samples", std::move(samples));
  return out;
}

}  // namespace

CommandOutput run_command(const RunConfig& config) {
  if (config.command == "curvature-map") return curvature_command(config);
  if (config.command == "gate-angle") return gate_angle_command(config);
  if (config.command == "dynamics") return dynamics_command(config);
  if (config.command == "noise") return noise_command(config);
  throw ConfigError("unknown command '" + config.command + "'", 0);
}

void write_outputs(const RunConfig& config, const CommandOutput& out, double elapsed_seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  for (const auto& [stem, table] : out.tables) {
    const fs::path data = dir / (stem + (config.format == "csv" ? ".csv" : ".json"));
    {
      std::ofstream f(data, std::ios::binary);
      if (config.format == "csv") f << table.to_csv();
      else f << table.to_json().dump(2) << '\n';
      if (!f) throw std::runtime_error("cannot write " + data.string());
    }
    json meta = {{"command", config.command},
                 {"version", kVersion},
                 {"data_file", data.filename().string()},
                 {"config", config.echo},
                 {"effective", {{"seed", config.seed}, {"n_max", config.n_max},
                                {"format", config.format}, {"output_dir", config.output_dir}}},
                 {"results", out.results},
                 {"failures", out.failures},
                 {"rows", table.rows()},
                 {"elapsed_seconds", elapsed_seconds}};
    std::ofstream m(dir / (stem + ".meta.json"), std::ios::binary);
    m << meta.dump(2) << '\n';
    if (!m) throw std::runtime_error("cannot write metadata for " + stem);
    std::cout << data.string() << '\n';
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Holonomic pi-SQUID qubit simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file (comments allowed)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "master seed (overrides seed)");
    sub->add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();

  RunConfig cfg;
  try {
    cfg = load_config(config_path, command);
    if (sub->count("--out")) cfg.output_dir = out_dir;
    if (sub->count("--seed")) cfg.seed = seed;
  } catch (const std::invalid_argument& e) {  // ConfigError or ParameterError
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (threads > 0) omp_set_num_threads(threads);

  const auto start = std::chrono::steady_clock::now();
  try {
    const CommandOutput out = run_command(cfg);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(cfg, out, elapsed);
    for (const auto& f : out.failures) std::cerr << "failed row " << f << '\n';
    return out.failures.empty() ? kExitOk : kExitPhysics;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << (is_physics_failure(e) ? "physics failure: " : "error: ") << e.what() << '\n';
    return is_physics_failure(e) ? kExitPhysics : kExitError;
  }
}

}  // namespace holoq
