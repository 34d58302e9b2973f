// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit
// status is nonzero when any selected criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "holoq/berry.hpp"
#include "holoq/dynamics.hpp"
#include "holoq/noise.hpp"

using namespace holoq;

namespace {

const double kESigma = 2.0 * kPi * 40.0;
const double kEc = 0.1;

CircuitParams params_eta(double eta) { return CircuitParams::from_eta(kESigma, kEc, eta); }

bool report(int n, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double angular_distance(double a, double b) { return std::abs(wrap_phase(a - b)); }

// A in [2.92, 3.02] from the eta sweep at n_max = 100.
bool criterion_1() {
  const std::vector<double> etas{0.02, 0.04, 0.06, 0.08, 0.10};
  const auto f = fit_A(kESigma, kEc, etas, ChargeBasis(100));
  for (std::size_t k = 0; k < etas.size(); ++k)
    std::printf("    eta=%.2f theta=%.9f\n", etas[k], f.thetas[k]);
  return report(1, f.A >= 2.92 && f.A <= 3.02,
                fmt("A = %.5f +- %.5f, band [2.92, 3.02]", f.A, f.uncertainty.value_or(0.0)));
}

bool criterion_2() {
  const auto r = gate_angle(params_eta(0.0), standard_loop(), ChargeBasis(100));
  const double err = angular_distance(r.gate_angle, kPi);
  return report(2, err < 1e-3, fmt("theta(eta=0) = %.12f, |theta - pi| = %.3e < 1e-3", r.gate_angle, err));
}

// Theta(eta) decreasing, below 0.3 rad for eta >= 1.5.
bool criterion_3() {
  const std::vector<double> etas{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  const ChargeBasis basis(100);
  std::vector<double> theta;
  for (double eta : etas) {
    // Angles near pi are reported on the (0, 2 pi) branch for the ordering check.
    double t = gate_angle(params_eta(eta), standard_loop(), basis).gate_angle;
    if (t < 0.0) t += 2.0 * kPi;
    theta.push_back(t);
    std::printf("    eta=%.2f theta=%.6f\n", eta, t);
  }
  bool monotonic = true;
  for (std::size_t k = 1; k < theta.size(); ++k) monotonic = monotonic && theta[k] < theta[k - 1];
  bool below = true;
  for (std::size_t k = 0; k < etas.size(); ++k)
    if (etas[k] >= 1.5) below = below && theta[k] < 0.3;
  return report(3, monotonic && below,
                fmt("monotonic=%s, theta(1.5) = %.4f, theta(2.0) = %.4f, required < 0.3",
                    monotonic ? "yes" : "no", theta[6], theta.back()));
}

// Plaquette sum over the loop interior against the Wilson loop.
bool criterion_4() {
  const auto p = params_eta(0.1);
  const ChargeBasis basis(100);
  const GridSpec g{0.0, kPi, -0.5, 0.5, 1000, 100};
  const auto map = curvature_map(p, g, basis);
  const double stokes = map.integrate_difference(0.0, kPi, -0.5, 0.5);
  const double wilson = gate_angle(p, standard_loop(), basis).gate_angle;
  const auto zoom = curvature_map(p, zoom_curvature_grid(p), basis);
  const GridSpec z = zoom_curvature_grid(p);
  std::printf("    zoom grid (window only): %.6f\n", zoom.integrate_difference(z.phi_min, z.phi_max, z.q_min, z.q_max));
  const double err = angular_distance(stokes, wilson);
  return report(4, err < 1e-3,
                fmt("interior sum = %.9f, wilson = %.9f, diff %.3e < 1e-3", stokes, wilson, err));
}

bool criterion_5() {
  const auto p = params_eta(0.1);
  const ChargeBasis basis(100);
  auto pts = standard_loop().sample();
  pts.pop_back();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  double worst = 0.0;
  for (Parity s : kParities) {
    const PathStates ps = sample_ground_states(p, pts, basis, s);
    auto closed = ps.states;
    closed.push_back(closed.front());
    const double reference = overlap_product_phase(closed);
    for (int trial = 0; trial < 100; ++trial) {
      auto rotated = ps.states;
      for (auto& v : rotated) v *= std::polar(1.0, phase(rng));
      rotated.push_back(rotated.front());
      worst = std::max(worst, angular_distance(overlap_product_phase(rotated), reference));
    }
  }
  return report(5, worst < 1e-12, fmt("max change over 100 trials x 2 sectors = %.3e < 1e-12", worst));
}

// Analytic near-peak curvature against the numeric difference layer, and
// its integral over the whole plane.
bool criterion_6() {
  const auto p = CircuitParams::from_dimensionless(kESigma, kEc, 0.05);
  const ChargeBasis basis(100);
  const double h = 1e-3;
  double worst = 0.0, worst_projected = 0.0;
  for (double q : {-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3}) {
    const GridSpec g{kPi / 2 - h, kPi / 2 + h, q - h, q + h, 1, 1};
    const double numeric = curvature_map(p, g, basis).difference[0];
    const double printed = analytic_curvature_total(p, kPi / 2, q);
    const double projected = analytic_curvature_total_projected(p, kPi / 2, q);
    const double rel = std::abs(printed - numeric) / std::abs(numeric);
    const double rel_projected = std::abs(projected - numeric) / std::abs(numeric);
    worst = std::max(worst, rel);
    worst_projected = std::max(worst_projected, rel_projected);
    std::printf("    q=%+.1f numeric=%.4f printed=%.4f (%.1f%%) projected=%.4f (%.1f%%)\n", q, numeric,
                printed, 100 * rel, projected, 100 * rel_projected);
  }
  boost::math::quadrature::exp_sinh<double> quad;
  const double total = 4.0 * quad.integrate([&](double q) {
    return quad.integrate([&](double alpha) { return analytic_curvature_peak(p, alpha, q); });
  });
  const bool pass = worst <= 0.15 && std::abs(total - kPi) < 1e-3;
  return report(6, pass,
                fmt("max rel. deviation %.1f%% (limit 15%%; charge-term-doubled variant %.1f%%), "
                    "plane integral = %.9f (pi within 1e-3)",
                    100 * worst, 100 * worst_projected, total));
}

bool criterion_7() {
  const auto p = params_eta(0.1);
  const ChargeBasis basis(14);
  bool ratios_ok = true;
  for (double tau : {8.0, 10.0, 12.0, 14.0, 16.0, 18.0}) {
    const auto lz = landau_zener_point(p, tau, basis);
    const double ratio = lz.p_measured / lz.p_predicted;
    std::printf("    tau=%4.1f P_meas=%.4e P_pred=%.4e ratio=%.3f\n", tau, lz.p_measured, lz.p_predicted, ratio);
    if (lz.p_predicted >= 1e-5 && lz.p_predicted <= 1e-2) ratios_ok = ratios_ok && ratio >= 0.5 && ratio <= 2.0;
  }
  const auto at15 = landau_zener_point(p, 15.0, basis);
  const bool window = at15.p_measured >= 3e-5 && at15.p_measured <= 3e-4;
  return report(7, ratios_ok && window,
                fmt("ratios within [0.5, 2]: %s; leakage(15 ns) = %.3e in [3e-5, 3e-4]",
                    ratios_ok ? "yes" : "no", at15.p_measured));
}

// Ideal Z(pi/2) and its sensitivity to a 1% hold-time error. The relative
// phase of an unprotected charge qubit would move by (pi/2) x 1%; we require
// at least a factor 100 suppression of that first-order term.
bool criterion_8() {
  const auto p = CircuitParams::from_dimensionless(kESigma, kEc, 0.0);
  const ChargeBasis basis(14);
  const double T = ideal_z_hold_time(p);
  const auto ideal = discrete_z_gate(p, T, 0.0, basis);
  const auto plus = discrete_z_gate(p, 1.01 * T, 0.0, basis);
  const auto minus = discrete_z_gate(p, 0.99 * T, 0.0, basis);
  const double err = angular_distance(ideal.relative_phase, -kPi / 2);
  const double first_order = 0.5 * std::abs(wrap_phase(plus.relative_phase - minus.relative_phase));
  const double unprotected = kPi / 2 * 0.01;
  const bool pass = err < 1e-8 && first_order < 1e-2 * unprotected;
  return report(8, pass,
                fmt("relative phase = %.12f (err %.2e < 1e-8); +-1%% timing: first-order shift %.3e rad "
                    "vs unprotected %.3e (ratio %.2e < 1e-2), leakage %.2e",
                    ideal.relative_phase, err, first_order, unprotected, first_order / unprotected,
                    plus.leakage_odd));
}

// Static offset: exponent of the power law and relative error at 1e-2,
// with both horizontal legs shifted outward (the default).
bool criterion_9() {
  const auto p = params_eta(0.1);
  const ChargeBasis basis(100);
  const std::vector<double> eps{1e-3, 3e-3, 1e-2, 3e-2};
  std::vector<double> dtheta;
  double rel = 0.0;
  for (double e : eps) {
    const auto r = static_offset_error(p, e, basis, OffsetShift::symmetric);
    dtheta.push_back(r.delta_theta);
    if (e == 1e-2) rel = r.relative_error;
    std::printf("    eps=%.0e delta_theta=%.4e rel=%.3e\n", e, r.delta_theta, r.relative_error);
  }
  const auto fit = fit_power_law(eps, dtheta);
  const auto top = static_offset_error(p, 1e-2, basis, OffsetShift::top_only);
  const bool pass = std::abs(fit.exponent - 2.0) <= 0.1 && std::abs(rel) <= 3e-4;
  return report(9, pass,
                fmt("exponent = %.4f +- %.4f (2.0 +- 0.1); |relative error(1e-2)| = %.3e (<= 3e-4), "
                    "single-leg shift gives %.3e",
                    fit.exponent, fit.exponent_stderr, std::abs(rel), std::abs(top.relative_error)));
}

bool criterion_10() {
  const auto p = params_eta(0.1);
  const double tau = 15.0;
  const ControlPath path = standard_loop();
  const Schedule schedule = Schedule::from_path(path, tau);
  const ChargeBasis mc_basis(12);
  const double dt = default_time_step(p, schedule, mc_basis, 0.05);
  const UnprotectedTime u = unprotected_time(p, schedule, ChargeBasis(100));
  bool analytic_ok = true, agree = true;
  for (double a : {1.5e-4, 6.5e-4}) {
    const NoiseSpec spec = default_noise_spec(a, tau, dt);
    const auto est = dynamic_phase_variance_analytic(u.max_slope, u.dispersion_weighted, spec);
    const double one_minus_f = 0.5 * est.closed_form;
    analytic_ok = analytic_ok && one_minus_f >= 3e-6 && one_minus_f <= 3e-4;
    MonteCarloOptions mc;
    mc.n_samples = 300;
    mc.seed = 1;
    mc.evolve.dt = dt;
    const auto r = monte_carlo_infidelity(p, tau, spec, mc_basis, mc, path);
    const double g_ratio = r.gamma_sq_mean / est.closed_form;
    const double f_ratio = r.infidelity / one_minus_f;
    agree = agree && g_ratio >= 0.5 && g_ratio <= 2.0 && f_ratio >= 0.5 && f_ratio <= 2.0;
    std::printf("    sqrtA=%.1e analytic 1-F=%.3e gamma^2=%.3e | MC 1-F=%.3e [%.2e, %.2e] gamma^2=%.3e "
                "| ratios 1-F %.2f gamma^2 %.2f\n",
                a, one_minus_f, est.closed_form, r.infidelity, r.infidelity_lo, r.infidelity_hi,
                r.gamma_sq_mean, f_ratio, g_ratio);
  }
  return report(10, analytic_ok && agree,
                fmt("analytic 1-F in [3e-6, 3e-4]: %s; Monte Carlo (300 samples) within x2: %s "
                    "(slope %.3f, tau_u %.4f ns)",
                    analytic_ok ? "yes" : "no", agree ? "yes" : "no", u.max_slope, u.dispersion_weighted));
}

bool criterion_11() {
  const auto p = params_eta(0.1);
  const ChargeBasis basis(100);
  double worst = 0.0;
  for (double q : {0.5, -0.5})
    for (int k = 0; k <= 1000; ++k) {
      const ControlPoint pt{kPi * k / 1000.0, q};
      worst = std::max(worst, std::abs(ground_energy(p, pt, basis, Parity::even) -
                                       ground_energy(p, pt, basis, Parity::odd)));
    }
  const double nominal = gate_angle(p, standard_loop(), basis).gate_angle;
  double shift = 0.0;
  for (double d : {0.01, -0.01}) {
    RectangleLoop r;
    r.phi_left = d;
    r.phi_right = kPi - d;
    shift = std::max(shift, angular_distance(gate_angle(p, r.path(), basis).gate_angle, nominal));
  }
  return report(11, worst < 1e-10 * p.e_c() && shift < 1e-6,
                fmt("max |E_even - E_odd| on q = +-1/2 = %.3e E_C (< 1e-10); "
                    "phi shift 1e-2 of vertical legs changes theta by %.3e (< 1e-6)",
                    worst / p.e_c(), shift));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holoq acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion numbers (default: all)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  const std::vector<std::function<bool()>> checks{criterion_1, criterion_2, criterion_3, criterion_4,
                                                  criterion_5, criterion_6, criterion_7, criterion_8,
                                                  criterion_9, criterion_10, criterion_11};
  if (selected.empty())
    for (int k = 1; k <= 11; ++k) selected.push_back(k);
  bool all = true;
  for (int k : selected) {
    try {
      all = checks[static_cast<std::size_t>(k - 1)]() && all;
    } catch (const std::exception& e) {
      all = report(k, false, std::string("error: ") + e.what()) && all;
    }
  }
  return all ? 0 : 1;
}
