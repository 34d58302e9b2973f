// Charge-noise error models: static offsets, 1/f dephasing estimates,
// trajectory synthesis and Monte Carlo infidelity.

#ifndef HOLOQ_NOISE_HPP
#define HOLOQ_NOISE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "holoq/berry.hpp"
#include "holoq/circuit.hpp"
#include "holoq/dynamics.hpp"

namespace holoq {

/// S(omega) = A / omega between 2 pi f_min and 2 pi f_max (f in GHz).
struct NoiseSpec {
  double amplitude_sqrt_A = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;

  void validate() const;
  double A() const { return amplitude_sqrt_A * amplitude_sqrt_A; }
  /// Integral of S over the band: A ln(f_max / f_min).
  double variance() const;
};

/// f_min = 1 / (10 tau), f_max = 1 / (2 dt).
NoiseSpec default_noise_spec(double amplitude_sqrt_A, double tau_gate, double dt);

enum class OffsetShift {
  symmetric,  // q = +(1/2 + eps) and -(1/2 + eps)
  top_only,   // only the q = +1/2 leg moves, to 1/2 + eps
};

struct StaticOffsetResult {
  double eps_q = 0.0;
  double theta_nominal = 0.0;
  double theta_shifted = 0.0;
  double delta_theta = 0.0;
  /// delta_theta / (pi - theta_nominal).
  double relative_error = 0.0;
};

StaticOffsetResult static_offset_error(const CircuitParams& params, double eps_q,
                                       const ChargeBasis& basis,
                                       OffsetShift shift = OffsetShift::symmetric,
                                       const RectangleLoop& loop = {});

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double exponent_stderr = 0.0;
};

/// Least squares of log|y| against log x.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// d(E_even - E_odd)/dq at the point, by central differences of the sector
/// ground energies.
double dispersion_slope(const CircuitParams& params, const ControlPoint& point,
                        const ChargeBasis& basis, double h = 1e-5);

struct UnprotectedTime {
  /// Time with E2_eff < E_C.
  double below_charging_energy = 0.0;
  /// int |slope| dt / max |slope|: the length of a square pulse with the same
  /// accumulated charge sensitivity.
  double dispersion_weighted = 0.0;
  double max_slope = 0.0;
};

UnprotectedTime unprotected_time(const CircuitParams& params, const Schedule& schedule,
                                 const ChargeBasis& basis, int samples = 4000);

struct DephasingEstimate {
  /// int d omega slope^2 S(omega) (sin(omega tau_u / 2) / (omega / 2))^2
  double integral = 0.0;
  /// A (slope tau_u)^2
  double closed_form = 0.0;
};

DephasingEstimate dynamic_phase_variance_analytic(double slope, double tau_u,
                                                  const NoiseSpec& noise);

/// Frequency-domain synthesis with random phases. Bin k carries amplitude
/// sqrt(2 P_k), P_k the integral of S over the bin within the band, which is
/// sqrt(2 S(omega_k) d omega) away from the band edges. The trajectory spans
/// at least 1 / f_min and is cut to `duration`.
ChargeTrajectory synthesize_one_over_f(const NoiseSpec& noise, double duration, double dt,
                                       std::uint64_t seed);

/// Independent per-sample seed.
std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index);

struct MonteCarloSample {
  std::uint64_t seed = 0;
  /// Odd minus even phase error against the noiseless run.
  double gamma = 0.0;
  /// 1 - |<ideal|real>| for the equal superposition of the two sectors.
  double infidelity = 0.0;
  double leakage_even = 0.0;
  double leakage_odd = 0.0;
};

struct ErrorReport {
  double gamma_sq_mean = 0.0;
  /// Mean of the sampled overlap infidelities and its 95% interval.
  double infidelity = 0.0;
  double infidelity_lo = 0.0;
  double infidelity_hi = 0.0;
  /// gamma_sq_mean / 2.
  double infidelity_from_gamma = 0.0;
  std::size_t samples = 0;
  std::vector<MonteCarloSample> per_sample;
};

struct MonteCarloOptions {
  std::size_t n_samples = 300;
  std::uint64_t seed = 1;
  EvolveOptions evolve{};
};

ErrorReport monte_carlo_infidelity(const CircuitParams& params, double tau_gate,
                                   const NoiseSpec& noise, const ChargeBasis& basis,
                                   const MonteCarloOptions& options,
                                   const ControlPath& path = standard_loop());
ErrorReport monte_carlo_infidelity_serial(const CircuitParams& params, double tau_gate,
                                          const NoiseSpec& noise, const ChargeBasis& basis,
                                          const MonteCarloOptions& options,
                                          const ControlPath& path = standard_loop());

}  // namespace holoq

#endif  // HOLOQ_NOISE_HPP
