#include "holoq/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

namespace holoq {

void NoiseSpec::validate() const {
  if (!(amplitude_sqrt_A >= 0.0) || !std::isfinite(amplitude_sqrt_A))
    throw ParameterError("noise amplitude sqrt(A) must be non-negative");
  if (!(f_min > 0.0) || !(f_max > f_min) || !std::isfinite(f_max))
    throw ParameterError("noise cutoffs need 0 < f_min < f_max");
}

double NoiseSpec::variance() const { return A() * std::log(f_max / f_min); }

NoiseSpec default_noise_spec(double amplitude_sqrt_A, double tau_gate, double dt) {
  return NoiseSpec{amplitude_sqrt_A, 1.0 / (10.0 * tau_gate), 1.0 / (2.0 * dt)};
}

StaticOffsetResult static_offset_error(const CircuitParams& params, double eps_q,
                                       const ChargeBasis& basis, OffsetShift shift,
                                       const RectangleLoop& loop) {
  if (!(std::abs(eps_q) < 0.1)) throw ParameterError("eps_q must satisfy |eps_q| < 0.1");
  RectangleLoop moved = loop;
  moved.q_top += eps_q;
  if (shift == OffsetShift::symmetric) moved.q_bottom -= eps_q;
  StaticOffsetResult r;
  r.eps_q = eps_q;
  r.theta_nominal = gate_angle(params, loop.path(), basis).gate_angle;
  r.theta_shifted = eps_q == 0.0 ? r.theta_nominal : gate_angle(params, moved.path(), basis).gate_angle;
  r.delta_theta = wrap_phase(r.theta_shifted - r.theta_nominal);
  r.relative_error = r.delta_theta / (kPi - r.theta_nominal);
  return r;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("power-law fit needs two or more points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || y[k] == 0.0) throw ParameterError("power-law fit needs x > 0 and y != 0");
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(std::abs(y[k])));
    sx += lx.back();
    sy += ly.back();
    sxx += lx.back() * lx.back();
    sxy += lx.back() * ly.back();
  }
  const double denom = n * sxx - sx * sx;
  PowerLawFit f;
  f.exponent = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - f.exponent * sx) / n;
  f.prefactor = std::exp(intercept);
  if (x.size() > 2) {
    double ss = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      const double r = ly[k] - intercept - f.exponent * lx[k];
      ss += r * r;
    }
    f.exponent_stderr = std::sqrt(ss / (n - 2.0) * n / denom);
  }
  return f;
}

double dispersion_slope(const CircuitParams& params, const ControlPoint& point,
                        const ChargeBasis& basis, double h) {
  auto splitting = [&](double q) {
    const ControlPoint p{point.phi, q};
    return ground_energy(params, p, basis, Parity::even) - ground_energy(params, p, basis, Parity::odd);
  };
  return (splitting(point.q + h) - splitting(point.q - h)) / (2.0 * h);
}

UnprotectedTime unprotected_time(const CircuitParams& params, const Schedule& schedule,
                                 const ChargeBasis& basis, int samples) {
  if (samples < 1) throw ParameterError("unprotected_time needs at least one sample");
  const double dt = schedule.duration() / samples;
  std::vector<double> slopes(static_cast<std::size_t>(samples));
  UnprotectedTime u;
  for (int k = 0; k < samples; ++k) {
    const ControlPoint p = schedule.at((k + 0.5) * dt);
    if (effective_josephson(params, p.phi) < params.e_c()) u.below_charging_energy += dt;
  }
#pragma omp parallel for schedule(static)
  for (int k = 0; k < samples; ++k)
    slopes[static_cast<std::size_t>(k)] =
        std::abs(dispersion_slope(params, schedule.at((k + 0.5) * dt), basis));
  double area = 0.0;
  for (double s : slopes) {
    area += s * dt;
    u.max_slope = std::max(u.max_slope, s);
  }
  u.dispersion_weighted = u.max_slope > 0.0 ? area / u.max_slope : 0.0;
  return u;
}

DephasingEstimate dynamic_phase_variance_analytic(double slope, double tau_u,
                                                  const NoiseSpec& noise) {
  if (!(tau_u > 0.0)) throw ParameterError("tau_u must be positive");
  noise.validate();
  DephasingEstimate d;
  const double scale = noise.A() * slope * slope * tau_u * tau_u;
  d.closed_form = scale;
  if (scale == 0.0) return d;
  // With x = omega tau_u / 2 the integral is scale * int sin^2 x / x^3 dx.
  const double x_lo = kPi * noise.f_min * tau_u;
  const double x_hi = kPi * noise.f_max * tau_u;
  auto f = [](double x) {
    const double s = x < 1e-4 ? 1.0 - x * x / 3.0 : std::sin(x) / x;
    return s * s / x;
  };
  using boost::math::quadrature::gauss_kronrod;
  constexpr double kTailStart = 1e3;
  double sum = 0.0;
  double a = x_lo;
  while (a < std::min(x_hi, kTailStart)) {
    const double b = std::min({x_hi, kTailStart, a < 1.0 ? std::min(10.0 * a, 1.0) : a + kPi});
    sum += gauss_kronrod<double, 61>::integrate(f, a, b, 0, 1e-14);
    a = b;
  }
  // sin^2 averages to 1/2 past the last chunk.
  if (x_hi > a) sum += 0.25 * (1.0 / (a * a) - 1.0 / (x_hi * x_hi));
  d.integral = scale * sum;
  return d;
}

std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ChargeTrajectory synthesize_one_over_f(const NoiseSpec& noise, double duration, double dt,
                                       std::uint64_t seed) {
  noise.validate();
  if (!(dt > 0.0) || !(duration > 0.0)) throw ParameterError("duration and dt must be positive");
  if (duration / dt < 16.0) throw ParameterError("trajectory needs at least 16 samples");
  if (noise.f_max > 0.5 / dt * (1.0 + 1e-12))
    throw ParameterError("f_max lies above the Nyquist frequency of the sampling grid");
  const double span = std::max(duration, 1.0 / noise.f_min);
  std::size_t n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
  n += n % 2;
  const std::size_t keep = std::min(n, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)) + 1);

  ChargeTrajectory out;
  out.dt = dt;
  if (noise.amplitude_sqrt_A == 0.0) {
    out.samples.assign(keep, 0.0);
    return out;
  }

  const std::size_t bins = n / 2 + 1;
  auto* spectrum = fftw_alloc_complex(bins);
  double* signal = fftw_alloc_real(n);
  fftw_plan plan;
#pragma omp critical(holoq_fftw_plan)
  plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spectrum, signal, FFTW_ESTIMATE);

  std::mt19937_64 rng(seed);
  const double d_omega = 2.0 * kPi / (static_cast<double>(n) * dt);
  const double omega_min = 2.0 * kPi * noise.f_min, omega_max = 2.0 * kPi * noise.f_max;
  for (std::size_t k = 0; k < bins; ++k) {
    spectrum[k][0] = 0.0;
    spectrum[k][1] = 0.0;
    // One phase draw per bin keeps the stream independent of the cutoffs.
    const double phase = 2.0 * kPi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (k == 0 || k == n / 2) continue;
    // Power of S integrated over the bin, clipped to the band, so the
    // trajectory variance is A ln(f_max / f_min) for any span.
    const double lo = std::max((static_cast<double>(k) - 0.5) * d_omega, omega_min);
    const double hi = std::min((static_cast<double>(k) + 0.5) * d_omega, omega_max);
    if (!(hi > lo)) continue;
    const double amplitude = std::sqrt(2.0 * noise.A() * std::log(hi / lo));
    // c2r sums X_k and its conjugate, so half the amplitude goes in each.
    spectrum[k][0] = 0.5 * amplitude * std::cos(phase);
    spectrum[k][1] = 0.5 * amplitude * std::sin(phase);
  }
  fftw_execute(plan);
  out.samples.assign(signal, signal + keep);
#pragma omp critical(holoq_fftw_plan)
  fftw_destroy_plan(plan);
  fftw_free(spectrum);
  fftw_free(signal);
  return out;
}

namespace {

struct SectorReference {
  Eigen::VectorXcd start;
  Eigen::VectorXcd end;
  Eigen::VectorXcd ideal;
};

template <bool Parallel>
ErrorReport monte_carlo_impl(const CircuitParams& params, double tau_gate, const NoiseSpec& noise,
                             const ChargeBasis& basis, const MonteCarloOptions& options,
                             const ControlPath& path) {
  noise.validate();
  if (options.n_samples < 1) throw ParameterError("Monte Carlo needs at least one sample");
  const Schedule schedule = Schedule::from_path(path, tau_gate);
  EvolveOptions evolve_options = options.evolve;
  // A common step keeps noisy and ideal runs on the same time grid; the
  // margin covers the noise excursion in q.
  if (evolve_options.dt <= 0.0) evolve_options.dt = default_time_step(params, schedule, basis, 0.05);
  const double noise_dt = std::max(evolve_options.dt, 0.5 / noise.f_max);

  SectorReference ref[2];
  for (Parity parity : kParities) {
    auto& r = ref[parity == Parity::even ? 0 : 1];
    const auto& w = schedule.waypoints();
    r.start = lowest_levels(params, w.front().point, basis, parity, evolve_options.spectral).state;
    r.end = lowest_levels(params, w.back().point, basis, parity, evolve_options.spectral).state;
    r.ideal = propagate(params, schedule, basis, parity, r.start, evolve_options).state;
  }

  const auto n = static_cast<std::ptrdiff_t>(options.n_samples);
  std::vector<MonteCarloSample> samples(options.n_samples);
#pragma omp parallel for schedule(dynamic, 1) if (Parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    MonteCarloSample& s = samples[static_cast<std::size_t>(k)];
    s.seed = sample_seed(options.seed, static_cast<std::uint64_t>(k));
    const ChargeTrajectory trajectory = synthesize_one_over_f(noise, tau_gate, noise_dt, s.seed);
    EvolveOptions noisy = evolve_options;
    noisy.charge_noise = &trajectory;
    cplx overlap[2];
    for (int p = 0; p < 2; ++p) {
      const Parity parity = p == 0 ? Parity::even : Parity::odd;
      const Eigen::VectorXcd psi =
          propagate(params, schedule, basis, parity, ref[p].start, noisy).state;
      overlap[p] = ref[p].ideal.dot(psi);
      const double leak = std::clamp(1.0 - std::norm(ref[p].end.dot(psi)), 0.0, 1.0);
      (p == 0 ? s.leakage_even : s.leakage_odd) = leak;
    }
    s.gamma = wrap_phase(std::arg(overlap[1]) - std::arg(overlap[0]));
    s.infidelity = std::clamp(1.0 - std::abs(0.5 * (overlap[0] + overlap[1])), 0.0, 1.0);
  }

  ErrorReport r;
  r.samples = samples.size();
  double g2 = 0.0, mean = 0.0;
  for (const auto& s : samples) {
    g2 += s.gamma * s.gamma;
    mean += s.infidelity;
  }
  const double count = static_cast<double>(samples.size());
  r.gamma_sq_mean = g2 / count;
  r.infidelity = mean / count;
  double var = 0.0;
  for (const auto& s : samples) var += (s.infidelity - r.infidelity) * (s.infidelity - r.infidelity);
  const double half_width = samples.size() > 1 ? 1.96 * std::sqrt(var / (count - 1.0) / count) : 0.0;
  r.infidelity_lo = std::clamp(r.infidelity - half_width, 0.0, 1.0);
  r.infidelity_hi = std::clamp(r.infidelity + half_width, 0.0, 1.0);
  r.infidelity_from_gamma = 0.5 * r.gamma_sq_mean;
  r.per_sample = std::move(samples);
  return r;
}

}  // namespace

ErrorReport monte_carlo_infidelity(const CircuitParams& params, double tau_gate,
                                   const NoiseSpec& noise, const ChargeBasis& basis,
                                   const MonteCarloOptions& options, const ControlPath& path) {
  return monte_carlo_impl<true>(params, tau_gate, noise, basis, options, path);
}

ErrorReport monte_carlo_infidelity_serial(const CircuitParams& params, double tau_gate,
                                          const NoiseSpec& noise, const ChargeBasis& basis,
                                          const MonteCarloOptions& options,
                                          const ControlPath& path) {
  return monte_carlo_impl<false>(params, tau_gate, noise, basis, options, path);
}

}  // namespace holoq
