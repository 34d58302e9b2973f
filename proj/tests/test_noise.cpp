#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "holoq/noise.hpp"

using namespace holoq;

namespace {

const double kESigma = 2.0 * kPi * 40.0;

CircuitParams nominal_params() { return CircuitParams::from_eta(kESigma, 0.1, 0.1); }

double mean_square(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST(StaticOffset, ZeroOffsetIsExact) {
  const auto p = nominal_params();
  RectangleLoop loop;
  loop.d_phi = 0.004 * kPi;
  loop.d_q = 0.02;
  for (OffsetShift s : {OffsetShift::symmetric, OffsetShift::top_only}) {
    const auto r = static_offset_error(p, 0.0, ChargeBasis(40), s, loop);
    EXPECT_LT(std::abs(r.delta_theta), 1e-12);
  }
}

TEST(StaticOffset, QuadraticInOffset) {
  const auto p = nominal_params();
  RectangleLoop loop;
  loop.d_phi = 0.004 * kPi;
  loop.d_q = 0.02;
  std::vector<double> eps{3e-3, 1e-2, 3e-2}, dtheta;
  for (double e : eps) dtheta.push_back(static_offset_error(p, e, ChargeBasis(40), OffsetShift::symmetric, loop).delta_theta);
  const auto fit = fit_power_law(eps, dtheta);
  EXPECT_NEAR(fit.exponent, 2.0, 0.05);
}

TEST(StaticOffset, ResponseIsEvenInOffset) {
  const auto p = nominal_params();
  RectangleLoop loop;
  loop.d_phi = 0.004 * kPi;
  loop.d_q = 0.02;
  const double up = static_offset_error(p, 1e-2, ChargeBasis(40), OffsetShift::symmetric, loop).delta_theta;
  const double down = static_offset_error(p, -1e-2, ChargeBasis(40), OffsetShift::symmetric, loop).delta_theta;
  EXPECT_LT(std::abs(up - down) / 2, 0.1 * std::abs(up + down) / 2);
}

TEST(PowerLaw, RecoversExactExponent) {
  const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (double v : x) y.push_back(-3.0 * std::pow(v, 1.5));
  const auto f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 1.5, 1e-12);
  EXPECT_NEAR(f.prefactor, 3.0, 1e-10);
  EXPECT_LT(f.exponent_stderr, 1e-10);
}

TEST(Dispersion, SlopeOnDegeneracyLines) {
  const auto p = nominal_params();
  const ChargeBasis basis(100);
  const double top = dispersion_slope(p, {kPi / 2, 0.5}, basis);
  const double bottom = dispersion_slope(p, {kPi / 2, -0.5}, basis);
  EXPECT_NEAR(top, -bottom, 1e-6 * std::abs(top));
  EXPECT_NEAR(std::abs(top), 2.0 * p.e_c(), 0.05 * 2.0 * p.e_c());
  EXPECT_LT(std::abs(dispersion_slope(p, {0.0, 0.5}, basis)), 1e-2 * p.e_c());
}

TEST(Dispersion, UnprotectedTimeOfStandardLoop) {
  const auto u = unprotected_time(nominal_params(), Schedule::from_path(standard_loop(), 15.0), ChargeBasis(40));
  EXPECT_GT(u.dispersion_weighted, 1.1);
  EXPECT_LT(u.dispersion_weighted, 1.3);
  EXPECT_GT(u.below_charging_energy, 0.3);
  EXPECT_LT(u.below_charging_energy, 0.5);
}

TEST(Dephasing, ClosedFormScaling) {
  const NoiseSpec n{1e-3, 1e-3, 10.0};
  const auto a = dynamic_phase_variance_analytic(25.0, 1.0, n);
  const auto b = dynamic_phase_variance_analytic(25.0, 2.0, n);
  EXPECT_NEAR(a.closed_form, 1e-6 * 625.0, 1e-15);
  EXPECT_NEAR(b.closed_form / a.closed_form, 4.0, 1e-12);
  EXPECT_GT(a.integral, 0.0);
  const auto zero = dynamic_phase_variance_analytic(25.0, 1.0, NoiseSpec{0.0, 1e-3, 10.0});
  EXPECT_EQ(zero.integral, 0.0);
  EXPECT_EQ(zero.closed_form, 0.0);
}

TEST(Dephasing, IntegralMatchesDirectQuadrature) {
  // Midpoint rule on a log grid as an independent check.
  const NoiseSpec n{1e-3, 1e-2, 5.0};
  const double slope = 20.0, tau = 1.2;
  const auto est = dynamic_phase_variance_analytic(slope, tau, n);
  const double lo = std::log(2 * kPi * n.f_min), hi = std::log(2 * kPi * n.f_max);
  const int m = 400000;
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double w = std::exp(lo + (hi - lo) * (k + 0.5) / m);
    const double window = std::sin(w * tau / 2) / (w / 2);
    sum += slope * slope * n.A() / w * window * window * w;
  }
  sum *= (hi - lo) / m;
  EXPECT_NEAR(est.integral, sum, 1e-6 * sum);
}

TEST(Synthesis, ZeroAmplitudeGivesZeroTrajectory) {
  const NoiseSpec n{0.0, 1e-2, 1.0};
  EXPECT_EQ(n.variance(), 0.0);
  const auto t = synthesize_one_over_f(n, 20.0, 0.5, 7);
  ASSERT_EQ(t.samples.size(), 41u);
  for (double v : t.samples) EXPECT_EQ(v, 0.0);
}

TEST(Synthesis, BinAmplitudesFollowSpectrum) {
  // Over the full span every bin is a single cosine; inside the band its
  // amplitude is close to sqrt(2 S d omega).
  const NoiseSpec n{1e-3, 0.05, 0.4};
  const double dt = 0.5, span = 1.0 / n.f_min;
  const auto t = synthesize_one_over_f(n, span * (1 - 1e-12), dt, 3);
  const std::size_t len = static_cast<std::size_t>(std::llround(span / dt));
  ASSERT_GE(t.samples.size(), len);
  const double d_omega = 2 * kPi / span;
  for (int k : {0, 3, 5, 6, 7, 9}) {
    std::complex<double> x = 0.0;
    for (std::size_t j = 0; j < len; ++j)
      x += t.samples[j] * std::polar(1.0, -2 * kPi * k * static_cast<double>(j) / static_cast<double>(len));
    const double amplitude = 2.0 * std::abs(x) / static_cast<double>(len);
    const double omega = k * d_omega;
    const double f = omega / (2 * kPi);
    const double expected = (f > n.f_min && f < n.f_max) ? std::sqrt(2 * n.A() / omega * d_omega) : 0.0;
    EXPECT_NEAR(amplitude, expected, 0.01 * expected + 1e-12) << "bin " << k;
  }
}

TEST(Synthesis, DecadeVariance) {
  const NoiseSpec n{2e-3, 0.01, 0.1};
  const double dt = 0.5, span = 10000.0;
  const auto t = synthesize_one_over_f(n, span - dt, dt, 11);
  EXPECT_NEAR(mean_square(t.samples), n.A() * std::log(10.0), 0.01 * n.A() * std::log(10.0));
}

TEST(Synthesis, EnsembleVarianceAcrossSeeds) {
  const NoiseSpec n{1e-3, 0.01, 1.0};
  std::vector<double> first;
  for (std::uint64_t k = 0; k < 2000; ++k)
    first.push_back(synthesize_one_over_f(n, 10.0, 0.5, sample_seed(9, k)).samples.front());
  double mean = 0.0;
  for (double v : first) mean += v;
  mean /= static_cast<double>(first.size());
  EXPECT_LT(std::abs(mean), 0.1 * std::sqrt(n.variance()));
  EXPECT_NEAR(mean_square(first), n.variance(), 0.1 * n.variance());
}

TEST(Synthesis, Deterministic) {
  const NoiseSpec n{1e-3, 0.01, 1.0};
  const auto a = synthesize_one_over_f(n, 30.0, 0.25, 42);
  const auto b = synthesize_one_over_f(n, 30.0, 0.25, 42);
  const auto c = synthesize_one_over_f(n, 30.0, 0.25, 43);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  EXPECT_NE(sample_seed(1, 0), sample_seed(1, 1));
  EXPECT_NE(sample_seed(1, 0), sample_seed(2, 0));
}

TEST(Synthesis, RejectsBadBand) {
  EXPECT_THROW(synthesize_one_over_f(NoiseSpec{1e-3, 0.0, 1.0}, 10.0, 0.1, 1), ParameterError);
  EXPECT_THROW(synthesize_one_over_f(NoiseSpec{1e-3, 0.1, 10.0}, 10.0, 0.1, 1), ParameterError);
}

TEST(MonteCarlo, ParallelMatchesSerial) {
  const auto p = nominal_params();
  MonteCarloOptions opts;
  opts.n_samples = 3;
  opts.seed = 5;
  const NoiseSpec n{6.5e-4, 1.0 / 150.0, 5.0};
  const auto a = monte_carlo_infidelity(p, 15.0, n, ChargeBasis(12), opts);
  const auto b = monte_carlo_infidelity_serial(p, 15.0, n, ChargeBasis(12), opts);
  ASSERT_EQ(a.per_sample.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a.per_sample[k].seed, b.per_sample[k].seed);
    EXPECT_EQ(a.per_sample[k].gamma, b.per_sample[k].gamma);
    EXPECT_EQ(a.per_sample[k].infidelity, b.per_sample[k].infidelity);
  }
  EXPECT_EQ(a.gamma_sq_mean, b.gamma_sq_mean);
  EXPECT_GT(a.gamma_sq_mean, 0.0);
  EXPECT_NEAR(a.infidelity_from_gamma, a.gamma_sq_mean / 2, 1e-18);
}

TEST(MonteCarlo, NoiselessRunIsIdeal) {
  MonteCarloOptions opts;
  opts.n_samples = 2;
  const auto r = monte_carlo_infidelity(nominal_params(), 15.0, NoiseSpec{0.0, 1.0 / 150.0, 5.0},
                                        ChargeBasis(12), opts);
  EXPECT_LT(r.infidelity, 1e-8);
  EXPECT_LT(r.gamma_sq_mean, 1e-16);
}
