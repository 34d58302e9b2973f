#include "holoq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace holoq {

Schedule::Schedule(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) throw ParameterError("a schedule needs at least two waypoints");
  if (waypoints_.front().t != 0.0) throw ParameterError("a schedule must start at t = 0");
  for (std::size_t k = 1; k < waypoints_.size(); ++k)
    if (!(waypoints_[k].t > waypoints_[k - 1].t))
      throw ParameterError("schedule waypoint times must be strictly increasing");
}

Schedule Schedule::from_path(const ControlPath& path, double duration) {
  if (!(duration > 0.0)) throw ParameterError("schedule duration must be positive");
  const auto steps = path.segment_steps();
  const auto& v = path.vertices();
  double total = 0.0;
  for (int s : steps) total += s;
  if (total == 0.0) throw ParameterError("path has zero length");
  std::vector<Waypoint> w{{0.0, v.front()}};
  double done = 0.0;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    if (steps[s] == 0) continue;
    done += steps[s];
    const ControlPoint& end = v[(s + 1) % v.size()];
    w.push_back({duration * done / total, end});
  }
  w.back().t = duration;
  return Schedule(std::move(w));
}

Schedule Schedule::constant(const ControlPoint& point, double duration) {
  if (!(duration > 0.0)) throw ParameterError("schedule duration must be positive");
  return Schedule({{0.0, point}, {duration, point}});
}

ControlPoint Schedule::at(double t) const {
  if (t <= 0.0) return waypoints_.front().point;
  if (t >= duration()) return waypoints_.back().point;
  const auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                                   [](double x, const Waypoint& w) { return x < w.t; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return {a.point.phi + s * (b.point.phi - a.point.phi), a.point.q + s * (b.point.q - a.point.q)};
}

Schedule Schedule::reversed() const {
  std::vector<Waypoint> w;
  const double T = duration();
  for (auto it = waypoints_.rbegin(); it != waypoints_.rend(); ++it) w.push_back({T - it->t, it->point});
  w.front().t = 0.0;
  return Schedule(std::move(w));
}

double ChargeTrajectory::at(double t) const {
  if (samples.empty()) return 0.0;
  if (t <= 0.0 || samples.size() == 1) return samples.front();
  const double x = t / dt;
  const auto k = static_cast<std::size_t>(x);
  if (k + 1 >= samples.size()) return samples.back();
  const double f = x - static_cast<double>(k);
  return samples[k] + f * (samples[k + 1] - samples[k]);
}

double hamiltonian_norm_bound(const CircuitParams& params, const Schedule& schedule,
                              const ChargeBasis& basis, double extra_q) {
  double q_abs = 0.0;
  for (const auto& w : schedule.waypoints()) q_abs = std::max(q_abs, std::abs(w.point.q));
  q_abs += std::abs(extra_q);
  const double reach = basis.n_max() + q_abs;
  return 0.5 * params.e_c() * reach * reach + params.e_sigma();
}

double default_time_step(const CircuitParams& params, const Schedule& schedule,
                         const ChargeBasis& basis, double extra_q) {
  const double norm = hamiltonian_norm_bound(params, schedule, basis, extra_q);
  return std::min(kDefaultStepScale / norm, schedule.duration() / 1e4);
}

namespace {

double noise_extent(const ChargeTrajectory* noise) {
  if (noise == nullptr || noise->samples.empty()) return 0.0;
  double m = 0.0;
  for (double x : noise->samples) m = std::max(m, std::abs(x));
  return m;
}

// One sector Hamiltonian at a fixed control point, applied without forming a
// matrix: diagonal plus constant complex off-diagonals.
struct SectorOperator {
  std::vector<double> charges;
  std::vector<double> diag;
  cplx lower;  // <n+2|H|n>
  cplx upper;  // <n|H|n+2>
  double shift = 0.0;

  void set(const CircuitParams& params, const ControlPoint& p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < charges.size(); ++k) {
      const double dn = charges[k] - p.q;
      diag[k] = params.e_c() * dn * dn;
      lo = std::min(lo, diag[k]);
      hi = std::max(hi, diag[k]);
    }
    shift = 0.5 * (lo + hi);
    lower = -0.5 * std::conj(josephson_coupling(params, p.phi));
    upper = std::conj(lower);
  }

  // y = (H - shift) x
  void apply(const cplx* x, cplx* y) const {
    const std::size_t n = diag.size();
    for (std::size_t k = 0; k < n; ++k) {
      cplx v = (diag[k] - shift) * x[k];
      if (k > 0) v += lower * x[k - 1];
      if (k + 1 < n) v += upper * x[k + 1];
      y[k] = v;
    }
  }
};

// psi <- exp(-i H h) psi by a Taylor series of the shifted operator.
void exponential_step(const SectorOperator& op, double h, Eigen::VectorXcd& psi,
                      Eigen::VectorXcd& term, Eigen::VectorXcd& next) {
  term = psi;
  const cplx minus_i_h(0.0, -h);
  for (int k = 1; k <= 40; ++k) {
    op.apply(term.data(), next.data());
    term = next * (minus_i_h / static_cast<double>(k));
    psi += term;
    if (term.squaredNorm() < 1e-34) break;
  }
  psi *= std::polar(1.0, -op.shift * h);
}

struct ReferenceGrid {
  std::vector<double> times;
  std::vector<ControlPoint> points;
  std::vector<std::size_t> segment_start;  // index of each waypoint in points
};

ReferenceGrid reference_grid(const Schedule& schedule) {
  ReferenceGrid g;
  const auto& w = schedule.waypoints();
  for (std::size_t s = 0; s + 1 < w.size(); ++s) {
    const Waypoint& a = w[s];
    const Waypoint& b = w[s + 1];
    int m = std::max({2, static_cast<int>(std::ceil(std::abs(b.point.phi - a.point.phi) / kDefaultLoopDPhi)),
                      static_cast<int>(std::ceil(std::abs(b.point.q - a.point.q) / kDefaultLoopDQ))});
    m += m % 2;  // Simpson needs an even count
    g.segment_start.push_back(g.points.size());
    for (int j = 0; j < m; ++j) {
      const double f = static_cast<double>(j) / m;
      g.times.push_back(a.t + f * (b.t - a.t));
      g.points.push_back({a.point.phi + f * (b.point.phi - a.point.phi),
                          a.point.q + f * (b.point.q - a.point.q)});
    }
  }
  g.segment_start.push_back(g.points.size());
  g.times.push_back(w.back().t);
  g.points.push_back(w.back().point);
  return g;
}

}  // namespace

Propagation propagate(const CircuitParams& params, const Schedule& schedule,
                      const ChargeBasis& basis, Parity parity, const Eigen::VectorXcd& psi0,
                      const EvolveOptions& options) {
  if (psi0.size() != basis.dimension(parity))
    throw ParameterError("initial state dimension does not match the sector");
  const double extra_q = noise_extent(options.charge_noise);
  const double norm = hamiltonian_norm_bound(params, schedule, basis, extra_q);
  const double T = schedule.duration();
  const double requested = options.dt > 0.0 ? options.dt : default_time_step(params, schedule, basis, extra_q);
  const long steps = std::max(1L, static_cast<long>(std::ceil(T / requested - 1e-9)));
  const double h = T / static_cast<double>(steps);
  if (h * norm >= kStepGuard) {
    std::ostringstream msg;
    msg << "time step " << h << " ns violates dt*|H| < " << kStepGuard << " (|H| bound " << norm
        << "); use dt <= " << kDefaultStepScale / norm;
    throw IntegrationError(msg.str(), kDefaultStepScale / norm);
  }

  SectorOperator op;
  for (int n : basis.charges(parity)) op.charges.push_back(n);
  op.diag.resize(op.charges.size());

  Propagation out;
  out.state = psi0;
  out.dt = h;
  out.steps = steps;
  const double norm0 = psi0.norm();
  Eigen::VectorXcd term(psi0.size()), next(psi0.size());
  for (long k = 0; k < steps; ++k) {
    const double tm = (static_cast<double>(k) + 0.5) * h;
    ControlPoint p = schedule.at(tm);
    if (options.charge_noise != nullptr) p.q += options.charge_noise->at(tm);
    op.set(params, p);
    exponential_step(op, h, out.state, term, next);
    const double drift = std::abs(out.state.norm() - norm0);
    out.norm_drift = std::max(out.norm_drift, drift);
    if (drift > kNormDriftLimit) {
      std::ostringstream msg;
      msg << "norm drift " << drift << " exceeds " << kNormDriftLimit << " at t = " << tm
          << " ns; retry with dt = " << 0.5 * h;
      throw IntegrationError(msg.str(), 0.5 * h);
    }
  }
  return out;
}

EvolutionResult evolve(const CircuitParams& params, const Schedule& schedule,
                       const ChargeBasis& basis, Parity parity, const EvolveOptions& options) {
  const ReferenceGrid grid = reference_grid(schedule);
  PathStates ref = sample_ground_states(params, grid.points, basis, parity, options.spectral);

  EvolutionResult r;
  r.parity = parity;
  const Propagation prop = propagate(params, schedule, basis, parity, ref.states.front(), options);
  r.final_state = prop.state;
  r.norm_drift = prop.norm_drift;
  r.dt = prop.dt;

  const cplx overlap = ref.states.back().dot(prop.state);
  r.leakage = std::clamp(1.0 - std::norm(overlap), 0.0, 1.0);
  r.total_phase = std::arg(overlap);

  r.dynamic_phase = 0.0;
  for (std::size_t s = 0; s + 1 < grid.segment_start.size(); ++s) {
    const std::size_t a = grid.segment_start[s];
    const std::size_t b = grid.segment_start[s + 1];
    const double step = (grid.times[b] - grid.times[a]) / static_cast<double>(b - a);
    double sum = ref.energies[a] + ref.energies[b];
    for (std::size_t k = a + 1; k < b; ++k) sum += ref.energies[k] * ((k - a) % 2 == 1 ? 4.0 : 2.0);
    const double phase = -sum * step / 3.0;
    r.segment_dynamic_phases.push_back(phase);
    r.dynamic_phase += phase;
  }
  r.geometric_phase = wrap_phase(r.total_phase - r.dynamic_phase);
  r.transport_phase = overlap_product_phase(ref.states);
  r.phase_error = wrap_phase(r.geometric_phase - r.transport_phase);
  return r;
}

double adiabaticity_check(const CircuitParams& params, double tau_gate) {
  if (!(tau_gate > 0.0)) throw ParameterError("tau_gate must be positive");
  return 1.0 / (tau_gate * params.e_c());
}

double landau_zener_probability(const CircuitParams& params, double tau_gate) {
  if (tau_gate < 0.0) throw ParameterError("tau_gate must be non-negative");
  return std::exp(-tau_gate * params.e_c() * params.e_c() / params.e_sigma());
}

Schedule landau_zener_schedule(double tau_gate, double q_line) {
  if (!(tau_gate > 0.0)) throw ParameterError("tau_gate must be positive");
  return Schedule({{0.0, {0.0, q_line}}, {0.5 * tau_gate, {kPi, q_line}}});
}

LandauZenerPoint landau_zener_point(const CircuitParams& params, double tau_gate,
                                    const ChargeBasis& basis, const EvolveOptions& options) {
  const Schedule s = landau_zener_schedule(tau_gate);
  LandauZenerPoint p;
  p.tau = tau_gate;
  p.leakage_even = evolve(params, s, basis, Parity::even, options).leakage;
  p.leakage_odd = evolve(params, s, basis, Parity::odd, options).leakage;
  p.p_measured = std::max(p.leakage_even, p.leakage_odd);
  p.p_predicted = landau_zener_probability(params, tau_gate);
  return p;
}

GateReport simulate_holonomic_gate(const CircuitParams& params, double tau_gate,
                                   const ChargeBasis& basis, const EvolveOptions& options,
                                   const ControlPath& path) {
  const Schedule schedule = Schedule::from_path(path, tau_gate);
  GateReport g;
  g.tau_gate = tau_gate;
  g.wilson_theta = gate_angle(params, path, basis, options.spectral).gate_angle;
  g.even = evolve(params, schedule, basis, Parity::even, options);
  g.odd = evolve(params, schedule, basis, Parity::odd, options);
  g.realized_theta = wrap_phase(g.odd.geometric_phase - g.even.geometric_phase);
  g.angle_error = wrap_phase(g.realized_theta - g.wilson_theta);
  g.leakage_even = g.even.leakage;
  g.leakage_odd = g.odd.leakage;
  g.adiabaticity = adiabaticity_check(params, tau_gate);
  g.p_lz = landau_zener_probability(params, tau_gate);
  g.non_adiabatic = g.p_lz > kNonAdiabaticLeakage ||
                    std::max(g.leakage_even, g.leakage_odd) > kNonAdiabaticLeakage;
  for (std::size_t s = 0; s < g.even.segment_dynamic_phases.size(); ++s)
    g.segment_phase_difference.push_back(g.odd.segment_dynamic_phases[s] -
                                         g.even.segment_dynamic_phases[s]);
  return g;
}

double ideal_z_hold_time(const CircuitParams& params) { return kPi / (2.0 * params.e_c()); }

DiscreteZResult discrete_z_gate(const CircuitParams& params, double hold_time, double ramp_time,
                                const ChargeBasis& basis, const EvolveOptions& options) {
  if (!(hold_time > 0.0)) throw ParameterError("hold_time must be positive");
  if (ramp_time < 0.0) throw ParameterError("ramp_time must be non-negative");
  const ControlPoint rest{0.0, 0.0};
  const ControlPoint flat{kPi / 2, 0.0};
  const Schedule schedule =
      ramp_time == 0.0
          ? Schedule::constant(flat, hold_time)
          : Schedule({{0.0, rest}, {ramp_time, flat}, {ramp_time + hold_time, flat},
                      {2.0 * ramp_time + hold_time, rest}});
  DiscreteZResult r;
  r.hold_time = hold_time;
  r.ramp_time = ramp_time;
  for (Parity parity : kParities) {
    const LowestLevels g = lowest_levels(params, rest, basis, parity, options.spectral);
    const Propagation prop = propagate(params, schedule, basis, parity, g.state, options);
    const cplx overlap = g.state.dot(prop.state);
    const double leak = std::clamp(1.0 - std::norm(overlap), 0.0, 1.0);
    (parity == Parity::even ? r.phase_even : r.phase_odd) = std::arg(overlap);
    (parity == Parity::even ? r.leakage_even : r.leakage_odd) = leak;
    r.norm_drift = std::max(r.norm_drift, prop.norm_drift);
  }
  r.relative_phase = wrap_phase(r.phase_odd - r.phase_even);
  return r;
}

}  // namespace holoq
