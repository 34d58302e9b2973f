// Time-domain evolution of the parity sectors through control schedules.

#ifndef HOLOQ_DYNAMICS_HPP
#define HOLOQ_DYNAMICS_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "holoq/berry.hpp"
#include "holoq/circuit.hpp"

namespace holoq {

struct Waypoint {
  double t;
  ControlPoint point;
};

/// Piecewise-linear control schedule over [0, duration].
class Schedule {
 public:
  explicit Schedule(std::vector<Waypoint> waypoints);

  /// Traverses the path vertices, spending equal time on every sampled step
  /// of the path, so each segment gets time proportional to its step count.
  static Schedule from_path(const ControlPath& path, double duration);
  /// Holds one control point for the given duration.
  static Schedule constant(const ControlPoint& point, double duration);

  double duration() const { return waypoints_.back().t; }
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  ControlPoint at(double t) const;
  Schedule reversed() const;

 private:
  std::vector<Waypoint> waypoints_;
};

/// Additive charge offset sampled on a uniform grid starting at t = 0,
/// linearly interpolated and held constant past the last sample.
struct ChargeTrajectory {
  std::vector<double> samples;
  double dt = 0.0;
  double at(double t) const;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double suggested_dt)
      : std::runtime_error(what), suggested_dt(suggested_dt) {}
  double suggested_dt;
};

inline constexpr double kNormDriftLimit = 1e-8;
inline constexpr double kStepGuard = 0.1;
inline constexpr double kDefaultStepScale = 0.05;

struct EvolveOptions {
  /// Time step; 0 selects min(kDefaultStepScale / |H|, duration / 1e4).
  double dt = 0.0;
  /// Optional charge noise added to the scheduled q(t). Not owned.
  const ChargeTrajectory* charge_noise = nullptr;
  SpectralOptions spectral{};
};

/// Largest |H - s| over the schedule, with s the centre of the diagonal
/// range; a global shift only changes an overall phase.
double hamiltonian_norm_bound(const CircuitParams& params, const Schedule& schedule,
                              const ChargeBasis& basis, double extra_q = 0.0);

double default_time_step(const CircuitParams& params, const Schedule& schedule,
                         const ChargeBasis& basis, double extra_q = 0.0);

struct Propagation {
  Eigen::VectorXcd state;
  double norm_drift = 0.0;
  long steps = 0;
  double dt = 0.0;
};

/// Integrates i d psi/dt = H(t) psi within one parity sector from psi0, one
/// exact exponential of the midpoint Hamiltonian per step.
Propagation propagate(const CircuitParams& params, const Schedule& schedule,
                      const ChargeBasis& basis, Parity parity, const Eigen::VectorXcd& psi0,
                      const EvolveOptions& options = {});

struct EvolutionResult {
  Parity parity = Parity::even;
  Eigen::VectorXcd final_state;
  /// 1 - |<ground(T)|psi(T)>|^2 within the sector.
  double leakage = 0.0;
  /// arg <ground(T)|psi(T)> with the solver's ground-state gauge at both ends.
  double total_phase = 0.0;
  /// -int E_ground dt along the schedule.
  double dynamic_phase = 0.0;
  /// total_phase - dynamic_phase, wrapped to (-pi, pi].
  double geometric_phase = 0.0;
  /// -arg prod <g_k|g_k+1> on the reference grid (parallel transport).
  double transport_phase = 0.0;
  /// geometric_phase - transport_phase, wrapped.
  double phase_error = 0.0;
  /// -int E_ground dt over each waypoint interval.
  std::vector<double> segment_dynamic_phases;
  double norm_drift = 0.0;
  double dt = 0.0;
};

/// Starts in the sector ground state at the schedule start. The reference
/// ground states follow the noiseless schedule.
EvolutionResult evolve(const CircuitParams& params, const Schedule& schedule,
                       const ChargeBasis& basis, Parity parity,
                       const EvolveOptions& options = {});

/// 1 / (tau E_C).
double adiabaticity_check(const CircuitParams& params, double tau_gate);

/// exp(-tau E_C^2 / (E2 + E2')).
double landau_zener_probability(const CircuitParams& params, double tau_gate);

/// One crossing of the unprotected region: phi from 0 to pi at q = q_line
/// in tau/2, the time one horizontal leg of the gate loop takes.
Schedule landau_zener_schedule(double tau_gate, double q_line = 0.5);

struct LandauZenerPoint {
  double tau = 0.0;
  double leakage_even = 0.0;
  double leakage_odd = 0.0;
  double p_measured = 0.0;  // larger of the two sectors
  double p_predicted = 0.0;
};

LandauZenerPoint landau_zener_point(const CircuitParams& params, double tau_gate,
                                    const ChargeBasis& basis, const EvolveOptions& options = {});

inline constexpr double kNonAdiabaticLeakage = 1e-2;

struct GateReport {
  double tau_gate = 0.0;
  double wilson_theta = 0.0;
  double realized_theta = 0.0;
  /// realized_theta - wilson_theta, wrapped.
  double angle_error = 0.0;
  double leakage_even = 0.0;
  double leakage_odd = 0.0;
  double adiabaticity = 0.0;
  double p_lz = 0.0;
  bool non_adiabatic = false;
  /// Odd minus even dynamic phase on each leg of the loop.
  std::vector<double> segment_phase_difference;
  EvolutionResult even;
  EvolutionResult odd;
};

GateReport simulate_holonomic_gate(const CircuitParams& params, double tau_gate,
                                   const ChargeBasis& basis, const EvolveOptions& options = {},
                                   const ControlPath& path = standard_loop());

struct DiscreteZResult {
  double hold_time = 0.0;
  double ramp_time = 0.0;
  double phase_even = 0.0;
  double phase_odd = 0.0;
  /// phase_odd - phase_even, wrapped.
  double relative_phase = 0.0;
  double leakage_even = 0.0;
  double leakage_odd = 0.0;
  double norm_drift = 0.0;
};

/// Ramp phi 0 -> pi/2 at q = 0, hold, ramp back. Phases and leakage are
/// taken against the sector ground states at phi = 0. ramp_time = 0 gives
/// sudden switches.
DiscreteZResult discrete_z_gate(const CircuitParams& params, double hold_time, double ramp_time,
                                const ChargeBasis& basis, const EvolveOptions& options = {});

/// pi / (2 E_C).
double ideal_z_hold_time(const CircuitParams& params);

}  // namespace holoq

#endif  // HOLOQ_DYNAMICS_HPP
