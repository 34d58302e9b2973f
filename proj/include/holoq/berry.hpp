// Berry phases and Berry curvature of the parity-sector ground states over
// the {phi, q} control plane, evaluated with gauge-invariant overlap
// products, plus the analytic near-peak curvature formulas and the fit of
// the gate-angle constant.

#ifndef HOLOQ_BERRY_HPP
#define HOLOQ_BERRY_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "holoq/circuit.hpp"

namespace holoq {

/// A sector ground state became (near-)degenerate somewhere on a path.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(const ControlPoint& where, Parity parity, double gap);
  ControlPoint where;
  Parity parity;
  double gap;
};

/// Neighbouring states overlap too little for the overlap product to be
/// meaningful.
class DiscretizationError : public std::runtime_error {
 public:
  DiscretizationError(std::size_t index, double overlap);
  std::size_t index;
  double overlap;
};

/// Piecewise-linear path through the control plane. Segments are sampled
/// with steps no larger than (d_phi, d_q) componentwise.
class ControlPath {
 public:
  ControlPath(std::vector<ControlPoint> vertices, bool closed, double d_phi, double d_q);

  const std::vector<ControlPoint>& vertices() const { return vertices_; }
  bool closed() const { return closed_; }
  double d_phi() const { return d_phi_; }
  double d_q() const { return d_q_; }

  /// Number of sampling steps on each segment.
  std::vector<int> segment_steps() const;

  /// Sampled points. For a closed path the last sample repeats the first.
  std::vector<ControlPoint> sample() const;

  ControlPath reversed() const;

 private:
  std::vector<ControlPoint> vertices_;
  bool closed_;
  double d_phi_;
  double d_q_;
};

inline constexpr double kDefaultLoopDPhi = 0.001 * kPi;
inline constexpr double kDefaultLoopDQ = 0.01;

/// Axis-aligned rectangle traversed (phi_left, q_top) -> (phi_right, q_top)
/// -> (phi_right, q_bottom) -> (phi_left, q_bottom) -> back.
struct RectangleLoop {
  double phi_left = 0.0;
  double phi_right = kPi;
  double q_top = 0.5;
  double q_bottom = -0.5;
  double d_phi = kDefaultLoopDPhi;
  double d_q = kDefaultLoopDQ;

  ControlPath path() const;
};

/// The holonomic-gate loop through the protected corners phi = 0, pi and
/// along the degeneracy lines q = +-margin_q.
ControlPath standard_loop(double margin_q = 0.5, double d_phi = kDefaultLoopDPhi,
                          double d_q = kDefaultLoopDQ);

/// Ground states of one sector at a list of points. The OpenMP kernel and
/// the serial reference return identical results.
struct PathStates {
  std::vector<Eigen::VectorXcd> states;
  std::vector<double> energies;
  std::vector<double> gaps;
  std::vector<bool> near_degenerate;
};

PathStates sample_ground_states(const CircuitParams& params, std::span<const ControlPoint> points,
                                const ChargeBasis& basis, Parity parity,
                                const SpectralOptions& options = {});
PathStates sample_ground_states_serial(const CircuitParams& params,
                                       std::span<const ControlPoint> points,
                                       const ChargeBasis& basis, Parity parity,
                                       const SpectralOptions& options = {});

inline constexpr double kMinNeighbourOverlap = 0.5;

/// -Im log prod_k <psi_k|psi_{k+1}> over an ordered list of states, the list
/// already closed (last state at the same point as the first). Result in
/// (-pi, pi]. Throws DiscretizationError when a neighbour overlap magnitude
/// falls below kMinNeighbourOverlap.
double overlap_product_phase(std::span<const Eigen::VectorXcd> states);

/// Berry phase of the sector ground state around a closed path.
double wilson_loop_phase(const CircuitParams& params, const ControlPath& path,
                         const ChargeBasis& basis, Parity parity,
                         const SpectralOptions& options = {});

struct BerryResult {
  double theta_even = 0.0;
  double theta_odd = 0.0;
  /// theta_odd - theta_even wrapped to (-pi, pi].
  double gate_angle = 0.0;
  double min_gap_on_path = 0.0;
};

BerryResult gate_angle(const CircuitParams& params, const ControlPath& path,
                       const ChargeBasis& basis, const SpectralOptions& options = {});

/// Rectangular plaquette grid. phi_cells x q_cells plaquettes between
/// (phi_cells + 1) x (q_cells + 1) vertices.
struct GridSpec {
  double phi_min = 0.0;
  double phi_max = kPi;
  double q_min = -1.0;
  double q_max = 1.0;
  int phi_cells = 200;
  int q_cells = 200;

  /// Throws ParameterError for empty or inverted axes.
  void validate() const;
  std::vector<double> phi_axis() const;
  std::vector<double> q_axis() const;
};

/// 200 x 200 over phi in [0, pi], q in [-1, 1].
GridSpec default_curvature_grid();
/// 400 x 80 over phi in [pi/2 - 2 e_C, pi/2 + 2 e_C], q in [-1/2, 1/2].
GridSpec zoom_curvature_grid(const CircuitParams& params);

/// Berry curvature per plaquette, stored row-major with phi fastest:
/// index = j * phi_cells + i for the plaquette [phi_i, phi_{i+1}] x [q_j, q_{j+1}].
/// Plaquettes are traversed with the same (clockwise in phi-right, q-up)
/// orientation as the standard loop, so the summed difference layer times
/// area reproduces the loop gate angle.
struct CurvatureGrid {
  std::vector<double> phi_axis;  // vertex coordinates
  std::vector<double> q_axis;
  int phi_cells = 0;
  int q_cells = 0;
  std::vector<double> even;
  std::vector<double> odd;
  std::vector<double> difference;  // odd - even
  std::vector<bool> valid;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(phi_cells) +
           static_cast<std::size_t>(i);
  }
  double phi_center(int i) const { return 0.5 * (phi_axis[i] + phi_axis[i + 1]); }
  double q_center(int j) const { return 0.5 * (q_axis[j] + q_axis[j + 1]); }
  double area(int i, int j) const {
    return (phi_axis[i + 1] - phi_axis[i]) * (q_axis[j + 1] - q_axis[j]);
  }
  /// Sum of difference x area over valid plaquettes inside the window.
  double integrate_difference(double phi_lo, double phi_hi, double q_lo, double q_hi) const;
};

CurvatureGrid curvature_map(const CircuitParams& params, const GridSpec& grid,
                            const ChargeBasis& basis, const SpectralOptions& options = {});
CurvatureGrid curvature_map_serial(const CircuitParams& params, const GridSpec& grid,
                                   const ChargeBasis& basis, const SpectralOptions& options = {});

/// Near-peak curvature evaluated as printed:
///   (e_C / 2) delta / (delta^2 + alpha^2 + (e_C q)^2)^(3/2).
double analytic_curvature_peak(const CircuitParams& params, double alpha, double q);

/// Variant with the charge term 2 e_C q that follows from the exact
/// two-state projection (odd-sector level splitting 4 q E_C).
double analytic_curvature_peak_projected(const CircuitParams& params, double alpha, double q);

/// Even/odd difference curvature built from analytic_curvature_peak:
/// peak(phi, q) - peak(phi, q -+ 1) for q >< 0, extended by the period pi in
/// phi, the period 2 in q and oddness about q = 1/2.
double analytic_curvature_total(const CircuitParams& params, double phi, double q);
double analytic_curvature_total_projected(const CircuitParams& params, double phi, double q);

/// pi - A eta.
double predicted_gate_angle(const CircuitParams& params, double A);

inline constexpr double kReferenceA = 2.97;

struct FitAResult {
  double A = 0.0;
  /// Standard error of the slope; nullopt for a single point.
  std::optional<double> uncertainty;
  std::vector<double> etas;
  std::vector<double> thetas;
  std::vector<double> residuals;  // (pi - theta) - A eta
  std::vector<double> min_gaps;
};

/// Least-squares slope through the origin of (pi - theta) against eta.
/// thetas must be gate angles measured at the matching etas.
FitAResult fit_A_from_angles(std::span<const double> etas, std::span<const double> thetas);

/// Measures the gate angle on the standard loop for each eta (E_sigma and
/// e_C fixed) and fits A.
FitAResult fit_A(double e_sigma, double e_c_dimless, std::span<const double> etas,
                 const ChargeBasis& basis, const ControlPath& path = standard_loop());

}  // namespace holoq

#endif  // HOLOQ_BERRY_HPP
