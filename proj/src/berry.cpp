#include "holoq/berry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace holoq {

namespace {

std::string degeneracy_message(const ControlPoint& where, Parity parity, double gap) {
  std::ostringstream msg;
  msg << to_string(parity) << "-sector ground state near-degenerate at (phi=" << where.phi
      << ", q=" << where.q << "), gap=" << gap;
  return msg.str();
}

std::string discretization_message(std::size_t index, double overlap) {
  std::ostringstream msg;
  msg << "discretization too coarse: |<psi_" << index << "|psi_" << index + 1
      << ">| = " << overlap << " < " << kMinNeighbourOverlap;
  return msg.str();
}

int steps_for(double extent, double step) {
  if (extent == 0.0) return 0;
  return static_cast<int>(std::ceil(std::abs(extent) / step - 1e-9));
}

template <bool Parallel>
PathStates sample_ground_states_impl(const CircuitParams& params,
                                     std::span<const ControlPoint> points,
                                     const ChargeBasis& basis, Parity parity,
                                     const SpectralOptions& options) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  PathStates out;
  out.states.resize(points.size());
  out.energies.resize(points.size());
  out.gaps.resize(points.size());
  std::vector<char> degenerate(points.size(), 0);
#pragma omp parallel for schedule(dynamic, 16) if (Parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    LowestLevels lv = lowest_levels(params, points[idx], basis, parity, options);
    out.states[idx] = std::move(lv.state);
    out.energies[idx] = lv.energy;
    out.gaps[idx] = lv.gap;
    degenerate[idx] = lv.near_degenerate ? 1 : 0;
  }
  out.near_degenerate.assign(degenerate.begin(), degenerate.end());
  return out;
}

}  // namespace

DegeneracyError::DegeneracyError(const ControlPoint& where_, Parity parity_, double gap_)
    : std::runtime_error(degeneracy_message(where_, parity_, gap_)),
      where(where_),
      parity(parity_),
      gap(gap_) {}

DiscretizationError::DiscretizationError(std::size_t index_, double overlap_)
    : std::runtime_error(discretization_message(index_, overlap_)),
      index(index_),
      overlap(overlap_) {}

ControlPath::ControlPath(std::vector<ControlPoint> vertices, bool closed, double d_phi,
                         double d_q)
    : vertices_(std::move(vertices)), closed_(closed), d_phi_(d_phi), d_q_(d_q) {
  if (vertices_.size() < 2) throw ParameterError("a control path needs at least two vertices");
  if (!(d_phi > 0.0) || !(d_q > 0.0)) throw ParameterError("path sampling steps must be positive");
  for (const auto& v : vertices_)
    if (!std::isfinite(v.phi) || !std::isfinite(v.q))
      throw ParameterError("path vertices must be finite");
}

std::vector<int> ControlPath::segment_steps() const {
  std::vector<int> steps;
  const std::size_t segments = closed_ ? vertices_.size() : vertices_.size() - 1;
  for (std::size_t s = 0; s < segments; ++s) {
    const ControlPoint& a = vertices_[s];
    const ControlPoint& b = vertices_[(s + 1) % vertices_.size()];
    steps.push_back(std::max(steps_for(b.phi - a.phi, d_phi_), steps_for(b.q - a.q, d_q_)));
  }
  return steps;
}

std::vector<ControlPoint> ControlPath::sample() const {
  std::vector<ControlPoint> out;
  const auto steps = segment_steps();
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const ControlPoint& a = vertices_[s];
    const ControlPoint& b = vertices_[(s + 1) % vertices_.size()];
    for (int j = 0; j < steps[s]; ++j) {
      const double t = static_cast<double>(j) / steps[s];
      out.push_back({a.phi + t * (b.phi - a.phi), a.q + t * (b.q - a.q)});
    }
  }
  out.push_back(closed_ ? vertices_.front() : vertices_.back());
  return out;
}

ControlPath ControlPath::reversed() const {
  std::vector<ControlPoint> v(vertices_.rbegin(), vertices_.rend());
  if (closed_) std::rotate(v.begin(), v.end() - 1, v.end());  // keep the starting vertex
  return ControlPath(std::move(v), closed_, d_phi_, d_q_);
}

ControlPath RectangleLoop::path() const {
  return ControlPath({{phi_left, q_top}, {phi_right, q_top}, {phi_right, q_bottom},
                      {phi_left, q_bottom}},
                     true, d_phi, d_q);
}

ControlPath standard_loop(double margin_q, double d_phi, double d_q) {
  if (!(margin_q > 0.0 && margin_q <= 0.5)) throw ParameterError("margin_q must lie in (0, 1/2]");
  RectangleLoop r;
  r.q_top = margin_q;
  r.q_bottom = -margin_q;
  r.d_phi = d_phi;
  r.d_q = d_q;
  return r.path();
}

PathStates sample_ground_states(const CircuitParams& params, std::span<const ControlPoint> points,
                                const ChargeBasis& basis, Parity parity,
                                const SpectralOptions& options) {
  return sample_ground_states_impl<true>(params, points, basis, parity, options);
}

PathStates sample_ground_states_serial(const CircuitParams& params,
                                       std::span<const ControlPoint> points,
                                       const ChargeBasis& basis, Parity parity,
                                       const SpectralOptions& options) {
  return sample_ground_states_impl<false>(params, points, basis, parity, options);
}

double overlap_product_phase(std::span<const Eigen::VectorXcd> states) {
  cplx product(1.0, 0.0);
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const cplx overlap = states[k].dot(states[k + 1]);  // conjugates the left operand
    const double magnitude = std::abs(overlap);
    if (magnitude < kMinNeighbourOverlap) throw DiscretizationError(k, magnitude);
    product *= overlap / magnitude;
  }
  return -std::arg(product);
}

double wilson_loop_phase(const CircuitParams& params, const ControlPath& path,
                         const ChargeBasis& basis, Parity parity,
                         const SpectralOptions& options) {
  if (!path.closed()) throw ParameterError("wilson_loop_phase needs a closed path");
  auto points = path.sample();
  points.pop_back();  // closed through states[0] below
  PathStates ps = sample_ground_states(params, points, basis, parity, options);
  for (std::size_t k = 0; k < points.size(); ++k)
    if (ps.near_degenerate[k]) throw DegeneracyError(points[k], parity, ps.gaps[k]);
  ps.states.push_back(ps.states.front());
  return overlap_product_phase(ps.states);
}

BerryResult gate_angle(const CircuitParams& params, const ControlPath& path,
                       const ChargeBasis& basis, const SpectralOptions& options) {
  if (!path.closed()) throw ParameterError("gate_angle needs a closed path");
  auto points = path.sample();
  points.pop_back();
  BerryResult r;
  r.min_gap_on_path = std::numeric_limits<double>::infinity();
  for (Parity parity : kParities) {
    PathStates ps = sample_ground_states(params, points, basis, parity, options);
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (ps.near_degenerate[k]) throw DegeneracyError(points[k], parity, ps.gaps[k]);
      r.min_gap_on_path = std::min(r.min_gap_on_path, ps.gaps[k]);
    }
    ps.states.push_back(ps.states.front());
    (parity == Parity::even ? r.theta_even : r.theta_odd) = overlap_product_phase(ps.states);
  }
  r.gate_angle = wrap_phase(r.theta_odd - r.theta_even);
  return r;
}

void GridSpec::validate() const {
  if (phi_cells < 1 || q_cells < 1) throw ParameterError("curvature grid needs at least one cell per axis");
  if (!(phi_max > phi_min) || !(q_max > q_min))
    throw ParameterError("curvature grid axes must be strictly increasing");
}

std::vector<double> GridSpec::phi_axis() const {
  std::vector<double> a(static_cast<std::size_t>(phi_cells) + 1);
  for (int i = 0; i <= phi_cells; ++i) a[i] = phi_min + (phi_max - phi_min) * i / phi_cells;
  return a;
}

std::vector<double> GridSpec::q_axis() const {
  std::vector<double> a(static_cast<std::size_t>(q_cells) + 1);
  for (int j = 0; j <= q_cells; ++j) a[j] = q_min + (q_max - q_min) * j / q_cells;
  return a;
}

GridSpec default_curvature_grid() { return GridSpec{}; }

GridSpec zoom_curvature_grid(const CircuitParams& params) {
  const double half = 2.0 * params.e_c_dimless();
  return GridSpec{kPi / 2 - half, kPi / 2 + half, -0.5, 0.5, 400, 80};
}

double CurvatureGrid::integrate_difference(double phi_lo, double phi_hi, double q_lo,
                                           double q_hi) const {
  double sum = 0.0;
  for (int j = 0; j < q_cells; ++j) {
    const double qc = q_center(j);
    if (qc < q_lo || qc > q_hi) continue;
    for (int i = 0; i < phi_cells; ++i) {
      const double pc = phi_center(i);
      if (pc < phi_lo || pc > phi_hi) continue;
      const auto k = index(i, j);
      if (valid[k]) sum += difference[k] * area(i, j);
    }
  }
  return sum;
}

namespace {

struct PlaquetteValue {
  double curvature = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

// Corners in loop orientation: top-left, top-right, bottom-right, bottom-left.
PlaquetteValue plaquette_curvature(const Eigen::VectorXcd& tl, const Eigen::VectorXcd& tr,
                                   const Eigen::VectorXcd& br, const Eigen::VectorXcd& bl,
                                   double area) {
  const cplx o1 = tl.dot(tr);
  const cplx o2 = tr.dot(br);
  const cplx o3 = br.dot(bl);
  const cplx o4 = bl.dot(tl);
  PlaquetteValue v;
  if (std::min({std::abs(o1), std::abs(o2), std::abs(o3), std::abs(o4)}) < kMinNeighbourOverlap)
    return v;
  v.curvature = -std::arg(o1 * o2 * o3 * o4) / area;
  v.valid = true;
  return v;
}

CurvatureGrid empty_grid(const GridSpec& grid) {
  grid.validate();
  CurvatureGrid g;
  g.phi_axis = grid.phi_axis();
  g.q_axis = grid.q_axis();
  g.phi_cells = grid.phi_cells;
  g.q_cells = grid.q_cells;
  const auto cells = static_cast<std::size_t>(grid.phi_cells) * grid.q_cells;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  g.even.assign(cells, nan);
  g.odd.assign(cells, nan);
  g.difference.assign(cells, nan);
  g.valid.assign(cells, false);
  return g;
}

void finish_difference(CurvatureGrid& g, const std::vector<char>& even_ok,
                       const std::vector<char>& odd_ok) {
  for (std::size_t k = 0; k < g.difference.size(); ++k) {
    g.valid[k] = even_ok[k] && odd_ok[k];
    if (g.valid[k]) g.difference[k] = g.odd[k] - g.even[k];
  }
}

}  // namespace

CurvatureGrid curvature_map(const CircuitParams& params, const GridSpec& grid,
                            const ChargeBasis& basis, const SpectralOptions& options) {
  CurvatureGrid g = empty_grid(grid);
  const std::size_t cells = g.even.size();
  std::vector<char> even_ok(cells, 0), odd_ok(cells, 0);
  const auto n_phi = static_cast<std::size_t>(grid.phi_cells) + 1;

  for (Parity parity : kParities) {
    auto& layer = parity == Parity::even ? g.even : g.odd;
    auto& ok = parity == Parity::even ? even_ok : odd_ok;
    auto row_states = [&](double q) {
      std::vector<ControlPoint> pts(n_phi);
      for (std::size_t i = 0; i < n_phi; ++i) pts[i] = {g.phi_axis[i], q};
      return sample_ground_states(params, pts, basis, parity, options);
    };
    PathStates lower = row_states(g.q_axis[0]);
    for (int j = 0; j < grid.q_cells; ++j) {
      PathStates upper = row_states(g.q_axis[j + 1]);
#pragma omp parallel for schedule(static)
      for (int i = 0; i < grid.phi_cells; ++i) {
        const auto k = g.index(i, j);
        if (lower.near_degenerate[i] || lower.near_degenerate[i + 1] ||
            upper.near_degenerate[i] || upper.near_degenerate[i + 1])
          continue;
        const PlaquetteValue v =
            plaquette_curvature(upper.states[i], upper.states[i + 1], lower.states[i + 1],
                                lower.states[i], g.area(i, j));
        layer[k] = v.curvature;
        ok[k] = v.valid ? 1 : 0;
      }
      lower = std::move(upper);
    }
  }
  finish_difference(g, even_ok, odd_ok);
  return g;
}

CurvatureGrid curvature_map_serial(const CircuitParams& params, const GridSpec& grid,
                                   const ChargeBasis& basis, const SpectralOptions& options) {
  CurvatureGrid g = empty_grid(grid);
  std::vector<char> even_ok(g.even.size(), 0), odd_ok(g.even.size(), 0);
  for (Parity parity : kParities) {
    auto& layer = parity == Parity::even ? g.even : g.odd;
    auto& ok = parity == Parity::even ? even_ok : odd_ok;
    for (int j = 0; j < grid.q_cells; ++j) {
      for (int i = 0; i < grid.phi_cells; ++i) {
        const ControlPoint corners[4] = {{g.phi_axis[i], g.q_axis[j + 1]},
                                         {g.phi_axis[i + 1], g.q_axis[j + 1]},
                                         {g.phi_axis[i + 1], g.q_axis[j]},
                                         {g.phi_axis[i], g.q_axis[j]}};
        LowestLevels s[4];
        bool degenerate = false;
        for (int c = 0; c < 4; ++c) {
          s[c] = lowest_levels(params, corners[c], basis, parity, options);
          degenerate = degenerate || s[c].near_degenerate;
        }
        if (degenerate) continue;
        const PlaquetteValue v =
            plaquette_curvature(s[0].state, s[1].state, s[2].state, s[3].state, g.area(i, j));
        layer[g.index(i, j)] = v.curvature;
        ok[g.index(i, j)] = v.valid ? 1 : 0;
      }
    }
  }
  finish_difference(g, even_ok, odd_ok);
  return g;
}

double analytic_curvature_peak(const CircuitParams& params, double alpha, double q) {
  const double ec = params.e_c_dimless();
  const double d = params.delta();
  const double r2 = d * d + alpha * alpha + (ec * q) * (ec * q);
  return 0.5 * ec * d / (r2 * std::sqrt(r2));
}

double analytic_curvature_peak_projected(const CircuitParams& params, double alpha, double q) {
  const double ec = params.e_c_dimless();
  const double d = params.delta();
  const double r2 = d * d + alpha * alpha + (2.0 * ec * q) * (2.0 * ec * q);
  return ec * d / (r2 * std::sqrt(r2));
}

namespace {

template <typename Peak>
double analytic_total(const CircuitParams& params, double phi, double q, Peak peak) {
  phi = phi - kPi * std::floor(phi / kPi);          // [0, pi)
  q = q - 2.0 * std::floor((q + 1.0) / 2.0);        // [-1, 1)
  if (q > 0.5) return -analytic_total(params, phi, 1.0 - q, peak);
  if (q < -0.5) return -analytic_total(params, phi, -1.0 - q, peak);
  const double alpha = phi - kPi / 2;
  const double partner = q > 0.0 ? q - 1.0 : q + 1.0;
  return peak(params, alpha, q) - peak(params, alpha, partner);
}

}  // namespace

double analytic_curvature_total(const CircuitParams& params, double phi, double q) {
  return analytic_total(params, phi, q, analytic_curvature_peak);
}

double analytic_curvature_total_projected(const CircuitParams& params, double phi, double q) {
  return analytic_total(params, phi, q, analytic_curvature_peak_projected);
}

double predicted_gate_angle(const CircuitParams& params, double A) {
  return kPi - A * params.eta();
}

FitAResult fit_A_from_angles(std::span<const double> etas, std::span<const double> thetas) {
  if (etas.empty() || etas.size() != thetas.size())
    throw ParameterError("fit_A needs matching, non-empty eta and theta lists");
  FitAResult r;
  r.etas.assign(etas.begin(), etas.end());
  r.thetas.assign(thetas.begin(), thetas.end());
  double sxy = 0.0, sxx = 0.0;
  std::vector<double> y(etas.size());
  for (std::size_t k = 0; k < etas.size(); ++k) {
    y[k] = wrap_phase(kPi - thetas[k]);
    sxy += etas[k] * y[k];
    sxx += etas[k] * etas[k];
  }
  if (sxx == 0.0) throw ParameterError("fit_A needs at least one non-zero eta");
  r.A = sxy / sxx;
  double ss = 0.0;
  for (std::size_t k = 0; k < etas.size(); ++k) {
    r.residuals.push_back(y[k] - r.A * etas[k]);
    ss += r.residuals.back() * r.residuals.back();
  }
  if (etas.size() > 1) r.uncertainty = std::sqrt(ss / static_cast<double>(etas.size() - 1) / sxx);
  return r;
}

FitAResult fit_A(double e_sigma, double e_c_dimless, std::span<const double> etas,
                 const ChargeBasis& basis, const ControlPath& path) {
  std::vector<double> thetas;
  std::vector<double> gaps;
  for (double eta : etas) {
    const auto params = CircuitParams::from_eta(e_sigma, e_c_dimless, eta);
    const BerryResult br = gate_angle(params, path, basis);
    thetas.push_back(br.gate_angle);
    gaps.push_back(br.min_gap_on_path);
  }
  FitAResult r = fit_A_from_angles(etas, thetas);
  r.min_gaps = std::move(gaps);
  return r;
}

}  // namespace holoq
