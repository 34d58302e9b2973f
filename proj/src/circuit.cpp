#include "holoq/circuit.hpp"

#include <cmath>
#include <sstream>

#include "holoq/tridiagonal.hpp"

namespace holoq {

const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

double wrap_phase(double x) {
  x = std::remainder(x, 2.0 * kPi);  // [-pi, pi]
  return x <= -kPi ? x + 2.0 * kPi : x;
}

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

CircuitParams::CircuitParams(double e2, double e2_prime, double e_c)
    : e2_(e2), e2_prime_(e2_prime), e_c_(e_c) {
  if (!positive_finite(e2) || !positive_finite(e2_prime) || !positive_finite(e_c)) {
    std::ostringstream msg;
    msg << "circuit energies must be positive and finite (E2=" << e2 << ", E2'=" << e2_prime
        << ", E_C=" << e_c << ")";
    throw ParameterError(msg.str());
  }
}

CircuitParams CircuitParams::from_dimensionless(double e_sigma, double e_c_dimless, double delta) {
  if (!positive_finite(e_sigma) || !positive_finite(e_c_dimless))
    throw ParameterError("E_sigma and e_C must be positive");
  if (!(delta >= 0.0 && delta < 1.0)) throw ParameterError("delta must lie in [0, 1)");
  return CircuitParams(0.5 * e_sigma * (1.0 + delta), 0.5 * e_sigma * (1.0 - delta),
                       0.5 * e_c_dimless * e_sigma);
}

CircuitParams CircuitParams::from_eta(double e_sigma, double e_c_dimless, double eta) {
  return from_dimensionless(e_sigma, e_c_dimless, eta * e_c_dimless);
}

double CircuitParams::delta() const { return std::abs(e2_prime_ - e2_) / e_sigma(); }

ChargeBasis::ChargeBasis(int n_max) : n_max_(n_max) {
  if (n_max < 2) throw ParameterError("charge basis needs n_max >= 2");
}

int ChargeBasis::first_charge(Parity p) const {
  const bool n_max_even = n_max_ % 2 == 0;
  const bool want_even = p == Parity::even;
  return want_even == n_max_even ? -n_max_ : -n_max_ + 1;
}

int ChargeBasis::dimension(Parity p) const { return (n_max_ - first_charge(p)) / 2 + 1; }

std::vector<int> ChargeBasis::charges(Parity p) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(dimension(p)));
  for (int n = first_charge(p); n <= n_max_; n += 2) out.push_back(n);
  return out;
}

std::vector<int> ChargeBasis::all_charges() const {
  std::vector<int> out;
  for (int n = -n_max_; n <= n_max_; ++n) out.push_back(n);
  return out;
}

double effective_josephson(const CircuitParams& params, double phi) {
  return std::abs(josephson_coupling(params, phi));
}

cplx josephson_coupling(const CircuitParams& params, double phi) {
  return {params.e_sigma() * std::cos(phi), (params.e2() - params.e2_prime()) * std::sin(phi)};
}

std::optional<double> phase_offset(const CircuitParams& params, double phi) {
  const cplx c = josephson_coupling(params, phi);
  // cos(pi/2) is not exactly zero in floating point.
  if (std::abs(c) <= 1e-14 * params.e_sigma()) return std::nullopt;
  return 0.5 * std::atan2(c.imag(), c.real());
}

std::vector<double> track_phase_offset(const CircuitParams& params,
                                       std::span<const double> phis) {
  std::vector<double> out;
  out.reserve(phis.size());
  double previous = 0.0;
  bool have_previous = false;
  for (double phi : phis) {
    const auto raw = phase_offset(params, phi);
    if (!raw) {
      out.push_back(previous);
      continue;
    }
    double value = *raw;
    if (have_previous) {
      // phi~ is defined modulo pi.
      value += kPi * std::round((previous - value) / kPi);
    }
    out.push_back(value);
    previous = value;
    have_previous = true;
  }
  return out;
}

Eigen::MatrixXcd build_hamiltonian(const CircuitParams& params, const ControlPoint& point,
                                   const ChargeBasis& basis, Parity parity) {
  const auto charges = basis.charges(parity);
  const auto dim = static_cast<Eigen::Index>(charges.size());
  const cplx coupling = josephson_coupling(params, point.phi);
  // <n+2|H|n> = -(E2_eff/2) exp(-2i phi~) = -conj(coupling)/2
  const cplx lower = -0.5 * std::conj(coupling);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double dn = charges[static_cast<std::size_t>(k)] - point.q;
    h(k, k) = params.e_c() * dn * dn;
    if (k + 1 < dim) {
      h(k + 1, k) = lower;
      h(k, k + 1) = std::conj(lower);
    }
  }
  return h;
}

Eigen::MatrixXcd build_full_hamiltonian(const CircuitParams& params, const ControlPoint& point,
                                        const ChargeBasis& basis) {
  const int dim = basis.total_dimension();
  const int offset = basis.n_max();
  const cplx lower = -0.5 * std::conj(josephson_coupling(params, point.phi));
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = -basis.n_max(); n <= basis.n_max(); ++n) {
    const double dn = n - point.q;
    h(n + offset, n + offset) = params.e_c() * dn * dn;
    if (n + 2 <= basis.n_max()) {
      h(n + 2 + offset, n + offset) = lower;
      h(n + offset, n + 2 + offset) = std::conj(lower);
    }
  }
  return h;
}

SectorTridiagonal sector_tridiagonal(const CircuitParams& params, const ControlPoint& point,
                                     const ChargeBasis& basis, Parity parity) {
  SectorTridiagonal t;
  const cplx coupling = josephson_coupling(params, point.phi);
  t.first_charge = basis.first_charge(parity);
  t.gauge = coupling == cplx(0.0, 0.0) ? 0.0 : 0.5 * std::arg(coupling);
  t.off_diagonal = -0.5 * std::abs(coupling);
  const int dim = basis.dimension(parity);
  t.diagonal.resize(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    const double dn = t.first_charge + 2 * k - point.q;
    t.diagonal[static_cast<std::size_t>(k)] = params.e_c() * dn * dn;
  }
  return t;
}

Eigen::VectorXcd apply_gauge(const Eigen::VectorXd& real_vector, double gauge, int first_charge) {
  const auto dim = real_vector.size();
  Eigen::VectorXcd out(dim);
  // exp(-i n gauge) stepping n by 2.
  const cplx step = std::polar(1.0, -2.0 * gauge);
  cplx factor = std::polar(1.0, -static_cast<double>(first_charge) * gauge);
  for (Eigen::Index k = 0; k < dim; ++k) {
    // Refresh periodically so the recurrence does not drift.
    if (k % 32 == 0)
      factor = std::polar(1.0, -static_cast<double>(first_charge + 2 * k) * gauge);
    out(k) = real_vector(k) * factor;
    factor *= step;
  }
  return out;
}

SpectralResult ground_state(const CircuitParams& params, const ControlPoint& point,
                            const ChargeBasis& basis, Parity parity,
                            const SpectralOptions& options) {
  const SectorTridiagonal t = sector_tridiagonal(params, point, basis, parity);
  const TridiagonalEigen eig = tridiagonal_eigen(t.diagonal, t.off_diagonal);
  SpectralResult out;
  out.energies = eig.values;
  out.charges = basis.charges(parity);
  out.states.resize(eig.vectors.rows(), eig.vectors.cols());
  for (Eigen::Index k = 0; k < eig.vectors.cols(); ++k)
    out.states.col(k) = apply_gauge(eig.vectors.col(k), t.gauge, t.first_charge);
  out.gap = eig.values.size() > 1 ? eig.values(1) - eig.values(0) : 0.0;
  out.near_degenerate = out.gap < options.degeneracy_tolerance * params.e_c();
  return out;
}

LowestLevels lowest_levels(const CircuitParams& params, const ControlPoint& point,
                           const ChargeBasis& basis, Parity parity,
                           const SpectralOptions& options) {
  const SectorTridiagonal t = sector_tridiagonal(params, point, basis, parity);
  const TridiagonalEigen eig = tridiagonal_eigen(t.diagonal, t.off_diagonal, 2);
  LowestLevels out;
  out.energy = eig.values(0);
  out.gap = eig.values(1) - eig.values(0);
  out.state = apply_gauge(eig.vectors.col(0), t.gauge, t.first_charge);
  out.near_degenerate = out.gap < options.degeneracy_tolerance * params.e_c();
  return out;
}

double ground_energy(const CircuitParams& params, const ControlPoint& point,
                     const ChargeBasis& basis, Parity parity) {
  const SectorTridiagonal t = sector_tridiagonal(params, point, basis, parity);
  return tridiagonal_eigen(t.diagonal, t.off_diagonal, 1, false).values(0);
}

std::pair<double, double> TwoLevelModel::energies() const {
  // Traceless Hermitian 2x2: eigenvalues +-|b|.
  const double bz = traceless(0, 0).real();
  const double b_perp = std::abs(traceless(0, 1));
  const double r = std::hypot(bz, b_perp);
  return {offset - r, offset + r};
}

TwoLevelModel effective_two_level(const CircuitParams& params, const ControlPoint& point,
                                  Parity parity) {
  // Projection onto {|n_hi>, |n_lo>} with n_hi - n_lo = 2, ordered as in the
  // model description: odd {+1, -1}, even {0, 2}.
  const bool odd = parity == Parity::odd;
  const int first = odd ? 1 : 0;
  const int second = odd ? -1 : 2;
  const double e_first = params.e_c() * (first - point.q) * (first - point.q);
  const double e_second = params.e_c() * (second - point.q) * (second - point.q);
  // <n+2|H|n> = -conj(c)/2, so <+1|H|-1> = -conj(c)/2 and <0|H|2> = -c/2.
  const cplx c = josephson_coupling(params, point.phi);
  const cplx off = odd ? -0.5 * std::conj(c) : -0.5 * c;

  TwoLevelModel m;
  m.offset = 0.5 * (e_first + e_second);
  const double bz = 0.5 * (e_first - e_second);
  m.traceless << bz, off, std::conj(off), -bz;
  m.valid = std::abs(point.phi - kPi / 2) <= params.e_c_dimless();
  return m;
}

SpinorAngles spinor_angles(const CircuitParams& params, const ControlPoint& point) {
  const double e_eff = effective_josephson(params, point.phi);
  const double charge_term = params.e_c() * point.q;
  const double tiny = 1e-14 * params.e_sigma();
  if (e_eff <= tiny && std::abs(charge_term) <= tiny)
    throw ParameterError("spinor direction undefined: E2_eff = 0 and q = 0");
  SpinorAngles a;
  a.xi = 2.0 * phase_offset(params, point.phi).value_or(0.0);
  a.theta = std::atan2(-0.5 * e_eff, charge_term);
  return a;
}

}  // namespace holoq
