// Device parameters, the truncated charge-basis Hamiltonian of the
// flux- and charge-biased pi-SQUID qubit, its parity-sector spectra, and
// the two-level effective models used to cross-check the full numerics.
//
// Unit system: hbar = 2e = 1, flux quantum = 2*pi. Energies are angular
// frequencies (rad/ns when times are in ns), the flux bias phi is in
// radians and the charge offset q is in units of 2e.

#ifndef HOLOQ_CIRCUIT_HPP
#define HOLOQ_CIRCUIT_HPP

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace holoq {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Charge parity of the island: the logical state of the qubit.
enum class Parity { even = 0, odd = 1 };

inline constexpr Parity kParities[] = {Parity::even, Parity::odd};

const char* to_string(Parity p);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double x);

/// Error raised for invalid physical inputs (non-positive energies, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Josephson energies E2, E2' of the two pi-periodic elements and the
/// charging energy E_C = (2e)^2 / 2C. The dimensionless constants are
/// derived on demand from these three numbers only.
class CircuitParams {
 public:
  CircuitParams(double e2, double e2_prime, double e_c);

  /// Builds parameters from E_sigma = E2 + E2', e_C = 2 E_C / E_sigma and
  /// delta = |E2' - E2| / E_sigma, with E2 >= E2'.
  static CircuitParams from_dimensionless(double e_sigma, double e_c_dimless, double delta);

  /// Same as from_dimensionless but with delta = eta * e_C.
  static CircuitParams from_eta(double e_sigma, double e_c_dimless, double eta);

  double e2() const { return e2_; }
  double e2_prime() const { return e2_prime_; }
  double e_c() const { return e_c_; }

  double e_sigma() const { return e2_ + e2_prime_; }
  double delta() const;
  double e_c_dimless() const { return 2.0 * e_c_ / e_sigma(); }
  double eta() const { return delta() / e_c_dimless(); }

 private:
  double e2_;
  double e2_prime_;
  double e_c_;
};

/// A point in the {phi, q} bias plane.
struct ControlPoint {
  double phi = 0.0;
  double q = 0.0;

  friend bool operator==(const ControlPoint&, const ControlPoint&) = default;
};

/// Charge states |n> with n in [-n_max, n_max]; each parity sector keeps
/// only the n of that parity.
class ChargeBasis {
 public:
  static constexpr int kDefaultNMax = 100;

  explicit ChargeBasis(int n_max = kDefaultNMax);

  int n_max() const { return n_max_; }
  /// 2 n_max + 1, both sectors together.
  int total_dimension() const { return 2 * n_max_ + 1; }
  int dimension(Parity p) const;
  /// Charge of the first (lowest-n) state of a sector; states step by 2.
  int first_charge(Parity p) const;
  std::vector<int> charges(Parity p) const;
  /// All charges -n_max..n_max in ascending order.
  std::vector<int> all_charges() const;

 private:
  int n_max_;
};

/// E2_eff(phi) = sqrt(E2^2 + E2'^2 + 2 E2 E2' cos 2phi).
double effective_josephson(const CircuitParams& params, double phi);

/// The complex coupling E2_eff * exp(2i phi~), i.e.
/// (E2 + E2') cos(phi) + i (E2 - E2') sin(phi).
///
/// Sign convention: expanding -E2 cos(2 varphi - phi) - E2' cos(2 varphi + phi)
/// gives -E2_eff cos(2 varphi - 2 phi~) with
///   E2_eff cos 2phi~ = (E2 + E2') cos phi,  E2_eff sin 2phi~ = (E2 - E2') sin phi.
/// This is the convention under which the charge-basis gauge factor
/// exp(-i n phi~) relates H(phi~) and H(0) exactly.
cplx josephson_coupling(const CircuitParams& params, double phi);

/// Phase offset phi~ in (-pi/2, pi/2]; nullopt when E2_eff = 0 and the
/// offset is undefined.
std::optional<double> phase_offset(const CircuitParams& params, double phi);

/// phi~ along a sweep of phi, unwrapped so that the result is continuous
/// wherever E2_eff > 0. Undefined points reuse the previous value.
std::vector<double> track_phase_offset(const CircuitParams& params, std::span<const double> phis);

/// Dense Hamiltonian of one parity sector in the charge basis (ascending n):
///   <n|H|n>     = E_C (n - q)^2
///   <n+2|H|n>   = -(E2_eff / 2) exp(-2i phi~)
Eigen::MatrixXcd build_hamiltonian(const CircuitParams& params, const ControlPoint& point,
                                   const ChargeBasis& basis, Parity parity);

/// Both sectors together, rows and columns ordered by n = -n_max..n_max.
Eigen::MatrixXcd build_full_hamiltonian(const CircuitParams& params, const ControlPoint& point,
                                        const ChargeBasis& basis);

/// Real symmetric tridiagonal form of a sector Hamiltonian after the gauge
/// rotation psi(n) -> exp(i n phi~) psi(n). The original eigenvectors are
/// recovered by multiplying component n by exp(-i n phi~).
struct SectorTridiagonal {
  std::vector<double> diagonal;
  double off_diagonal = 0.0;  // -E2_eff / 2, constant along the band
  double gauge = 0.0;         // phi~
  int first_charge = 0;

  std::size_t size() const { return diagonal.size(); }
};

SectorTridiagonal sector_tridiagonal(const CircuitParams& params, const ControlPoint& point,
                                     const ChargeBasis& basis, Parity parity);

/// Multiplies component k (charge first_charge + 2k) by exp(-i n gauge).
Eigen::VectorXcd apply_gauge(const Eigen::VectorXd& real_vector, double gauge, int first_charge);

struct SpectralOptions {
  /// A sector ground state whose gap is below this multiple of E_C is
  /// flagged as near-degenerate.
  double degeneracy_tolerance = 1e-6;
};

/// Full spectrum of one parity block.
struct SpectralResult {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXcd states;   // column k pairs with energies[k]
  std::vector<int> charges;
  double gap = 0.0;
  bool near_degenerate = false;
};

SpectralResult ground_state(const CircuitParams& params, const ControlPoint& point,
                            const ChargeBasis& basis, Parity parity,
                            const SpectralOptions& options = {});

/// Lowest two levels of a sector, computed without the full spectrum.
struct LowestLevels {
  double energy = 0.0;  // ground energy
  double gap = 0.0;     // first excited minus ground
  Eigen::VectorXcd state;
  bool near_degenerate = false;
};

LowestLevels lowest_levels(const CircuitParams& params, const ControlPoint& point,
                           const ChargeBasis& basis, Parity parity,
                           const SpectralOptions& options = {});

/// Ground energy only.
double ground_energy(const CircuitParams& params, const ControlPoint& point,
                     const ChargeBasis& basis, Parity parity);

/// Two-state model of a sector near phi = pi/2: the odd sector in the
/// {|+1>, |-1>} basis and the even sector in {|0>, |2>}. It is the exact
/// projection of the sector Hamiltonian onto those two charge states,
/// split into a constant offset and a traceless part. For the odd sector
///   traceless = -1/2 E2_eff (sx cos 2phi~ + sy sin 2phi~) - 2 q E_C sz,
/// and for the even sector the charge term is -2 (1 - q) E_C sz with the
/// transverse field rotating the opposite way (basis ordered by n).
struct TwoLevelModel {
  Eigen::Matrix2cd traceless;
  double offset = 0.0;
  /// |phi - pi/2| within e_C; outside this window the model is a poor
  /// description of the full sector.
  bool valid = false;

  Eigen::Matrix2cd hamiltonian() const {
    return traceless + offset * Eigen::Matrix2cd::Identity();
  }
  /// Lower and upper eigenvalues of hamiltonian().
  std::pair<double, double> energies() const;
};

TwoLevelModel effective_two_level(const CircuitParams& params, const ControlPoint& point,
                                  Parity parity);

/// Euler angles of the odd-sector effective spinor:
///   xi = 2 phi~,  theta = atan2(-E2_eff / 2, E_C q).
struct SpinorAngles {
  double xi = 0.0;
  double theta = 0.0;
};

/// Throws ParameterError where E2_eff = 0 and q = 0 (direction undefined).
SpinorAngles spinor_angles(const CircuitParams& params, const ControlPoint& point);

}  // namespace holoq

#endif  // HOLOQ_CIRCUIT_HPP
