#pragma once

// Single-photon reflection off a three-level atom in a low-Q cavity, and the
// photon-atom phase gates built from it.

#include "ghzpur/qsim.h"

#include <array>
#include <span>

namespace ghzpur::faraday {

using qsim::Complex;

// Angular frequencies and rates in rad/s. Only differences of the three
// frequencies and ratios to kappa matter, so dimensionless values (kappa = 1)
// are equally valid.
struct CavityParams {
  double omega_c = 0.0;  // cavity mode
  double omega_0 = 0.0;  // atomic transition
  double omega_p = 0.0;  // photon pulse carrier
  double kappa = 1.0;    // cavity damping
  double gamma = 0.0;    // atomic decay
  double g = 0.0;        // atom-cavity coupling

  // kappa > 0, gamma >= 0, g >= 0, all finite. Throws InvalidArgumentError.
  void validate() const;

  // omega_c = omega_0, omega_p = omega_c - kappa/2, g = kappa/2, gamma = 0.
  static CavityParams ideal_point(double kappa = 1.0, double omega_c = 0.0);

  // Dimensionless parameters with kappa = 1 and omega_p = 0; arguments are
  // (omega_c - omega_p)/kappa, (omega_0 - omega_p)/kappa, g/kappa, gamma/kappa.
  static CavityParams from_ratios(double cavity_detuning, double atom_detuning, double coupling,
                                  double decay);
};

// r(omega_p) with the atom coupled; equals r_0 when g = 0. Throws
// SingularParametersError when the denominator vanishes.
Complex reflection_coupled(const CavityParams& p);

// r_0(omega_p) for an empty (uncoupled) cavity; unit modulus for kappa > 0.
Complex reflection_empty(const CavityParams& p);

struct FaradayPhases {
  double theta = 0.0;    // arg of the coupled reflection, in (-pi, pi]
  double theta_0 = 0.0;  // arg of the empty-cavity reflection, in (-pi, pi]
  double rotation = 0.0;  // wrap(theta - theta_0) / 2, in (-pi/2, pi/2]
};

enum class Regime {
  kPurePhase,        // require |r| and |r_0| within kUnitModulusTolerance of 1
  kAllowAbsorption,  // proceed with lossy reflection
};

inline constexpr double kUnitModulusTolerance = 1e-3;

// Wraps an angle into (-pi, pi].
double wrap_phase(double angle);

// Throws AbsorptionRegimeError under kPurePhase when either reflection
// coefficient is not unit-modulus.
FaradayPhases phases(const CavityParams& p, Regime regime = Regime::kPurePhase);

// Diagonal photon-atom gate. Entries in photon-major big-endian order:
// |L g_L>, |L g_R>, |R g_L>, |R g_R>.
class SingleCavityGate {
 public:
  // {-1, i, i, -1} exactly.
  static SingleCavityGate ideal();

  // |L> couples to |g_L> and |R> to |g_R>: matched pairs pick up the coupled
  // reflection, mismatched pairs the empty-cavity one. Under kPurePhase the
  // entries are the unit phases e^{i theta} / e^{i theta_0}; under
  // kAllowAbsorption they are the raw reflection coefficients.
  static SingleCavityGate from_params(const CavityParams& p, Regime regime = Regime::kPurePhase);

  explicit SingleCavityGate(std::array<Complex, 4> entries) : entries_(entries) {}

  const std::array<Complex, 4>& entries() const { return entries_; }
  Complex entry(int photon, int atom) const { return entries_[2 * photon + atom]; }
  qsim::Matrix matrix() const;
  bool is_unitary(double tolerance = qsim::kUnitaryTolerance) const;

 private:
  std::array<Complex, 4> entries_;
};

// Diagonal phases of one photon reflected off two cavities, indexed
// big-endian over (photon, atom1, atom2).
std::array<Complex, 8> two_cavity_table(const SingleCavityGate& gate);

// Sends `photon` through the cavity of `atom1` and then of `atom2`. Other
// qubits in the register are untouched. Non-unitary gates are applied as
// plain operators.
qsim::PureState two_cavity_action(const qsim::PureState& s, const SingleCavityGate& gate,
                                  const qsim::QubitLabel& photon, const qsim::QubitLabel& atom1,
                                  const qsim::QubitLabel& atom2);
qsim::DensityMatrix two_cavity_action(const qsim::DensityMatrix& s, const SingleCavityGate& gate,
                                      const qsim::QubitLabel& photon,
                                      const qsim::QubitLabel& atom1,
                                      const qsim::QubitLabel& atom2);

// (|L> + |R>)/sqrt2 on `photon`.
qsim::PureState diagonal_photon(int party);

}  // namespace ghzpur::faraday
