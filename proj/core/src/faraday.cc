#include "ghzpur/faraday.h"

#include "ghzpur/errors.h"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace ghzpur::faraday {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kSingularDenominator = 1e-300;

template <typename State>
State send_through_two_cavities(const State& s, const SingleCavityGate& gate,
                                const qsim::QubitLabel& photon, const qsim::QubitLabel& atom1,
                                const qsim::QubitLabel& atom2) {
  if (photon.kind != qsim::QubitKind::kPhoton || !s.reg().contains(photon)) {
    throw InvalidArgumentError("two-cavity action needs the photon in the register");
  }
  // Both reflections are diagonal, so they compose into one operator on
  // (photon, atom1, atom2); the traversal order does not matter.
  const auto table = two_cavity_table(gate);
  qsim::Matrix u = qsim::Matrix::Zero(8, 8);
  for (int i = 0; i < 8; ++i) u(i, i) = table[i];
  const std::array<qsim::QubitLabel, 3> targets{photon, atom1, atom2};
  return gate.is_unitary() ? qsim::apply_local(u, targets, s) : qsim::apply_operator(u, targets, s);
}

}  // namespace

void CavityParams::validate() const {
  for (double v : {omega_c, omega_0, omega_p, kappa, gamma, g}) {
    if (!std::isfinite(v)) throw InvalidArgumentError("cavity parameters must be finite");
  }
  if (!(kappa > 0.0)) throw InvalidArgumentError("kappa must be positive");
  if (gamma < 0.0) throw InvalidArgumentError("gamma must be non-negative");
  if (g < 0.0) throw InvalidArgumentError("g must be non-negative");
}

CavityParams CavityParams::ideal_point(double kappa, double omega_c) {
  return {omega_c, omega_c, omega_c - kappa / 2.0, kappa, 0.0, kappa / 2.0};
}

CavityParams CavityParams::from_ratios(double cavity_detuning, double atom_detuning,
                                       double coupling, double decay) {
  return {cavity_detuning, atom_detuning, 0.0, 1.0, decay, coupling};
}

Complex reflection_coupled(const CavityParams& p) {
  p.validate();
  // Without coupling the atom drops out, including on its own resonance.
  if (p.g == 0.0) return reflection_empty(p);
  const Complex atom = kI * (p.omega_0 - p.omega_p) + p.gamma / 2.0;
  const Complex numerator = (kI * (p.omega_c - p.omega_p) - p.kappa / 2.0) * atom + p.g * p.g;
  const Complex denominator = (kI * (p.omega_c - p.omega_p) + p.kappa / 2.0) * atom + p.g * p.g;
  if (std::abs(denominator) < kSingularDenominator) {
    throw SingularParametersError("reflection coefficient denominator vanishes");
  }
  return numerator / denominator;
}

Complex reflection_empty(const CavityParams& p) {
  p.validate();
  const Complex detuning = kI * (p.omega_c - p.omega_p);
  return (detuning - p.kappa / 2.0) / (detuning + p.kappa / 2.0);
}

double wrap_phase(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

FaradayPhases phases(const CavityParams& p, Regime regime) {
  const Complex r = reflection_coupled(p);
  const Complex r0 = reflection_empty(p);
  if (regime == Regime::kPurePhase &&
      (std::abs(std::abs(r) - 1.0) > kUnitModulusTolerance ||
       std::abs(std::abs(r0) - 1.0) > kUnitModulusTolerance)) {
    throw AbsorptionRegimeError(fmt::format(
        "reflection is not a pure phase (|r| = {:.6g}, |r0| = {:.6g})", std::abs(r), std::abs(r0)));
  }
  FaradayPhases out;
  out.theta = wrap_phase(std::arg(r));
  out.theta_0 = wrap_phase(std::arg(r0));
  out.rotation = wrap_phase(out.theta - out.theta_0) / 2.0;
  return out;
}

SingleCavityGate SingleCavityGate::ideal() {
  return SingleCavityGate({Complex{-1.0, 0.0}, kI, kI, Complex{-1.0, 0.0}});
}

SingleCavityGate SingleCavityGate::from_params(const CavityParams& p, Regime regime) {
  const FaradayPhases ph = phases(p, regime);
  Complex coupled = std::polar(1.0, ph.theta);
  Complex empty = std::polar(1.0, ph.theta_0);
  if (regime == Regime::kAllowAbsorption) {
    coupled = reflection_coupled(p);
    empty = reflection_empty(p);
  }
  return SingleCavityGate({coupled, empty, empty, coupled});
}

qsim::Matrix SingleCavityGate::matrix() const {
  qsim::Matrix m = qsim::Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) m(i, i) = entries_[i];
  return m;
}

bool SingleCavityGate::is_unitary(double tolerance) const {
  for (const auto& e : entries_) {
    if (std::abs(std::abs(e) - 1.0) > tolerance) return false;
  }
  return true;
}

std::array<Complex, 8> two_cavity_table(const SingleCavityGate& gate) {
  std::array<Complex, 8> table{};
  for (int photon = 0; photon < 2; ++photon) {
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        table[4 * photon + 2 * a1 + a2] = gate.entry(photon, a1) * gate.entry(photon, a2);
      }
    }
  }
  return table;
}

qsim::PureState two_cavity_action(const qsim::PureState& s, const SingleCavityGate& gate,
                                  const qsim::QubitLabel& photon, const qsim::QubitLabel& atom1,
                                  const qsim::QubitLabel& atom2) {
  return send_through_two_cavities(s, gate, photon, atom1, atom2);
}

qsim::DensityMatrix two_cavity_action(const qsim::DensityMatrix& s, const SingleCavityGate& gate,
                                      const qsim::QubitLabel& photon,
                                      const qsim::QubitLabel& atom1,
                                      const qsim::QubitLabel& atom2) {
  return send_through_two_cavities(s, gate, photon, atom1, atom2);
}

qsim::PureState diagonal_photon(int party) {
  const double s = 1.0 / std::numbers::sqrt2;
  return {qsim::Register{qsim::QubitLabel::photon(party)}, {Complex{s}, Complex{s}}};
}

}  // namespace ghzpur::faraday
