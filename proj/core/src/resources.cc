#include "ghzpur/resources.h"

#include "ghzpur/errors.h"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace ghzpur::resources {

void EfficiencyParams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"T_f", T_f}, {"eta_0", eta_0}, {"eta_d", eta_d}, {"eta_a", eta_a}};
  for (const auto& [name, v] : fields) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgumentError(fmt::format("{} = {} outside [0, 1]", name, v));
    }
  }
}

double binary_postselection_probability(double fidelity) {
  if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
    throw InvalidArgumentError(fmt::format("fidelity {} outside [0, 1]", fidelity));
  }
  return fidelity * fidelity + (1.0 - fidelity) * (1.0 - fidelity);
}

double success_probability(double postselection_probability, int n, const EfficiencyParams& eff,
                           LossModel model) {
  eff.validate();
  if (n < 1) throw InvalidArgumentError("need at least one party");
  if (!(postselection_probability >= 0.0 && postselection_probability <= 1.0)) {
    throw InvalidArgumentError("postselection probability outside [0, 1]");
  }
  const double photon_losses = model == LossModel::kPerPhoton
                                   ? std::pow(eff.T_f * eff.eta_0, n)
                                   : eff.T_f * eff.eta_0;
  return postselection_probability * photon_losses * std::pow(eff.eta_d, n) * std::pow(eff.eta_a, n);
}

PhysicalParams default_physical_params() {
  const double omega_0 = 2.0 * std::numbers::pi * kSpeedOfLight / kRubidiumD2Wavelength;
  const double kappa = 2.0 * std::numbers::pi * kCavityDecayHz;
  return {faraday::CavityParams::ideal_point(kappa, omega_0), EfficiencyParams{}};
}

double quality_factor(const faraday::CavityParams& p) {
  p.validate();
  return p.omega_c / (2.0 * p.kappa);
}

}  // namespace ghzpur::resources
