#pragma once

// Physical success probability of one purification attempt.

#include "ghzpur/faraday.h"

namespace ghzpur::resources {

struct EfficiencyParams {
  double T_f = 0.2;     // fiber coupling and transmission
  double eta_0 = 0.95;  // other optical elements
  double eta_d = 0.28;  // single-photon detector
  double eta_a = 0.95;  // atomic state measurement

  // All four in [0, 1]; throws InvalidArgumentError.
  void validate() const;
};

enum class LossModel {
  // P = P_p * T_f * eta_0 * eta_d^N * eta_a^N
  kAsPrinted,
  // Extension: T_f and eta_0 also raised to the N-th power, one factor per
  // photon.
  kPerPhoton,
};

// F^2 + (1 - F)^2
double binary_postselection_probability(double fidelity);

double success_probability(double postselection_probability, int n, const EfficiencyParams& eff,
                           LossModel model = LossModel::kAsPrinted);

inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kRubidiumD2Wavelength = 780e-9;  // m
inline constexpr double kCavityDecayHz = 53e6;          // kappa / 2pi

struct PhysicalParams {
  faraday::CavityParams cavity;
  EfficiencyParams efficiency;
};

// 87Rb D2 line in a fiber Fabry-Perot cavity, operated at the ideal
// Faraday point (omega_c = omega_0, omega_p = omega_c - kappa/2, g = kappa/2,
// gamma = 0), with the quoted detector/fiber/optics/readout efficiencies.
PhysicalParams default_physical_params();

// omega_c / (2 kappa)
double quality_factor(const faraday::CavityParams& p);

}  // namespace ghzpur::resources
