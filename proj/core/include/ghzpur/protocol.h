#pragma once

// One purification round on two copies of an N-party GHZ-diagonal state:
// exact branch-by-branch simulation, a sampled version of the same circuit,
// and the closed-form fidelity map with its multi-round iteration.
//
// Register layout for a round: copy-1 atoms (party order), copy-2 atoms,
// then one photon at a time. Photon outcomes are read in the diagonal basis:
// "keep" = (|L>+|R>)/sqrt2, "flip" = (|L>-|R>)/sqrt2.

#include "ghzpur/faraday.h"
#include "ghzpur/ghz.h"
#include "ghzpur/qsim.h"
#include "ghzpur/resources.h"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ghzpur::protocol {

enum class ErrorMode : std::uint8_t { kBitFlip, kPhaseFlip };

std::string to_string(ErrorMode mode);
// "bit-flip" or "phase-flip"; throws InvalidArgumentError otherwise.
ErrorMode parse_error_mode(std::string_view s);

struct RoundConfig {
  int n_parties = 3;
  ErrorMode error_mode = ErrorMode::kBitFlip;
  // Empty: the ideal gate {-1, i, i, -1}.
  std::optional<faraday::CavityParams> cavity;
  faraday::Regime regime = faraday::Regime::kPurePhase;
  std::uint64_t seed = 0;  // sampled mode only
  double leakage_threshold = ghz::kDefaultLeakageThreshold;
  // Report leakage instead of throwing LeakageError.
  bool allow_leakage = false;

  // n_parties >= 2 and 2 n + 1 <= kMaxQubits.
  void validate() const;
  faraday::SingleCavityGate gate() const;
};

enum class PhotonOutcome : std::uint8_t { kKeep, kFlip };

// One character per party, 'k' or 'f'.
std::string pattern_string(std::span<const PhotonOutcome> pattern);

struct Correction {
  int party = 0;  // copy-1 atom, 0-based
  char pauli = 'Z';

  friend bool operator==(const Correction&, const Correction&) = default;
};

struct RoundOutcome {
  bool accepted = false;
  std::vector<PhotonOutcome> detector_pattern;
  // Copy-2 readout, big-endian over parties; absent for rejected branches.
  std::optional<std::uint64_t> atom_readout;
  std::vector<Correction> corrections;
  // Normalized copy-1 state after corrections; absent for rejected branches.
  std::optional<qsim::DensityMatrix> kept_state;
  double branch_probability = 0.0;
  // Overlap of kept_state with Phi+_0, NaN when rejected.
  double kept_fidelity = 0.0;
};

// Accepted iff all parties agree. The phase-flip procedure keeps only the
// all-flip pattern.
bool is_accepted(std::span<const PhotonOutcome> pattern, ErrorMode mode);

// Copy-1 Pauli corrections after the copy-2 readout.
std::vector<Correction> corrections_for(ErrorMode mode, std::span<const PhotonOutcome> pattern,
                                        std::uint64_t readout, int n);

struct ExactRoundResult {
  double accepted_probability = 0.0;
  ghz::GhzMixture kept;
  double leakage = 0.0;
  // Mixture over accepted branches, normalized.
  qsim::DensityMatrix kept_density;
  // Rejected patterns appear once; accepted ones once per readout.
  std::vector<RoundOutcome> branches;
};

// Throws LeakageError when the kept state is not GHZ-diagonal within
// cfg.leakage_threshold (unless allow_leakage), ImpossibleBranchError when no
// branch is accepted.
ExactRoundResult simulate_round_exact(const ghz::GhzMixture& input, const RoundConfig& cfg);

// Total weight the accepted photon patterns leave on a (possibly
// unnormalized) pure state over copy-1 then copy-2 atoms. Used to show that
// the cross terms between different GHZ components are filtered out.
double accepted_weight(const qsim::PureState& two_copy, const RoundConfig& cfg);

struct StepResult {
  ghz::GhzMixture mixture;
  double success_probability = 0.0;
};

// Closed-form effect of one ideal round on any GHZ-diagonal input.
StepResult analytic_round(const ghz::GhzMixture& m, ErrorMode mode);

// Family the input belongs to: bit-flip (only Phi+ components) or phase-flip
// (only Phi+_0 and Phi-_0). A pure Phi+_0 is reported as bit-flip.
std::optional<ErrorMode> recursion_family(const ghz::GhzMixture& m);

// w_i -> w_i^2 / sum w_j^2 within the family. Success probability is
// sum w_j^2 for the bit-flip family and sum w_j^2 / 2^(N-1) for the
// phase-flip family (one accepted pattern out of two, and every readout
// yields a keepable state). Throws FamilyError outside the family.
StepResult recursion_step(const ghz::GhzMixture& m, std::optional<ErrorMode> mode = {});

struct ThresholdVerdict {
  bool purifiable = false;
  double bound = 0.0;  // NaN when the discriminant is negative
  bool negative_discriminant = false;
};

// F0 > (3 - 2F1 - 2F2 - sqrt(1 + 4u - 12q - 8 F1 F2)) / 4 with u = F1 + F2,
// q = F1^2 + F2^2, F3 = 1 - F0 - F1 - F2.
ThresholdVerdict threshold_check(double f0, double f1, double f2);

struct RecursionState {
  ghz::GhzMixture weights;
  int rounds_done = 0;
  double p_success = 1.0;  // this round, including physical losses if given
  double pairs_consumed_expected = 1.0;
  double cumulative_success_probability = 1.0;
};

struct StopRule {
  std::optional<int> rounds;
  std::optional<double> target_fidelity;
  int max_rounds = 64;
};

struct PhysicalLosses {
  resources::EfficiencyParams efficiency;
  resources::LossModel model = resources::LossModel::kAsPrinted;
};

// Element 0 is the input (rounds_done = 0). Throws StagnationError when the
// target cannot be reached (a round fails to raise F0, or max_rounds hit),
// InvalidArgumentError for a target at or below the current fidelity.
std::vector<RecursionState> iterate(const ghz::GhzMixture& m, const StopRule& stop,
                                    std::optional<ErrorMode> mode = {},
                                    const std::optional<PhysicalLosses>& losses = {});

// F0..F3 for the report: the four bit-flip components for N = 3, or
// (Phi+_0, Phi-_0, 0, 0) for the phase-flip family.
std::array<double, 4> report_components(const ghz::GhzMixture& m);

struct MonteCarloEstimate {
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate = 0.0;
  double acceptance_stderr = 0.0;
  double kept_fidelity = 0.0;  // NaN when nothing was accepted
  double kept_fidelity_stderr = 0.0;
};

// Per-trial stream seed: splitmix64(splitmix64(base) + trial).
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial);

// Each trial samples a pure GHZ component per copy and runs the round with
// sampled measurements. Results depend only on cfg.seed and trials, not on
// the thread count (0 = hardware concurrency).
MonteCarloEstimate monte_carlo_round(const ghz::GhzMixture& input, const RoundConfig& cfg,
                                     std::uint64_t trials, unsigned threads = 1);

// `round,F0,F1,F2,F3,p_success,pairs_expected,cumulative_p`
void write_round_report(std::ostream& out, std::span<const RecursionState> states);
// `pattern,readout,probability,kept_fidelity`; readout empty when rejected.
void write_branch_dump(std::ostream& out, const ExactRoundResult& r, int n);

}  // namespace ghzpur::protocol
