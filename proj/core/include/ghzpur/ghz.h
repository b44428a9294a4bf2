#pragma once

// GHZ basis for N atoms and GHZ-diagonal mixtures over it.
//
// A basis element is (|x> + sign |~x>)/sqrt2 where x has |g_L> on party 0 and
// `flips` gives the remaining N-1 bits, big-endian over parties 1..N-1. For
// three parties the named states map as
//
//   Phi_0 <-> flips "00"   (|g_L g_L g_L> + ...)
//   Phi_1 <-> flips "01"   (flip on the third party)
//   Phi_2 <-> flips "10"   (flip on the second party)
//   Phi_3 <-> flips "11"   (flip on the first party, relative to the rest)
//
// so GhzIndex::named(i, s) is simply {flips = i, sign = s}.

#include "ghzpur/qsim.h"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ghzpur::ghz {

enum class Sign : std::uint8_t { kPlus, kMinus };

inline constexpr double kDefaultLeakageThreshold = 1e-9;
inline constexpr double kWeightTolerance = 1e-12;

struct GhzIndex {
  std::uint32_t flips = 0;
  Sign sign = Sign::kPlus;

  // Three-party naming Phi^{+-}_i, i in 0..3.
  static GhzIndex named(int i, Sign sign = Sign::kPlus);
  // Bit string of length n-1 plus '+' or '-'.
  static GhzIndex parse(std::string_view flips_bits, char sign);

  std::string flips_bits(int n) const;
  char sign_char() const { return sign == Sign::kPlus ? '+' : '-'; }

  friend auto operator<=>(const GhzIndex&, const GhzIndex&) = default;
};

// Flip pattern produced by a bit flip on `party` (0-based) of Phi_0.
std::uint32_t flip_pattern_for_party(int n, int party);

// a1 b1 c1 ... (or a2 b2 ... for the second copy).
qsim::Register atom_register(int n, qsim::Copy copy = qsim::Copy::kFirst);

qsim::PureState ghz_state(GhzIndex idx, int n, qsim::Copy copy = qsim::Copy::kFirst);
// Same element laid out over an arbitrary N-atom register.
qsim::PureState ghz_state(GhzIndex idx, const qsim::Register& reg);

// Probability vector over the 2^N GHZ basis elements.
class GhzMixture {
 public:
  // Dense layout: index = 2 * flips + (sign == kMinus). Throws
  // NormalizationError unless weights are non-negative and sum to 1.
  GhzMixture(int n, std::vector<double> weights);

  static GhzMixture pure(int n, GhzIndex idx = {});
  static GhzMixture from_map(int n, const std::map<GhzIndex, double>& weights);
  // Clamps round-off negatives (> -kWeightTolerance) and rescales to sum 1.
  static GhzMixture renormalized(int n, std::vector<double> weights);

  // {Phi+_0: f, Phi+_{party}: 1 - f}
  static GhzMixture binary_bit_flip(int n, double f, int party);
  // {Phi+_0: f, Phi-_0: 1 - f}
  static GhzMixture binary_phase_flip(int n, double f);

  static std::size_t dense_index(GhzIndex idx) {
    return 2 * std::size_t{idx.flips} + (idx.sign == Sign::kMinus ? 1 : 0);
  }
  static GhzIndex index_at(std::size_t dense) {
    return {static_cast<std::uint32_t>(dense / 2), dense % 2 ? Sign::kMinus : Sign::kPlus};
  }

  int n_parties() const { return n_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double weight(GhzIndex idx) const { return weights_.at(dense_index(idx)); }
  // Weight on Phi+_0.
  double fidelity() const { return weights_[0]; }
  // Non-zero entries in dense order.
  std::vector<std::pair<GhzIndex, double>> support() const;

 private:
  int n_;
  std::vector<double> weights_;
};

qsim::DensityMatrix mixture_to_density(const GhzMixture& m, qsim::Copy copy = qsim::Copy::kFirst);

struct GhzProjection {
  GhzMixture mixture;  // diagonal weights, renormalized
  // Frobenius norm of the off-diagonal part in the GHZ basis, plus any trace
  // deficit. Zero exactly for GHZ-diagonal input.
  double leakage = 0.0;
  double trace = 1.0;
};

// Projects an N-atom density matrix onto the GHZ diagonal (basis laid out
// over the matrix's own register).
GhzProjection density_to_mixture(const qsim::DensityMatrix& d);

// Hadamard on every target.
qsim::PureState hadamard_all(const qsim::PureState& s, std::span<const qsim::QubitLabel> targets);
qsim::DensityMatrix hadamard_all(const qsim::DensityMatrix& s,
                                 std::span<const qsim::QubitLabel> targets);

namespace noise {

// X on `party` (0-based) with probability p.
struct BitFlipOnParty {
  int party = 0;
  double p = 0.0;
};

// Z on one atom with probability p (Phi+ <-> Phi-).
struct PhaseFlip {
  double p = 0.0;
};

// Random X pattern: weight per flip pattern (the pattern a base Phi_0 would
// be carried to). Weights must sum to 1.
struct GeneralBitFlip {
  std::map<std::uint32_t, double> pattern_weights;
};

// GeneralBitFlip followed by a certain phase flip on every component.
struct AllPhaseFlip {
  std::map<std::uint32_t, double> pattern_weights;
};

}  // namespace noise

using NoiseChannel =
    std::variant<noise::BitFlipOnParty, noise::PhaseFlip, noise::GeneralBitFlip, noise::AllPhaseFlip>;

GhzMixture apply_noise(const GhzMixture& base, const NoiseChannel& channel);

// `flips_bitstring<TAB>sign<TAB>weight` lines; '#' starts a comment.
GhzMixture read_mixture(std::istream& in);
void write_mixture(std::ostream& out, const GhzMixture& m);

}  // namespace ghzpur::ghz
