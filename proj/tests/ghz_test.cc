#include "ghzpur/errors.h"
#include "ghzpur/ghz.h"

#include "oracle.h"

#include <gtest/gtest.h>

#include <sstream>

namespace {

using namespace ghzpur;
using namespace ghzpur::ghz;
using qsim::Complex;
using qsim::Copy;
using qsim::QubitLabel;

oracle::Vec to_vec(const qsim::PureState& s) {
  oracle::Vec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s.amplitude(i);
  return v;
}

TEST(GhzBasis, OrthonormalUpToFiveParties) {
  for (int n = 2; n <= 5; ++n) {
    const std::size_t count = std::size_t{1} << n;
    std::vector<oracle::Vec> states;
    for (std::size_t i = 0; i < count; ++i) states.push_back(to_vec(ghz_state(GhzMixture::index_at(i), n)));
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < count; ++j) {
        EXPECT_NEAR(std::abs(states[i].dot(states[j])), i == j ? 1.0 : 0.0, 1e-14) << n << " " << i << " " << j;
      }
    }
  }
}

TEST(GhzBasis, MatchesHandWrittenVectors) {
  for (int n = 2; n <= 4; ++n) {
    for (std::uint32_t flips = 0; flips < (1U << (n - 1)); ++flips) {
      for (bool minus : {false, true}) {
        const auto s = ghz_state({flips, minus ? Sign::kMinus : Sign::kPlus}, n);
        EXPECT_LT((to_vec(s) - oracle::ghz_vector(n, flips, minus)).cwiseAbs().maxCoeff(), 1e-15);
      }
    }
  }
}

TEST(GhzBasis, ThreePartyNaming) {
  // Phi+_1 = (|g_L g_L g_R> + |g_R g_R g_L>)/sqrt2: flip on the third party.
  const auto s = ghz_state(GhzIndex::named(1), 3);
  EXPECT_NEAR(s.amplitude(0b001).real(), oracle::kInvSqrt2, 1e-15);
  EXPECT_NEAR(s.amplitude(0b110).real(), oracle::kInvSqrt2, 1e-15);
  const auto m3 = ghz_state(GhzIndex::named(3, Sign::kMinus), 3);
  EXPECT_NEAR(m3.amplitude(0b011).real(), oracle::kInvSqrt2, 1e-15);
  EXPECT_NEAR(m3.amplitude(0b100).real(), -oracle::kInvSqrt2, 1e-15);
  EXPECT_THROW(GhzIndex::named(4), InvalidArgumentError);
}

TEST(GhzBasis, FlipPatternForParty) {
  EXPECT_EQ(flip_pattern_for_party(3, 0), 0b11U);
  EXPECT_EQ(flip_pattern_for_party(3, 1), 0b10U);
  EXPECT_EQ(flip_pattern_for_party(3, 2), 0b01U);
  EXPECT_EQ(flip_pattern_for_party(5, 4), 0b0001U);
  EXPECT_THROW(flip_pattern_for_party(3, 3), InvalidArgumentError);
}

TEST(GhzBasis, ParseRoundTrip) {
  const auto idx = GhzIndex::parse("101", '-');
  EXPECT_EQ(idx.flips, 0b101U);
  EXPECT_EQ(idx.sign, Sign::kMinus);
  EXPECT_EQ(idx.flips_bits(4), "101");
  EXPECT_EQ(idx.sign_char(), '-');
  EXPECT_THROW(GhzIndex::parse("12", '+'), InvalidArgumentError);
  EXPECT_THROW(GhzIndex::parse("01", '*'), InvalidArgumentError);
}

TEST(GhzBasis, OverCustomRegister) {
  const qsim::Register reg{QubitLabel::atom(2), QubitLabel::atom(0), QubitLabel::atom(1)};
  const auto s = ghz_state({}, reg);
  EXPECT_EQ(s.reg(), reg);
  EXPECT_NEAR(s.amplitude(0).real(), oracle::kInvSqrt2, 1e-15);
  EXPECT_NEAR(s.amplitude(7).real(), oracle::kInvSqrt2, 1e-15);
}

TEST(Mixture, Validation) {
  EXPECT_THROW(GhzMixture(3, {1.0, 0.0}), InvalidArgumentError);
  EXPECT_THROW(GhzMixture(2, {0.5, 0.5, 0.1, 0.0}), NormalizationError);
  EXPECT_THROW(GhzMixture(2, {1.1, -0.1, 0.0, 0.0}), NormalizationError);
  EXPECT_THROW(GhzMixture(1, {1.0, 0.0}), InvalidArgumentError);
  const auto r = GhzMixture::renormalized(2, {2.0, -1e-15, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(r.weights()[0], 0.5);
  EXPECT_EQ(r.weights()[1], 0.0);
}

TEST(Mixture, BinaryFamilies) {
  const auto b = GhzMixture::binary_bit_flip(3, 0.8, 2);
  EXPECT_DOUBLE_EQ(b.fidelity(), 0.8);
  EXPECT_NEAR(b.weight(GhzIndex::named(1)), 0.2, 1e-15);
  const auto first = GhzMixture::binary_bit_flip(3, 0.8, 0);
  EXPECT_NEAR(first.weight(GhzIndex::named(3)), 0.2, 1e-15);
  const auto p = GhzMixture::binary_phase_flip(4, 0.7);
  EXPECT_NEAR(p.weight({0, Sign::kMinus}), 0.3, 1e-15);
  EXPECT_EQ(p.support().size(), 2U);
}

TEST(Mixture, DensityRoundTripHasNoLeakage) {
  std::mt19937_64 rng(12);
  for (int n = 2; n <= 4; ++n) {
    const GhzMixture m(n, oracle::random_weights(std::size_t{1} << n, rng));
    const auto d = mixture_to_density(m, Copy::kSecond);
    EXPECT_NEAR(d.trace(), 1.0, 1e-13);
    const auto proj = density_to_mixture(d);
    EXPECT_LT(proj.leakage, 1e-13);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(proj.mixture.weights()[i], m.weights()[i], 1e-13);
  }
}

TEST(Mixture, DensityMatchesOracleSum) {
  const GhzMixture m = GhzMixture::from_map(3, {{GhzIndex::named(0), 0.6}, {GhzIndex::named(2, Sign::kMinus), 0.4}});
  const oracle::Vec a = oracle::ghz_vector(3, 0, false);
  const oracle::Vec b = oracle::ghz_vector(3, 2, true);
  const oracle::Mat expected = 0.6 * a * a.adjoint() + 0.4 * b * b.adjoint();
  EXPECT_LT((mixture_to_density(m).to_matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mixture, LeakageDetectsCoherences) {
  // |g_L g_L g_L> = (Phi+_0 + Phi-_0)/sqrt2 has a large off-diagonal term.
  const auto d = qsim::DensityMatrix::from_pure(qsim::PureState::basis(atom_register(3), 0));
  const auto proj = density_to_mixture(d);
  EXPECT_NEAR(proj.leakage, std::sqrt(2 * 0.25), 1e-12);
  EXPECT_NEAR(proj.mixture.fidelity(), 0.5, 1e-12);
}

TEST(Noise, BitFlipOnPartyBuildsBinaryMixture) {
  const auto base = GhzMixture::pure(3);
  const auto m = apply_noise(base, noise::BitFlipOnParty{2, 0.25});
  const auto expected = GhzMixture::binary_bit_flip(3, 0.75, 2);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m.weights()[i], expected.weights()[i], 1e-15);
}

TEST(Noise, MatchesDensityLevelChannel) {
  std::mt19937_64 rng(3);
  const GhzMixture m(3, oracle::random_weights(8, rng));
  const double p = 0.3;
  // X on party 1 with probability p, applied to the density matrix.
  const auto rho = mixture_to_density(m);
  const QubitLabel t[] = {QubitLabel::atom(1)};
  const auto flipped = qsim::apply_local(qsim::gates::pauli_x(), t, rho);
  const auto mixed = rho.scaled(1 - p) + flipped.scaled(p);
  const auto expected = density_to_mixture(mixed).mixture;
  const auto got = apply_noise(m, noise::BitFlipOnParty{1, p});
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(got.weights()[i], expected.weights()[i], 1e-13);

  const QubitLabel z[] = {QubitLabel::atom(2)};
  const auto phased = rho.scaled(1 - p) + qsim::apply_local(qsim::gates::pauli_z(), z, rho).scaled(p);
  const auto expected_z = density_to_mixture(phased).mixture;
  const auto got_z = apply_noise(m, noise::PhaseFlip{p});
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(got_z.weights()[i], expected_z.weights()[i], 1e-13);
}

TEST(Noise, GeneralAndAllPhaseFlip) {
  const auto base = GhzMixture::pure(3);
  const auto g = apply_noise(base, noise::GeneralBitFlip{{{0, 0.7}, {1, 0.1}, {2, 0.1}, {3, 0.1}}});
  EXPECT_NEAR(g.weight(GhzIndex::named(0)), 0.7, 1e-15);
  EXPECT_NEAR(g.weight(GhzIndex::named(3)), 0.1, 1e-15);
  const auto a = apply_noise(base, noise::AllPhaseFlip{{{0, 0.7}, {1, 0.3}}});
  EXPECT_NEAR(a.weight(GhzIndex::named(0, Sign::kMinus)), 0.7, 1e-15);
  EXPECT_NEAR(a.weight(GhzIndex::named(1, Sign::kMinus)), 0.3, 1e-15);
  EXPECT_THROW(apply_noise(base, noise::GeneralBitFlip{{{0, 0.5}}}), NormalizationError);
}

TEST(Hadamard, SandwichTurnsPhaseFlipIntoBitFlip) {
  // H on every atom maps Phi-_0 to a state orthogonal to H Phi+_0 and is its
  // own inverse.
  const auto reg = atom_register(3);
  const auto& labels = reg.labels();
  const auto plus = hadamard_all(ghz_state({}, 3), labels);
  const auto minus = hadamard_all(ghz_state({0, Sign::kMinus}, 3), labels);
  EXPECT_NEAR(qsim::fidelity(plus, minus), 0.0, 1e-15);
  const auto back = hadamard_all(plus, labels);
  EXPECT_NEAR(qsim::fidelity(back, ghz_state({}, 3)), 1.0, 1e-14);
  // H^3 Phi+_0 is the even-parity superposition.
  for (std::size_t i = 0; i < 8; ++i) {
    const double expected = std::popcount(i) % 2 == 0 ? 0.5 : 0.0;
    EXPECT_NEAR(plus.amplitude(i).real(), expected, 1e-15);
  }
}

TEST(MixtureIo, RoundTripAndErrors) {
  std::mt19937_64 rng(4);
  const GhzMixture m(3, oracle::random_weights(8, rng));
  std::ostringstream out;
  write_mixture(out, m);
  std::istringstream in("# weights\n" + out.str() + "\n");
  const auto back = read_mixture(in);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(back.weights()[i], m.weights()[i]);

  std::istringstream dup("00 + 0.5\n00 + 0.5\n");
  EXPECT_THROW(read_mixture(dup), InvalidArgumentError);
  std::istringstream mixed("00 + 0.5\n0 + 0.5\n");
  EXPECT_THROW(read_mixture(mixed), InvalidArgumentError);
  std::istringstream bad("00 + abc\n");
  EXPECT_THROW(read_mixture(bad), InvalidArgumentError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(read_mixture(empty), InvalidArgumentError);
  std::istringstream unnormalized("00 + 0.5\n");
  EXPECT_THROW(read_mixture(unnormalized), NormalizationError);
}

}  // namespace
