#include "ghzpur/ghz.h"

#include "ghzpur/errors.h"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ghzpur::ghz {

namespace {

void check_parties(int n) {
  if (n < 2) throw InvalidArgumentError(fmt::format("GHZ states need n >= 2 (got {})", n));
  if (n > qsim::kMaxQubits) throw RegisterOverflowError("too many parties");
}

std::uint32_t pattern_count(int n) { return std::uint32_t{1} << (n - 1); }

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgumentError(fmt::format("probability {} outside [0, 1]", p));
}

std::vector<double> pattern_distribution(int n, const std::map<std::uint32_t, double>& weights) {
  std::vector<double> q(pattern_count(n), 0.0);
  double total = 0.0;
  for (const auto& [pattern, w] : weights) {
    if (pattern >= q.size()) throw InvalidArgumentError(fmt::format("flip pattern {} out of range", pattern));
    if (w < 0.0) throw NormalizationError("negative flip-pattern weight");
    q[pattern] += w;
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw NormalizationError(fmt::format("flip-pattern weights sum to {}", total));
  }
  return q;
}

std::vector<double> convolve_patterns(const GhzMixture& base, const std::vector<double>& q) {
  std::vector<double> out(base.size(), 0.0);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double w = base.weights()[i];
    if (w == 0.0) continue;
    const GhzIndex idx = GhzMixture::index_at(i);
    for (std::uint32_t b = 0; b < q.size(); ++b) {
      if (q[b] == 0.0) continue;
      out[GhzMixture::dense_index({idx.flips ^ b, idx.sign})] += w * q[b];
    }
  }
  return out;
}

std::vector<double> flip_all_signs(const std::vector<double>& w) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); i += 2) {
    out[i] = w[i + 1];
    out[i + 1] = w[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

GhzIndex GhzIndex::named(int i, Sign sign) {
  if (i < 0 || i > 3) throw InvalidArgumentError("named three-party states are Phi_0..Phi_3");
  return {static_cast<std::uint32_t>(i), sign};
}

GhzIndex GhzIndex::parse(std::string_view flips_bits, char sign) {
  if (flips_bits.empty() || flips_bits.size() > 31) {
    throw InvalidArgumentError("flip bit string must have 1..31 characters");
  }
  GhzIndex idx;
  for (char c : flips_bits) {
    if (c != '0' && c != '1') throw InvalidArgumentError(fmt::format("bad flip bit '{}'", c));
    idx.flips = (idx.flips << 1) | static_cast<std::uint32_t>(c - '0');
  }
  if (sign == '+') {
    idx.sign = Sign::kPlus;
  } else if (sign == '-') {
    idx.sign = Sign::kMinus;
  } else {
    throw InvalidArgumentError(fmt::format("bad sign '{}'", sign));
  }
  return idx;
}

std::string GhzIndex::flips_bits(int n) const {
  std::string out;
  for (int k = n - 2; k >= 0; --k) out.push_back(((flips >> k) & 1U) ? '1' : '0');
  return out;
}

std::uint32_t flip_pattern_for_party(int n, int party) {
  check_parties(n);
  if (party < 0 || party >= n) throw InvalidArgumentError(fmt::format("party {} out of range", party));
  if (party == 0) return pattern_count(n) - 1;
  return std::uint32_t{1} << (n - 1 - party);
}

qsim::Register atom_register(int n, qsim::Copy copy) {
  std::vector<qsim::QubitLabel> labels;
  for (int k = 0; k < n; ++k) labels.push_back(qsim::QubitLabel::atom(k, copy));
  return qsim::Register(std::move(labels));
}

qsim::PureState ghz_state(GhzIndex idx, const qsim::Register& reg) {
  const int n = reg.size();
  check_parties(n);
  if (idx.flips >= pattern_count(n)) throw InvalidArgumentError("flip pattern out of range");
  const double s = 1.0 / std::numbers::sqrt2;
  std::vector<qsim::Complex> amps(reg.dim());
  const std::size_t x = idx.flips;
  const std::size_t complement = x ^ (reg.dim() - 1);
  amps[x] = s;
  amps[complement] = idx.sign == Sign::kPlus ? s : -s;
  return {reg, std::move(amps)};
}

qsim::PureState ghz_state(GhzIndex idx, int n, qsim::Copy copy) {
  check_parties(n);
  return ghz_state(idx, atom_register(n, copy));
}

GhzMixture::GhzMixture(int n, std::vector<double> weights) : n_(n), weights_(std::move(weights)) {
  check_parties(n);
  if (weights_.size() != std::size_t{2} * pattern_count(n)) {
    throw InvalidArgumentError(fmt::format("{} weights for {} parties", weights_.size(), n));
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw NormalizationError(fmt::format("weight {} is negative", w));
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw NormalizationError(fmt::format("weights sum to {:.17g}", total));
  }
}

GhzMixture GhzMixture::pure(int n, GhzIndex idx) { return from_map(n, {{idx, 1.0}}); }

GhzMixture GhzMixture::from_map(int n, const std::map<GhzIndex, double>& weights) {
  check_parties(n);
  std::vector<double> dense(std::size_t{2} * pattern_count(n), 0.0);
  for (const auto& [idx, w] : weights) {
    if (idx.flips >= pattern_count(n)) throw InvalidArgumentError("flip pattern out of range");
    dense[dense_index(idx)] += w;
  }
  return {n, std::move(dense)};
}

GhzMixture GhzMixture::renormalized(int n, std::vector<double> weights) {
  double total = 0.0;
  for (auto& w : weights) {
    if (w < 0.0 && w > -kWeightTolerance) w = 0.0;
    total += w;
  }
  if (!(total > 0.0)) throw NormalizationError("cannot renormalize zero weights");
  for (auto& w : weights) w /= total;
  return {n, std::move(weights)};
}

GhzMixture GhzMixture::binary_bit_flip(int n, double f, int party) {
  check_probability(f);
  return apply_noise(pure(n), noise::BitFlipOnParty{party, 1.0 - f});
}

GhzMixture GhzMixture::binary_phase_flip(int n, double f) {
  check_probability(f);
  return apply_noise(pure(n), noise::PhaseFlip{1.0 - f});
}

std::vector<std::pair<GhzIndex, double>> GhzMixture::support() const {
  std::vector<std::pair<GhzIndex, double>> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0.0) out.emplace_back(index_at(i), weights_[i]);
  }
  return out;
}

qsim::DensityMatrix mixture_to_density(const GhzMixture& m, qsim::Copy copy) {
  const qsim::Register reg = atom_register(m.n_parties(), copy);
  const std::size_t d = reg.dim();
  std::vector<qsim::Complex> entries(d * d);
  // Each element touches only |x> and |~x>.
  for (const auto& [idx, w] : m.support()) {
    const std::size_t x = idx.flips;
    const std::size_t xc = x ^ (d - 1);
    const double s = idx.sign == Sign::kPlus ? 1.0 : -1.0;
    entries[x * d + x] += w / 2.0;
    entries[xc * d + xc] += w / 2.0;
    entries[x * d + xc] += s * w / 2.0;
    entries[xc * d + x] += s * w / 2.0;
  }
  return {reg, std::move(entries)};
}

GhzProjection density_to_mixture(const qsim::DensityMatrix& d) {
  const int n = d.num_qubits();
  check_parties(n);
  const std::size_t dim = d.dim();
  const double trace = d.trace();
  if (!(trace > 0.0)) throw InvalidArgumentError("density matrix has no weight");

  // <i|d|j> for GHZ elements i, j, using their two-term support.
  auto element = [&](GhzIndex a, GhzIndex b) {
    const std::size_t xa = a.flips;
    const std::size_t xac = xa ^ (dim - 1);
    const std::size_t xb = b.flips;
    const std::size_t xbc = xb ^ (dim - 1);
    const double sa = a.sign == Sign::kPlus ? 1.0 : -1.0;
    const double sb = b.sign == Sign::kPlus ? 1.0 : -1.0;
    return 0.5 * (d(xa, xb) + sb * d(xa, xbc) + sa * d(xac, xb) + sa * sb * d(xac, xbc));
  };

  const std::size_t count = dim;  // 2^N basis elements
  std::vector<double> diagonal(count);
  double off_diagonal = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const GhzIndex a = GhzMixture::index_at(i);
    for (std::size_t j = 0; j < count; ++j) {
      const qsim::Complex e = element(a, GhzMixture::index_at(j));
      if (i == j) {
        diagonal[i] = e.real();
      } else {
        off_diagonal += std::norm(e);
      }
    }
  }
  double diag_sum = 0.0;
  for (double w : diagonal) diag_sum += w;
  GhzProjection out{GhzMixture::renormalized(n, diagonal), 0.0, trace};
  out.leakage = std::sqrt(off_diagonal) / trace + std::abs(diag_sum - trace) / trace;
  return out;
}

qsim::PureState hadamard_all(const qsim::PureState& s, std::span<const qsim::QubitLabel> targets) {
  qsim::PureState out = s;
  const qsim::Matrix h = qsim::gates::hadamard();
  for (const auto& t : targets) out = qsim::apply_local(h, std::span(&t, 1), out);
  return out;
}

qsim::DensityMatrix hadamard_all(const qsim::DensityMatrix& s,
                                 std::span<const qsim::QubitLabel> targets) {
  qsim::DensityMatrix out = s;
  const qsim::Matrix h = qsim::gates::hadamard();
  for (const auto& t : targets) out = qsim::apply_local(h, std::span(&t, 1), out);
  return out;
}

GhzMixture apply_noise(const GhzMixture& base, const NoiseChannel& channel) {
  const int n = base.n_parties();
  return std::visit(
      [&](const auto& ch) -> GhzMixture {
        using T = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<T, noise::BitFlipOnParty>) {
          check_probability(ch.p);
          const std::uint32_t f = flip_pattern_for_party(n, ch.party);
          return GhzMixture::renormalized(n, convolve_patterns(base, pattern_distribution(n, {{0, 1.0 - ch.p}, {f, ch.p}})));
        } else if constexpr (std::is_same_v<T, noise::PhaseFlip>) {
          check_probability(ch.p);
          std::vector<double> w(base.weights().begin(), base.weights().end());
          const auto flipped = flip_all_signs(w);
          for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - ch.p) * w[i] + ch.p * flipped[i];
          return GhzMixture::renormalized(n, std::move(w));
        } else if constexpr (std::is_same_v<T, noise::GeneralBitFlip>) {
          return GhzMixture::renormalized(n, convolve_patterns(base, pattern_distribution(n, ch.pattern_weights)));
        } else {
          return GhzMixture::renormalized(
              n, flip_all_signs(convolve_patterns(base, pattern_distribution(n, ch.pattern_weights))));
        }
      },
      channel);
}

GhzMixture read_mixture(std::istream& in) {
  std::map<GhzIndex, double> weights;
  int n = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    std::istringstream fields(body);
    std::string bits, sign, weight_text, extra;
    if (!(fields >> bits >> sign >> weight_text) || (fields >> extra) || sign.size() != 1) {
      throw InvalidArgumentError(fmt::format("mixture line {}: expected flips, sign, weight", line_no));
    }
    const GhzIndex idx = GhzIndex::parse(bits, sign[0]);
    const int line_n = static_cast<int>(bits.size()) + 1;
    if (n != 0 && line_n != n) {
      throw InvalidArgumentError(fmt::format("mixture line {}: inconsistent party count", line_no));
    }
    n = line_n;
    double w = 0.0;
    const char* end = weight_text.data() + weight_text.size();
    if (auto [ptr, ec] = std::from_chars(weight_text.data(), end, w); ec != std::errc{} || ptr != end) {
      throw InvalidArgumentError(fmt::format("mixture line {}: bad weight '{}'", line_no, weight_text));
    }
    if (!weights.emplace(idx, w).second) {
      throw InvalidArgumentError(fmt::format("mixture line {}: duplicate entry", line_no));
    }
  }
  if (n == 0) throw InvalidArgumentError("mixture file has no entries");
  return GhzMixture::from_map(n, weights);
}

void write_mixture(std::ostream& out, const GhzMixture& m) {
  for (const auto& [idx, w] : m.support()) {
    out << fmt::format("{}\t{}\t{:.17g}\n", idx.flips_bits(m.n_parties()), idx.sign_char(), w);
  }
}

}  // namespace ghzpur::ghz
