#include "ghzpur/protocol.h"

#include "ghzpur/errors.h"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>

namespace ghzpur::protocol {

using qsim::Basis;
using qsim::Copy;
using qsim::DensityMatrix;
using qsim::PureState;
using qsim::QubitLabel;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<QubitLabel> copy_atoms(int n, Copy copy) {
  return ghz::atom_register(n, copy).labels();
}

DensityMatrix as_state(const PureState& p, const DensityMatrix*) { return DensityMatrix::from_pure(p); }
PureState as_state(const PureState& p, const PureState*) { return p; }

template <typename State>
State apply_to_each(const qsim::Matrix& u, std::span<const QubitLabel> targets, const State& s) {
  State out = s;
  for (const auto& t : targets) {
    const QubitLabel one[] = {t};
    out = qsim::apply_local(u, one, out);
  }
  return out;
}

// Photon for `party` enters in (|L>+|R>)/sqrt2, reflects off the copy-1 then
// the copy-2 cavity of that party.
template <typename State>
State scatter_photon(const State& s, const faraday::SingleCavityGate& gate, int party) {
  State with = qsim::tensor(s, as_state(faraday::diagonal_photon(party), static_cast<State*>(nullptr)));
  return faraday::two_cavity_action(with, gate, QubitLabel::photon(party),
                                    QubitLabel::atom(party, Copy::kFirst),
                                    QubitLabel::atom(party, Copy::kSecond));
}

template <typename State>
using LeafFn = std::function<void(const State&, std::span<const PhotonOutcome>)>;

// Depth-first over all detector patterns. Leaves receive the unnormalized
// 2N-atom branch state.
template <typename State>
void enumerate_patterns(const State& s, const faraday::SingleCavityGate& gate, int n, int party,
                        std::vector<PhotonOutcome>& pattern, const LeafFn<State>& leaf) {
  if (party == n) {
    leaf(s, pattern);
    return;
  }
  std::optional<State> keep;
  std::optional<State> flip;
  {
    const State scattered = scatter_photon(s, gate, party);
    const QubitLabel photon[] = {QubitLabel::photon(party)};
    keep.emplace(qsim::collapse(photon, Basis::kDiagonal, 0, scattered));
    flip.emplace(qsim::collapse(photon, Basis::kDiagonal, 1, scattered));
  }
  pattern.push_back(PhotonOutcome::kKeep);
  enumerate_patterns(*keep, gate, n, party + 1, pattern, leaf);
  keep.reset();
  pattern.back() = PhotonOutcome::kFlip;
  enumerate_patterns(*flip, gate, n, party + 1, pattern, leaf);
  pattern.pop_back();
}

bool all_keep(std::span<const PhotonOutcome> pattern) {
  return std::all_of(pattern.begin(), pattern.end(),
                     [](PhotonOutcome o) { return o == PhotonOutcome::kKeep; });
}

// Copy-2 preparation before the readout: bit flips on every copy-2 atom after
// an all-keep bit-flip round, then Hadamards.
template <typename State>
State prepare_readout(const State& s, ErrorMode mode, std::span<const PhotonOutcome> pattern, int n) {
  const auto copy2 = copy_atoms(n, Copy::kSecond);
  State t = s;
  if (mode == ErrorMode::kBitFlip && all_keep(pattern)) t = apply_to_each(qsim::gates::pauli_x(), copy2, t);
  return ghz::hadamard_all(t, copy2);
}

template <typename State>
State finish_copy1(const State& s, ErrorMode mode, std::span<const Correction> corrections, int n) {
  State t = s;
  for (const auto& c : corrections) {
    const QubitLabel target[] = {QubitLabel::atom(c.party, Copy::kFirst)};
    const qsim::Matrix u = c.pauli == 'X' ? qsim::gates::pauli_x() : qsim::gates::pauli_z();
    t = qsim::apply_local(u, target, t);
  }
  if (mode == ErrorMode::kPhaseFlip) t = ghz::hadamard_all(t, copy_atoms(n, Copy::kFirst));
  return t;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{:.17g}", v);
}

}  // namespace

std::string to_string(ErrorMode mode) {
  return mode == ErrorMode::kBitFlip ? "bit-flip" : "phase-flip";
}

ErrorMode parse_error_mode(std::string_view s) {
  if (s == "bit-flip") return ErrorMode::kBitFlip;
  if (s == "phase-flip") return ErrorMode::kPhaseFlip;
  throw InvalidArgumentError(fmt::format("unknown error mode '{}'", s));
}

void RoundConfig::validate() const {
  if (n_parties < 2) throw InvalidArgumentError(fmt::format("need n >= 2, got {}", n_parties));
  if (2 * n_parties + 1 > qsim::kMaxQubits) {
    throw RegisterOverflowError(fmt::format("{} parties need {} qubits, limit is {}", n_parties,
                                            2 * n_parties + 1, qsim::kMaxQubits));
  }
  if (!(leakage_threshold >= 0.0)) throw InvalidArgumentError("leakage threshold must be >= 0");
  if (cavity) cavity->validate();
}

faraday::SingleCavityGate RoundConfig::gate() const {
  return cavity ? faraday::SingleCavityGate::from_params(*cavity, regime)
                : faraday::SingleCavityGate::ideal();
}

std::string pattern_string(std::span<const PhotonOutcome> pattern) {
  std::string s;
  for (auto o : pattern) s += o == PhotonOutcome::kKeep ? 'k' : 'f';
  return s;
}

bool is_accepted(std::span<const PhotonOutcome> pattern, ErrorMode mode) {
  if (pattern.empty()) return false;
  if (mode == ErrorMode::kPhaseFlip) {
    return std::all_of(pattern.begin(), pattern.end(),
                       [](PhotonOutcome o) { return o == PhotonOutcome::kFlip; });
  }
  return std::all_of(pattern.begin(), pattern.end(),
                     [&](PhotonOutcome o) { return o == pattern.front(); });
}

std::vector<Correction> corrections_for(ErrorMode mode, std::span<const PhotonOutcome> pattern,
                                        std::uint64_t readout, int n) {
  if (!is_accepted(pattern, mode)) throw InvalidArgumentError("pattern was not accepted");
  if (static_cast<int>(pattern.size()) != n) throw ShapeMismatchError("pattern length differs from n");
  auto bit = [&](int party) { return static_cast<int>((readout >> (n - 1 - party)) & 1U); };
  std::vector<Correction> out;
  if (mode == ErrorMode::kBitFlip) {
    // The kept copy-1 state carries a relative sign (-1)^(|m|), plus (-1)^N
    // after the all-flip pattern.
    int parity = std::popcount(readout);
    if (!all_keep(pattern)) parity += n;
    if (parity % 2) out.push_back({0, 'Z'});
    return out;
  }
  // Phase-flip round: Z on every party whose readout differs from party 0,
  // applied before the recovering Hadamards.
  for (int k = 1; k < n; ++k) {
    if (bit(k) != bit(0)) out.push_back({k, 'Z'});
  }
  return out;
}

ExactRoundResult simulate_round_exact(const ghz::GhzMixture& input, const RoundConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_parties;
  if (input.n_parties() != n) {
    throw ShapeMismatchError(fmt::format("mixture has {} parties, config {}", input.n_parties(), n));
  }
  const auto gate = cfg.gate();
  const auto copy1 = copy_atoms(n, Copy::kFirst);
  const auto copy2 = copy_atoms(n, Copy::kSecond);

  DensityMatrix start = qsim::tensor(ghz::mixture_to_density(input, Copy::kFirst),
                                     ghz::mixture_to_density(input, Copy::kSecond));
  if (cfg.error_mode == ErrorMode::kPhaseFlip) {
    auto all = copy1;
    all.insert(all.end(), copy2.begin(), copy2.end());
    start = ghz::hadamard_all(start, all);
  }

  std::vector<RoundOutcome> branches;
  std::optional<DensityMatrix> kept_sum;
  double accepted_probability = 0.0;
  const PureState target = ghz::ghz_state({}, n, Copy::kFirst);

  LeafFn<DensityMatrix> leaf = [&](const DensityMatrix& s, std::span<const PhotonOutcome> pattern) {
    if (!is_accepted(pattern, cfg.error_mode)) {
      RoundOutcome r;
      r.detector_pattern.assign(pattern.begin(), pattern.end());
      r.branch_probability = s.trace();
      r.kept_fidelity = kNan;
      branches.push_back(std::move(r));
      return;
    }
    const DensityMatrix ready = prepare_readout(s, cfg.error_mode, pattern, n);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      RoundOutcome r;
      r.accepted = true;
      r.detector_pattern.assign(pattern.begin(), pattern.end());
      r.atom_readout = m;
      r.corrections = corrections_for(cfg.error_mode, pattern, m, n);
      DensityMatrix kept = finish_copy1(qsim::collapse(copy2, Basis::kComputational, m, ready),
                                        cfg.error_mode, r.corrections, n);
      r.branch_probability = kept.trace();
      accepted_probability += r.branch_probability;
      if (r.branch_probability > qsim::kImpossibleBranchWeight) {
        DensityMatrix normalized = kept.normalized();
        r.kept_fidelity = qsim::fidelity(normalized, target);
        r.kept_state = std::move(normalized);
      } else {
        r.kept_fidelity = kNan;
      }
      kept_sum = kept_sum ? *kept_sum + kept : kept;
      branches.push_back(std::move(r));
    }
  };
  std::vector<PhotonOutcome> pattern;
  enumerate_patterns(start, gate, n, 0, pattern, leaf);

  if (!(accepted_probability > qsim::kImpossibleBranchWeight)) {
    throw ImpossibleBranchError("no accepted branch has non-zero probability");
  }
  DensityMatrix kept_density = kept_sum->normalized();
  auto projection = ghz::density_to_mixture(kept_density);
  if (projection.leakage > cfg.leakage_threshold && !cfg.allow_leakage) {
    throw LeakageError(fmt::format("kept state leaks {:.3g} outside the GHZ diagonal (threshold {:.3g})",
                                   projection.leakage, cfg.leakage_threshold),
                       projection.leakage);
  }
  return {accepted_probability, std::move(projection.mixture), projection.leakage,
          std::move(kept_density), std::move(branches)};
}

double accepted_weight(const PureState& two_copy, const RoundConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_parties;
  std::vector<QubitLabel> expected = copy_atoms(n, Copy::kFirst);
  const auto copy2 = copy_atoms(n, Copy::kSecond);
  expected.insert(expected.end(), copy2.begin(), copy2.end());
  if (two_copy.reg().labels() != expected) {
    throw ShapeMismatchError("state must be laid out over copy-1 then copy-2 atoms");
  }
  double total = 0.0;
  LeafFn<PureState> leaf = [&](const PureState& s, std::span<const PhotonOutcome> pattern) {
    if (is_accepted(pattern, cfg.error_mode)) total += s.norm_squared();
  };
  std::vector<PhotonOutcome> pattern;
  enumerate_patterns(two_copy, cfg.gate(), n, 0, pattern, leaf);
  return total;
}

StepResult analytic_round(const ghz::GhzMixture& m, ErrorMode mode) {
  const int n = m.n_parties();
  const std::size_t patterns = std::size_t{1} << (n - 1);
  auto w = [&](std::size_t flips, int minus) { return m.weights()[2 * flips + minus]; };
  std::vector<double> out(m.size(), 0.0);
  double total = 0.0;
  if (mode == ErrorMode::kBitFlip) {
    // Only equal flip patterns survive; the signs multiply.
    for (std::size_t a = 0; a < patterns; ++a) {
      for (int s1 = 0; s1 < 2; ++s1) {
        for (int s2 = 0; s2 < 2; ++s2) out[2 * a + (s1 ^ s2)] += w(a, s1) * w(a, s2);
      }
    }
    for (double v : out) total += v;
    return {ghz::GhzMixture::renormalized(n, std::move(out)), total};
  }
  // Only equal signs survive; the flip patterns add.
  for (std::size_t a1 = 0; a1 < patterns; ++a1) {
    for (std::size_t a2 = 0; a2 < patterns; ++a2) {
      for (int s = 0; s < 2; ++s) out[2 * (a1 ^ a2) + s] += w(a1, s) * w(a2, s);
    }
  }
  for (double v : out) total += v;
  return {ghz::GhzMixture::renormalized(n, std::move(out)), total / static_cast<double>(patterns)};
}

std::optional<ErrorMode> recursion_family(const ghz::GhzMixture& m) {
  const auto w = m.weights();
  bool bit = true;
  bool phase = true;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= ghz::kWeightTolerance) continue;
    if (i % 2 == 1) bit = false;
    if (i > 1) phase = false;
  }
  if (bit) return ErrorMode::kBitFlip;
  if (phase) return ErrorMode::kPhaseFlip;
  return std::nullopt;
}

StepResult recursion_step(const ghz::GhzMixture& m, std::optional<ErrorMode> mode) {
  const auto family = recursion_family(m);
  const bool fits = family && (!mode || *mode == *family ||
                               // a pure Phi+_0 fits both families
                               (*mode == ErrorMode::kPhaseFlip && m.weights()[0] >= 1.0 - ghz::kWeightTolerance));
  if (!fits) {
    throw FamilyError(mode ? fmt::format("mixture is not in the {} family", to_string(*mode))
                           : std::string("mixture is in neither the bit-flip nor the phase-flip family"));
  }
  const ErrorMode used = mode.value_or(*family);
  std::vector<double> sq(m.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    sq[i] = m.weights()[i] * m.weights()[i];
    sum += sq[i];
  }
  for (auto& v : sq) v /= sum;
  const int n = m.n_parties();
  const double success =
      used == ErrorMode::kBitFlip ? sum : sum / static_cast<double>(std::size_t{1} << (n - 1));
  return {ghz::GhzMixture::renormalized(n, std::move(sq)), success};
}

ThresholdVerdict threshold_check(double f0, double f1, double f2) {
  const double f3 = 1.0 - f0 - f1 - f2;
  for (double v : {f0, f1, f2}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgumentError(fmt::format("weight {} outside [0, 1]", v));
  }
  if (f3 < -ghz::kWeightTolerance) throw InvalidArgumentError("F0 + F1 + F2 exceeds 1");
  const double u = f1 + f2;
  const double q = f1 * f1 + f2 * f2;
  const double disc = 1.0 + 4.0 * u - 12.0 * q - 8.0 * f1 * f2;
  if (disc < 0.0) return {false, kNan, true};
  const double bound = 0.25 * (3.0 - 2.0 * f1 - 2.0 * f2 - std::sqrt(disc));
  return {f0 > bound, bound, false};
}

std::vector<RecursionState> iterate(const ghz::GhzMixture& m, const StopRule& stop,
                                    std::optional<ErrorMode> mode,
                                    const std::optional<PhysicalLosses>& losses) {
  if (!stop.rounds && !stop.target_fidelity) throw InvalidArgumentError("need a round count or a target");
  if (stop.rounds && *stop.rounds < 0) throw InvalidArgumentError("round count must be >= 0");
  if (stop.max_rounds < 1) throw InvalidArgumentError("max_rounds must be >= 1");
  if (stop.target_fidelity) {
    const double t = *stop.target_fidelity;
    if (t >= 1.0) throw StagnationError("fidelity 1 is only approached asymptotically");
    if (!(t > m.fidelity())) {
      throw InvalidArgumentError(fmt::format("target {} is not above the current fidelity {}", t, m.fidelity()));
    }
  }
  if (losses) losses->efficiency.validate();

  std::vector<RecursionState> states;
  states.push_back({m, 0, 1.0, 1.0, 1.0});
  auto done = [&](const RecursionState& s) {
    if (stop.rounds && s.rounds_done >= *stop.rounds) return true;
    return stop.target_fidelity && s.weights.fidelity() >= *stop.target_fidelity;
  };
  while (!done(states.back())) {
    const RecursionState& cur = states.back();
    if (cur.rounds_done >= stop.max_rounds) {
      throw StagnationError(fmt::format("target not reached after {} rounds", stop.max_rounds));
    }
    StepResult step = recursion_step(cur.weights, mode);
    const double f_old = cur.weights.fidelity();
    const double f_new = step.mixture.fidelity();
    if (!(f_new > f_old) && f_old < 1.0 - 4 * std::numeric_limits<double>::epsilon()) {
      throw StagnationError(fmt::format("round {} does not raise the fidelity ({:.17g} -> {:.17g})",
                                        cur.rounds_done + 1, f_old, f_new));
    }
    double p = step.success_probability;
    if (losses) {
      p = resources::success_probability(p, m.n_parties(), losses->efficiency, losses->model);
    }
    RecursionState next{std::move(step.mixture), cur.rounds_done + 1, p,
                        cur.pairs_consumed_expected * 2.0 / p, cur.cumulative_success_probability * p};
    states.push_back(std::move(next));
  }
  return states;
}

std::array<double, 4> report_components(const ghz::GhzMixture& m) {
  const auto w = m.weights();
  if (recursion_family(m) == ErrorMode::kPhaseFlip) return {w[0], w[1], 0.0, 0.0};
  std::array<double, 4> out{};
  const std::size_t patterns = w.size() / 2;
  for (std::size_t a = 0; a < patterns; ++a) {
    const double total = w[2 * a] + w[2 * a + 1];
    // Beyond three parties everything except Phi_0 is lumped into F1.
    out[patterns <= 4 ? a : std::min<std::size_t>(a, 1)] += total;
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) {
  return splitmix64(splitmix64(base) + trial);
}

namespace {

struct TrialResult {
  bool accepted = false;
  double fidelity = 0.0;
};

ghz::GhzIndex sample_component(std::span<const double> weights, qsim::Rng& rng) {
  const double u = qsim::uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    acc += weights[i];
    if (u < acc) return ghz::GhzMixture::index_at(i);
  }
  return ghz::GhzMixture::index_at(last);
}

TrialResult run_trial(const ghz::GhzMixture& input, const RoundConfig& cfg,
                      const faraday::SingleCavityGate& gate, std::uint64_t trial) {
  const int n = cfg.n_parties;
  qsim::Rng rng(trial_seed(cfg.seed, trial));
  const auto a = sample_component(input.weights(), rng);
  const auto b = sample_component(input.weights(), rng);
  PureState s = qsim::tensor(ghz::ghz_state(a, n, Copy::kFirst), ghz::ghz_state(b, n, Copy::kSecond));
  const auto copy1 = copy_atoms(n, Copy::kFirst);
  const auto copy2 = copy_atoms(n, Copy::kSecond);
  if (cfg.error_mode == ErrorMode::kPhaseFlip) {
    auto all = copy1;
    all.insert(all.end(), copy2.begin(), copy2.end());
    s = ghz::hadamard_all(s, all);
  }
  const bool lossless = gate.is_unitary();
  std::vector<PhotonOutcome> pattern;
  for (int party = 0; party < n; ++party) {
    const PureState scattered = scatter_photon(s, gate, party);
    // An absorbed photon never reaches a detector.
    if (!lossless && qsim::uniform01(rng) >= scattered.norm_squared() / s.norm_squared()) return {};
    const QubitLabel photon[] = {QubitLabel::photon(party)};
    auto measured = qsim::measure(photon, Basis::kDiagonal, rng, scattered);
    pattern.push_back(measured.record.outcome ? PhotonOutcome::kFlip : PhotonOutcome::kKeep);
    s = std::move(measured.state);
    if (!is_accepted(pattern, cfg.error_mode)) return {};
  }
  const PureState ready = prepare_readout(s, cfg.error_mode, pattern, n);
  auto readout = qsim::measure(copy2, Basis::kComputational, rng, ready);
  const auto corrections = corrections_for(cfg.error_mode, pattern, readout.record.outcome, n);
  const PureState kept = finish_copy1(readout.state, cfg.error_mode, corrections, n);
  return {true, qsim::fidelity(kept, ghz::ghz_state({}, n, Copy::kFirst))};
}

}  // namespace

MonteCarloEstimate monte_carlo_round(const ghz::GhzMixture& input, const RoundConfig& cfg,
                                     std::uint64_t trials, unsigned threads) {
  cfg.validate();
  if (trials < 1) throw InvalidArgumentError("need at least one trial");
  if (input.n_parties() != cfg.n_parties) throw ShapeMismatchError("mixture and config disagree on n");
  const auto gate = cfg.gate();
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));

  std::vector<TrialResult> results(trials);
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t t = begin; t < end; ++t) results[t] = run_trial(input, cfg, gate, t);
  };
  if (threads == 1) {
    work(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (trials + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      const std::uint64_t begin = i * chunk;
      const std::uint64_t end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  // Reduced in trial order so the sums do not depend on the thread count.
  MonteCarloEstimate est;
  est.trials = trials;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& r : results) {
    if (!r.accepted) continue;
    ++est.accepted;
    sum += r.fidelity;
    sum_sq += r.fidelity * r.fidelity;
  }
  const double nt = static_cast<double>(trials);
  est.acceptance_rate = static_cast<double>(est.accepted) / nt;
  est.acceptance_stderr = std::sqrt(est.acceptance_rate * (1.0 - est.acceptance_rate) / nt);
  if (est.accepted == 0) {
    est.kept_fidelity = kNan;
    est.kept_fidelity_stderr = kNan;
  } else {
    const double na = static_cast<double>(est.accepted);
    est.kept_fidelity = sum / na;
    const double var = est.accepted > 1
                           ? std::max(0.0, (sum_sq - na * est.kept_fidelity * est.kept_fidelity) / (na - 1.0))
                           : 0.0;
    est.kept_fidelity_stderr = std::sqrt(var / na);
  }
  return est;
}

void write_round_report(std::ostream& out, std::span<const RecursionState> states) {
  out << "round,F0,F1,F2,F3,p_success,pairs_expected,cumulative_p\n";
  for (const auto& s : states) {
    const auto f = report_components(s.weights);
    out << fmt::format("{},{},{},{},{},{},{},{}\n", s.rounds_done, csv_double(f[0]), csv_double(f[1]),
                       csv_double(f[2]), csv_double(f[3]), csv_double(s.p_success),
                       csv_double(s.pairs_consumed_expected), csv_double(s.cumulative_success_probability));
  }
}

void write_branch_dump(std::ostream& out, const ExactRoundResult& r, int n) {
  out << "pattern,readout,probability,kept_fidelity\n";
  for (const auto& b : r.branches) {
    std::string readout;
    if (b.atom_readout) {
      for (int k = 0; k < n; ++k) readout += ((*b.atom_readout >> (n - 1 - k)) & 1U) ? '1' : '0';
    }
    out << fmt::format("{},{},{},{}\n", pattern_string(b.detector_pattern), readout,
                       csv_double(b.branch_probability), csv_double(b.kept_fidelity));
  }
}

}  // namespace ghzpur::protocol
