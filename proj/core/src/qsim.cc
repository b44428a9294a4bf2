#include "ghzpur/qsim.h"

#include "ghzpur/errors.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace ghzpur::qsim {

namespace {

void check_size(int qubits) {
  if (qubits > kMaxQubits) {
    throw RegisterOverflowError(
        fmt::format("register of {} qubits exceeds the {}-qubit limit", qubits, kMaxQubits));
  }
}

int bit_shift(int num_qubits, int position) { return num_qubits - 1 - position; }

std::vector<int> positions_of(const Register& reg, std::span<const QubitLabel> targets) {
  std::vector<int> positions;
  positions.reserve(targets.size());
  for (const auto& t : targets) {
    int p = reg.position_of(t);
    if (std::find(positions.begin(), positions.end(), p) != positions.end()) {
      throw InvalidArgumentError("target " + t.name() + " listed twice");
    }
    positions.push_back(p);
  }
  return positions;
}

// Offsets of every local basis state of the target qubits inside a
// `num_qubits`-bit index, local index big-endian over `positions`.
std::vector<std::size_t> local_offsets(int num_qubits, std::span<const int> positions) {
  const std::size_t k = positions.size();
  std::vector<std::size_t> offsets(std::size_t{1} << k, 0);
  for (std::size_t l = 0; l < offsets.size(); ++l) {
    for (std::size_t j = 0; j < k; ++j) {
      if ((l >> (k - 1 - j)) & 1U) {
        offsets[l] |= std::size_t{1} << bit_shift(num_qubits, positions[j]);
      }
    }
  }
  return offsets;
}

bool is_diagonal(const Matrix& op) {
  for (Eigen::Index r = 0; r < op.rows(); ++r) {
    for (Eigen::Index c = 0; c < op.cols(); ++c) {
      if (r != c && op(r, c) != Complex{}) return false;
    }
  }
  return true;
}

// In-place application of `op` to the qubits at `positions` of a flat
// big-endian vector over `num_qubits` qubits.
void apply_kernel(std::span<Complex> data, int num_qubits, std::span<const int> positions,
                  const Matrix& op) {
  const auto offsets = local_offsets(num_qubits, positions);
  std::size_t mask = 0;
  for (auto o : offsets) mask |= o;
  const std::size_t local_dim = offsets.size();

  if (is_diagonal(op)) {
    for (std::size_t base = 0; base < data.size(); ++base) {
      if (base & mask) continue;
      for (std::size_t l = 0; l < local_dim; ++l) {
        data[base | offsets[l]] *= op(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
      }
    }
    return;
  }

  std::vector<Complex> in(local_dim);
  for (std::size_t base = 0; base < data.size(); ++base) {
    if (base & mask) continue;
    for (std::size_t l = 0; l < local_dim; ++l) in[l] = data[base | offsets[l]];
    for (std::size_t r = 0; r < local_dim; ++r) {
      Complex acc{};
      for (std::size_t c = 0; c < local_dim; ++c) {
        acc += op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      }
      data[base | offsets[r]] = acc;
    }
  }
}

void check_operator_shape(const Matrix& op, std::size_t targets) {
  const auto expected = static_cast<Eigen::Index>(std::size_t{1} << targets);
  if (targets == 0 || op.rows() != expected || op.cols() != expected) {
    throw InvalidArgumentError(fmt::format("operator of shape {}x{} does not act on {} qubit(s)",
                                           op.rows(), op.cols(), targets));
  }
}

// Maps each index of the reduced register to the full index with the removed
// qubits fixed to `outcome`.
std::vector<std::size_t> surviving_indices(int num_qubits, std::span<const int> removed,
                                           std::uint64_t outcome) {
  std::size_t fixed = 0;
  std::size_t removed_mask = 0;
  const std::size_t k = removed.size();
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t bit = std::size_t{1} << bit_shift(num_qubits, removed[j]);
    removed_mask |= bit;
    if ((outcome >> (k - 1 - j)) & 1U) fixed |= bit;
  }
  std::vector<std::size_t> kept_bits;
  for (int q = 0; q < num_qubits; ++q) {
    const std::size_t bit = std::size_t{1} << bit_shift(num_qubits, q);
    if (!(removed_mask & bit)) kept_bits.push_back(bit);
  }
  std::vector<std::size_t> map(std::size_t{1} << kept_bits.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    std::size_t full = fixed;
    for (std::size_t j = 0; j < kept_bits.size(); ++j) {
      if ((i >> (kept_bits.size() - 1 - j)) & 1U) full |= kept_bits[j];
    }
    map[i] = full;
  }
  return map;
}

// Non-zero components of the product projector vector <outcome| over the
// targets, as (offset inside the full index, coefficient) pairs.
std::vector<std::pair<std::size_t, double>> outcome_components(int num_qubits,
                                                               std::span<const int> positions,
                                                               Basis basis, std::uint64_t outcome) {
  const std::size_t k = positions.size();
  std::vector<std::pair<std::size_t, double>> out;
  if (basis == Basis::kComputational) {
    std::size_t offset = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if ((outcome >> (k - 1 - j)) & 1U) offset |= std::size_t{1} << bit_shift(num_qubits, positions[j]);
    }
    out.emplace_back(offset, 1.0);
    return out;
  }
  const double amplitude = std::pow(1.0 / std::numbers::sqrt2, static_cast<double>(k));
  const auto offsets = local_offsets(num_qubits, positions);
  for (std::size_t l = 0; l < offsets.size(); ++l) {
    // <-| has a minus sign on |1>.
    int sign_bits = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t bit = k - 1 - j;
      if (((outcome >> bit) & 1U) && ((l >> bit) & 1U)) ++sign_bits;
    }
    out.emplace_back(offsets[l], sign_bits % 2 ? -amplitude : amplitude);
  }
  return out;
}

double weight_of(const PureState& s) { return s.norm_squared(); }
double weight_of(const DensityMatrix& d) { return d.trace(); }

template <typename State>
Measured<State> measure_forced(std::span<const QubitLabel> targets, Basis basis,
                               std::uint64_t outcome, const State& s) {
  State branch = collapse(targets, basis, outcome, s);
  const double p = weight_of(branch) / weight_of(s);
  if (!(p > kImpossibleBranchWeight)) {
    throw ImpossibleBranchError(fmt::format("measurement branch {} has probability {}", outcome, p));
  }
  MeasurementRecord record{{targets.begin(), targets.end()}, outcome, p};
  return {std::move(record), branch.normalized()};
}

template <typename State>
Measured<State> measure_sampled(std::span<const QubitLabel> targets, Basis basis, Rng& rng,
                                const State& s) {
  const std::uint64_t outcomes = std::uint64_t{1} << targets.size();
  const double total = weight_of(s);
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::uint64_t last_possible = 0;
  for (std::uint64_t o = 0; o < outcomes; ++o) {
    State branch = collapse(targets, basis, o, s);
    const double w = weight_of(branch);
    if (w > kImpossibleBranchWeight * total) last_possible = o;
    acc += w;
    if (u < acc && w > kImpossibleBranchWeight * total) {
      return {MeasurementRecord{{targets.begin(), targets.end()}, o, w / total},
              branch.normalized()};
    }
  }
  // Rounding left u just above the accumulated total.
  return measure_forced(targets, basis, last_possible, s);
}

}  // namespace

std::string QubitLabel::name() const {
  if (kind == QubitKind::kPhoton) return fmt::format("p{}", party + 1);
  const int copy_index = copy == Copy::kFirst ? 1 : 2;
  if (party < 26) return fmt::format("{}{}", static_cast<char>('a' + party), copy_index);
  return fmt::format("q{}_{}", party + 1, copy_index);
}

Register::Register(std::initializer_list<QubitLabel> labels)
    : Register(std::vector<QubitLabel>(labels)) {}

Register::Register(std::vector<QubitLabel> labels) : labels_(std::move(labels)) {
  check_size(size());
  int photons = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].party < 0) throw InvalidArgumentError("negative party index");
    if (labels_[i].kind == QubitKind::kPhoton) ++photons;
    for (std::size_t j = 0; j < i; ++j) {
      if (labels_[i] == labels_[j]) {
        throw LabelCollisionError("duplicate qubit label " + labels_[i].name());
      }
    }
  }
  if (photons > 1) throw InvalidArgumentError("a register holds at most one photon");
}

bool Register::contains(const QubitLabel& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

int Register::position_of(const QubitLabel& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw UnknownLabelError("qubit " + label.name() + " not in register");
  return static_cast<int>(it - labels_.begin());
}

bool Register::has_photon() const {
  return std::any_of(labels_.begin(), labels_.end(),
                     [](const QubitLabel& l) { return l.kind == QubitKind::kPhoton; });
}

Register Register::concat(const Register& other) const {
  std::vector<QubitLabel> all = labels_;
  all.insert(all.end(), other.labels_.begin(), other.labels_.end());
  return Register(std::move(all));
}

Register Register::without(std::span<const QubitLabel> removed) const {
  std::vector<QubitLabel> rest;
  for (const auto& l : labels_) {
    if (std::find(removed.begin(), removed.end(), l) == removed.end()) rest.push_back(l);
  }
  return Register(std::move(rest));
}

PureState::PureState(Register reg, std::vector<Complex> amplitudes)
    : reg_(std::move(reg)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != reg_.dim()) {
    throw ShapeMismatchError(fmt::format("{} amplitudes for a {}-qubit register",
                                         amplitudes_.size(), reg_.size()));
  }
}

PureState PureState::basis(Register reg, std::uint64_t index) {
  std::vector<Complex> amps(reg.dim());
  if (index >= amps.size()) throw InvalidArgumentError("basis index out of range");
  amps[index] = 1.0;
  return {std::move(reg), std::move(amps)};
}

double PureState::norm_squared() const {
  double n = 0.0;
  for (const auto& a : amplitudes_) n += std::norm(a);
  return n;
}

PureState PureState::normalized() const {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw ImpossibleBranchError("cannot normalize a zero state");
  return scaled(1.0 / n);
}

PureState PureState::scaled(Complex factor) const {
  std::vector<Complex> amps = amplitudes_;
  for (auto& a : amps) a *= factor;
  return {reg_, std::move(amps)};
}

DensityMatrix::DensityMatrix(Register reg, std::vector<Complex> entries)
    : reg_(std::move(reg)), dim_(reg_.dim()), entries_(std::move(entries)) {
  if (entries_.size() != dim_ * dim_) {
    throw ShapeMismatchError(
        fmt::format("{} entries for a {}-qubit density matrix", entries_.size(), reg_.size()));
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& state) {
  const std::size_t d = state.dim();
  std::vector<Complex> entries(d * d);
  const auto amps = state.amplitudes();
  for (std::size_t r = 0; r < d; ++r) {
    if (amps[r] == Complex{}) continue;
    for (std::size_t c = 0; c < d; ++c) entries[r * d + c] = amps[r] * std::conj(amps[c]);
  }
  return {state.reg(), std::move(entries)};
}

DensityMatrix DensityMatrix::maximally_mixed(Register reg) {
  const std::size_t d = reg.dim();
  std::vector<Complex> entries(d * d);
  for (std::size_t i = 0; i < d; ++i) entries[i * d + i] = 1.0 / static_cast<double>(d);
  return {std::move(reg), std::move(entries)};
}

double DensityMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += entries_[i * dim_ + i].real();
  return t;
}

DensityMatrix DensityMatrix::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw ImpossibleBranchError("cannot normalize a zero-trace density matrix");
  return scaled(1.0 / t);
}

DensityMatrix DensityMatrix::scaled(double factor) const {
  std::vector<Complex> entries = entries_;
  for (auto& e : entries) e *= factor;
  return {reg_, std::move(entries)};
}

bool DensityMatrix::is_hermitian(double tolerance) const {
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = r; c < dim_; ++c) {
      if (std::abs(entries_[r * dim_ + c] - std::conj(entries_[c * dim_ + r])) > tolerance) {
        return false;
      }
    }
  }
  return true;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(to_matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Matrix DensityMatrix::to_matrix() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  Matrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = entries_[r * dim_ + c];
  }
  return m;
}

DensityMatrix operator+(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.reg_ == b.reg_)) throw ShapeMismatchError("cannot add density matrices on different registers");
  std::vector<Complex> entries = a.entries_;
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i] += b.entries_[i];
  return {a.reg_, std::move(entries)};
}

namespace gates {

Matrix identity(int qubits) {
  const auto d = static_cast<Eigen::Index>(1) << qubits;
  return Matrix::Identity(d, d);
}

Matrix hadamard() {
  const double s = 1.0 / std::numbers::sqrt2;
  Matrix h(2, 2);
  h << s, s, s, -s;
  return h;
}

Matrix pauli_x() {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

Matrix pauli_y() {
  Matrix y(2, 2);
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  return y;
}

Matrix pauli_z() {
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

}  // namespace gates

bool is_unitary(const Matrix& u, double tolerance) {
  if (u.rows() != u.cols()) return false;
  const Matrix product = u.adjoint() * u;
  return (product - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

PureState tensor(const PureState& a, const PureState& b) {
  Register reg = a.reg().concat(b.reg());
  std::vector<Complex> amps(reg.dim());
  const std::size_t db = b.dim();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < db; ++j) amps[i * db + j] = a.amplitude(i) * b.amplitude(j);
  }
  return {std::move(reg), std::move(amps)};
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  Register reg = a.reg().concat(b.reg());
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  const std::size_t d = da * db;
  std::vector<Complex> entries(d * d);
  for (std::size_t ra = 0; ra < da; ++ra) {
    for (std::size_t ca = 0; ca < da; ++ca) {
      const Complex x = a(ra, ca);
      if (x == Complex{}) continue;
      for (std::size_t rb = 0; rb < db; ++rb) {
        Complex* row = &entries[(ra * db + rb) * d + ca * db];
        for (std::size_t cb = 0; cb < db; ++cb) row[cb] = x * b(rb, cb);
      }
    }
  }
  return {std::move(reg), std::move(entries)};
}

PureState apply_operator(const Matrix& op, std::span<const QubitLabel> targets,
                         const PureState& s) {
  check_operator_shape(op, targets.size());
  const auto positions = positions_of(s.reg(), targets);
  std::vector<Complex> amps(s.amplitudes().begin(), s.amplitudes().end());
  apply_kernel(amps, s.num_qubits(), positions, op);
  return {s.reg(), std::move(amps)};
}

DensityMatrix apply_operator(const Matrix& op, std::span<const QubitLabel> targets,
                             const DensityMatrix& s) {
  check_operator_shape(op, targets.size());
  const int n = s.num_qubits();
  const auto positions = positions_of(s.reg(), targets);
  // rho -> op rho op^dagger: rows see `op`, columns see conj(op), treating
  // the row-major matrix as a 2n-qubit vector with row bits first.
  std::vector<Complex> entries(s.entries().begin(), s.entries().end());
  if (is_diagonal(op)) {
    // One pass: entry (r, c) picks up d(r) conj(d(c)).
    std::vector<Complex> factor(s.dim(), Complex{1.0});
    apply_kernel(factor, n, positions, op);
    const std::size_t d = s.dim();
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) entries[r * d + c] *= factor[r] * std::conj(factor[c]);
    }
    return {s.reg(), std::move(entries)};
  }
  std::vector<int> column_positions;
  for (int p : positions) column_positions.push_back(p + n);
  apply_kernel(entries, 2 * n, positions, op);
  apply_kernel(entries, 2 * n, column_positions, op.conjugate());
  return {s.reg(), std::move(entries)};
}

PureState apply_local(const Matrix& u, std::span<const QubitLabel> targets, const PureState& s) {
  if (!is_unitary(u)) throw NonUnitaryError("operator is not unitary within tolerance");
  return apply_operator(u, targets, s);
}

DensityMatrix apply_local(const Matrix& u, std::span<const QubitLabel> targets,
                          const DensityMatrix& s) {
  if (!is_unitary(u)) throw NonUnitaryError("operator is not unitary within tolerance");
  return apply_operator(u, targets, s);
}

std::string MeasurementRecord::bits() const {
  std::string out;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    out.push_back(((outcome >> (labels.size() - 1 - j)) & 1U) ? '1' : '0');
  }
  return out;
}

PureState collapse(std::span<const QubitLabel> targets, Basis basis, std::uint64_t outcome,
                   const PureState& s) {
  if (targets.empty()) throw InvalidArgumentError("no measurement targets");
  if (outcome >> targets.size()) throw InvalidArgumentError("outcome has too many bits");
  const auto positions = positions_of(s.reg(), targets);
  const auto map = surviving_indices(s.num_qubits(), positions, 0);
  const auto components = outcome_components(s.num_qubits(), positions, basis, outcome);
  std::vector<Complex> amps(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    Complex acc{};
    for (const auto& [offset, coeff] : components) acc += coeff * s.amplitude(map[i] | offset);
    amps[i] = acc;
  }
  return {s.reg().without(targets), std::move(amps)};
}

DensityMatrix collapse(std::span<const QubitLabel> targets, Basis basis, std::uint64_t outcome,
                       const DensityMatrix& s) {
  if (targets.empty()) throw InvalidArgumentError("no measurement targets");
  if (outcome >> targets.size()) throw InvalidArgumentError("outcome has too many bits");
  const auto positions = positions_of(s.reg(), targets);
  const auto map = surviving_indices(s.num_qubits(), positions, 0);
  const auto components = outcome_components(s.num_qubits(), positions, basis, outcome);
  const std::size_t d = map.size();
  std::vector<Complex> entries(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      Complex acc{};
      for (const auto& [ro, rc] : components) {
        for (const auto& [co, cc] : components) acc += rc * cc * s(map[r] | ro, map[c] | co);
      }
      entries[r * d + c] = acc;
    }
  }
  return {s.reg().without(targets), std::move(entries)};
}

Measured<PureState> measure(std::span<const QubitLabel> targets, Basis basis,
                            std::uint64_t outcome, const PureState& s) {
  return measure_forced(targets, basis, outcome, s);
}

Measured<DensityMatrix> measure(std::span<const QubitLabel> targets, Basis basis,
                                std::uint64_t outcome, const DensityMatrix& s) {
  return measure_forced(targets, basis, outcome, s);
}

Measured<PureState> measure(std::span<const QubitLabel> targets, Basis basis, Rng& rng,
                            const PureState& s) {
  return measure_sampled(targets, basis, rng, s);
}

Measured<DensityMatrix> measure(std::span<const QubitLabel> targets, Basis basis, Rng& rng,
                                const DensityMatrix& s) {
  return measure_sampled(targets, basis, rng, s);
}

DensityMatrix partial_trace(std::span<const QubitLabel> keep, const DensityMatrix& d) {
  if (keep.empty()) throw InvalidArgumentError("partial trace must keep at least one qubit");
  const int n = d.num_qubits();
  const auto keep_positions = positions_of(d.reg(), keep);
  std::vector<int> traced_positions;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep_positions.begin(), keep_positions.end(), q) == keep_positions.end()) {
      traced_positions.push_back(q);
    }
  }
  const auto keep_offsets = local_offsets(n, keep_positions);
  const auto traced_offsets = local_offsets(n, traced_positions);
  const std::size_t dk = keep_offsets.size();
  std::vector<Complex> entries(dk * dk);
  for (std::size_t r = 0; r < dk; ++r) {
    for (std::size_t c = 0; c < dk; ++c) {
      Complex acc{};
      for (auto t : traced_offsets) acc += d(keep_offsets[r] | t, keep_offsets[c] | t);
      entries[r * dk + c] = acc;
    }
  }
  return {Register(std::vector<QubitLabel>(keep.begin(), keep.end())), std::move(entries)};
}

double fidelity(const DensityMatrix& d, const PureState& target) {
  if (!(d.reg() == target.reg())) {
    throw ShapeMismatchError("fidelity needs matching registers");
  }
  const std::size_t dim = d.dim();
  Complex acc{};
  for (std::size_t r = 0; r < dim; ++r) {
    const Complex tr = std::conj(target.amplitude(r));
    if (tr == Complex{}) continue;
    Complex row{};
    for (std::size_t c = 0; c < dim; ++c) row += d(r, c) * target.amplitude(c);
    acc += tr * row;
  }
  return acc.real();
}

double fidelity(const PureState& s, const PureState& target) {
  if (!(s.reg() == target.reg())) {
    throw ShapeMismatchError("fidelity needs matching registers");
  }
  Complex overlap{};
  for (std::size_t i = 0; i < s.dim(); ++i) overlap += std::conj(target.amplitude(i)) * s.amplitude(i);
  return std::norm(overlap);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void write_dump(std::ostream& out, const PureState& s) {
  for (std::size_t i = 0; i < s.dim(); ++i) {
    out << fmt::format("{}\t{:.17g}\t{:.17g}\n", i, s.amplitude(i).real(), s.amplitude(i).imag());
  }
}

void write_dump(std::ostream& out, const DensityMatrix& d) {
  const auto entries = d.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << fmt::format("{}\t{:.17g}\t{:.17g}\n", i, entries[i].real(), entries[i].imag());
  }
}

}  // namespace ghzpur::qsim
