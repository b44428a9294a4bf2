#pragma once

// Dense, exact state engine for small registers of two-level atoms plus at
// most one photonic polarization qubit.
//
// Basis ordering is big-endian in register order: the first label of a
// register is the most significant bit of a basis index. Atoms use
// |g_L> -> 0, |g_R> -> 1; photons use |L> -> 0, |R> -> 1.
//
// States are values. Every operation returns a new state and leaves its
// arguments untouched, so states may be shared freely across threads.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ghzpur::qsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;
// Forced measurement branches below this Born weight are rejected.
inline constexpr double kImpossibleBranchWeight = 1e-14;
inline constexpr int kMaxQubits = 16;

enum class QubitKind : std::uint8_t { kAtom, kPhoton };
enum class Copy : std::uint8_t { kFirst, kSecond };

struct QubitLabel {
  QubitKind kind = QubitKind::kAtom;
  int party = 0;  // 0-based
  Copy copy = Copy::kFirst;  // always kFirst for photons

  static QubitLabel atom(int party, Copy copy = Copy::kFirst) {
    return {QubitKind::kAtom, party, copy};
  }
  static QubitLabel photon(int party) { return {QubitKind::kPhoton, party, Copy::kFirst}; }

  // "a1", "b2", ... for atoms; "p1", "p2", ... for photons (1-based party).
  std::string name() const;

  friend bool operator==(const QubitLabel&, const QubitLabel&) = default;
};

// Ordered, duplicate-free list of qubit labels holding at most one photon.
class Register {
 public:
  Register() = default;
  Register(std::initializer_list<QubitLabel> labels);
  explicit Register(std::vector<QubitLabel> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  std::size_t dim() const { return std::size_t{1} << labels_.size(); }
  const std::vector<QubitLabel>& labels() const { return labels_; }
  const QubitLabel& operator[](int position) const { return labels_[position]; }

  bool contains(const QubitLabel& label) const;
  // Throws UnknownLabelError when absent.
  int position_of(const QubitLabel& label) const;
  bool has_photon() const;

  // Concatenation; throws LabelCollisionError on duplicates.
  Register concat(const Register& other) const;
  Register without(std::span<const QubitLabel> removed) const;

  friend bool operator==(const Register&, const Register&) = default;

 private:
  std::vector<QubitLabel> labels_;
};

class PureState {
 public:
  PureState(Register reg, std::vector<Complex> amplitudes);

  static PureState basis(Register reg, std::uint64_t index);

  const Register& reg() const { return reg_; }
  int num_qubits() const { return reg_.size(); }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t index) const { return amplitudes_[index]; }

  double norm_squared() const;
  PureState normalized() const;
  PureState scaled(Complex factor) const;

 private:
  Register reg_;
  std::vector<Complex> amplitudes_;
};

// Row-major dense matrix. Branch states produced by `collapse` are left
// sub-normalized (trace = branch probability); everything else keeps trace 1.
class DensityMatrix {
 public:
  DensityMatrix(Register reg, std::vector<Complex> entries);

  static DensityMatrix from_pure(const PureState& state);
  static DensityMatrix maximally_mixed(Register reg);

  const Register& reg() const { return reg_; }
  int num_qubits() const { return reg_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const Complex> entries() const { return entries_; }
  Complex operator()(std::size_t row, std::size_t col) const { return entries_[row * dim_ + col]; }

  double trace() const;
  DensityMatrix normalized() const;
  DensityMatrix scaled(double factor) const;

  bool is_hermitian(double tolerance = kNormTolerance) const;
  double min_eigenvalue() const;
  Matrix to_matrix() const;

  friend DensityMatrix operator+(const DensityMatrix& a, const DensityMatrix& b);

 private:
  Register reg_;
  std::size_t dim_;
  std::vector<Complex> entries_;
};

namespace gates {
Matrix identity(int qubits);
Matrix hadamard();
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
}  // namespace gates

bool is_unitary(const Matrix& u, double tolerance = kUnitaryTolerance);

PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Applies `u` to `targets` (first target = most significant local bit) and the
// identity elsewhere. Rejects non-unitary `u` with NonUnitaryError.
PureState apply_local(const Matrix& u, std::span<const QubitLabel> targets, const PureState& s);
DensityMatrix apply_local(const Matrix& u, std::span<const QubitLabel> targets,
                          const DensityMatrix& s);

// As apply_local but without the unitarity check (absorptive operators).
PureState apply_operator(const Matrix& op, std::span<const QubitLabel> targets,
                         const PureState& s);
DensityMatrix apply_operator(const Matrix& op, std::span<const QubitLabel> targets,
                             const DensityMatrix& s);

enum class Basis : std::uint8_t {
  kComputational,
  // {(|0>+|1>)/sqrt2 -> outcome 0, (|0>-|1>)/sqrt2 -> outcome 1}
  kDiagonal,
};

struct MeasurementRecord {
  std::vector<QubitLabel> labels;
  std::uint64_t outcome = 0;  // big-endian over `labels`
  double probability = 0.0;

  std::string bits() const;
};

template <typename State>
struct Measured {
  MeasurementRecord record;
  State state;
};

// Projects `targets` onto `outcome` and removes them from the register. The
// result is not renormalized: its norm / trace is the Born weight relative to
// the input.
PureState collapse(std::span<const QubitLabel> targets, Basis basis, std::uint64_t outcome,
                   const PureState& s);
DensityMatrix collapse(std::span<const QubitLabel> targets, Basis basis, std::uint64_t outcome,
                       const DensityMatrix& s);

// Deterministic mode: caller picks the branch. Throws ImpossibleBranchError on
// a (numerically) zero-probability branch.
Measured<PureState> measure(std::span<const QubitLabel> targets, Basis basis,
                            std::uint64_t outcome, const PureState& s);
Measured<DensityMatrix> measure(std::span<const QubitLabel> targets, Basis basis,
                                std::uint64_t outcome, const DensityMatrix& s);

// Stochastic mode: branch sampled from `rng`.
Measured<PureState> measure(std::span<const QubitLabel> targets, Basis basis, Rng& rng,
                            const PureState& s);
Measured<DensityMatrix> measure(std::span<const QubitLabel> targets, Basis basis, Rng& rng,
                                const DensityMatrix& s);

// Reduced state on `keep`, in the order given.
DensityMatrix partial_trace(std::span<const QubitLabel> keep, const DensityMatrix& d);

// <target| d |target>. Registers must match exactly.
double fidelity(const DensityMatrix& d, const PureState& target);
double fidelity(const PureState& s, const PureState& target);

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

// `index<TAB>re<TAB>im`, one line per basis index. Density matrices use the
// row-major flattened index row * dim + col.
void write_dump(std::ostream& out, const PureState& s);
void write_dump(std::ostream& out, const DensityMatrix& d);

}  // namespace ghzpur::qsim
