#pragma once

// Reference implementations for the tests. Everything here works on plain
// dense Eigen vectors and matrices built element by element, without going
// through the library's kernels.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Bit of qubit `position` (0 = most significant) in a `n`-qubit index.
inline int bit_at(std::size_t index, int n, int position) {
  return static_cast<int>((index >> (n - 1 - position)) & 1U);
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// Full 2^n x 2^n matrix of `op` acting on `positions` (first = most
// significant local bit).
inline Mat embed(const Mat& op, const std::vector<int>& positions, int n) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t k = positions.size();
  Mat full = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      bool others_equal = true;
      for (int q = 0; q < n; ++q) {
        bool target = false;
        for (int p : positions) target = target || p == q;
        if (!target && bit_at(i, n, q) != bit_at(j, n, q)) others_equal = false;
      }
      if (!others_equal) continue;
      std::size_t li = 0;
      std::size_t lj = 0;
      for (std::size_t t = 0; t < k; ++t) {
        li = (li << 1) | static_cast<std::size_t>(bit_at(i, n, positions[t]));
        lj = (lj << 1) | static_cast<std::size_t>(bit_at(j, n, positions[t]));
      }
      full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          op(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(lj));
    }
  }
  return full;
}

inline Mat hadamard() {
  Mat h(2, 2);
  h << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2;
  return h;
}

inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// (|x> + sign |~x>)/sqrt2 with x = 0 followed by the n-1 flip bits.
inline Vec ghz_vector(int n, std::uint32_t flips, bool minus) {
  const std::size_t dim = std::size_t{1} << n;
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
  const std::size_t x = flips;
  const std::size_t x_bar = x ^ (dim - 1);
  v(static_cast<Eigen::Index>(x)) = kInvSqrt2;
  v(static_cast<Eigen::Index>(x_bar)) = minus ? -kInvSqrt2 : kInvSqrt2;
  return v;
}

// F^2 / (F^2 + (1 - F)^2)
inline double binary_map(double f) { return f * f / (f * f + (1 - f) * (1 - f)); }

inline Mat random_unitary(int qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const Eigen::Index d = Eigen::Index{1} << qubits;
  Mat a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ();
}

inline Vec random_vector(int qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(Eigen::Index{1} << qubits);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

inline Mat random_density(int qubits, std::mt19937_64& rng) {
  const Eigen::Index d = Eigen::Index{1} << qubits;
  Mat rho = Mat::Zero(d, d);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Vec v = random_vector(qubits, rng);
    const double w = u(rng) + 0.1;
    rho += w * v * v.adjoint();
    total += w;
  }
  return rho / total;
}

inline std::vector<double> random_weights(std::size_t count, std::mt19937_64& rng) {
  std::exponential_distribution<double> e;
  std::vector<double> w(count);
  double total = 0.0;
  for (auto& x : w) total += (x = e(rng));
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace oracle
