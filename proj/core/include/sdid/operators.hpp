#pragma once

// Dense complex operator algebra shared by every engine.
//
// Conventions used throughout the library:
//   * qubit basis |0>, |1>, with Z = diag(1, -1) and sigma^- = |0><1|;
//   * tensor factor 0 is the leftmost factor (the control qubit);
//   * density matrices are vectorized by column stacking, so
//     vec(A rho B) = (B^T (x) A) vec(rho).

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace sdid {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Linear map on column-stacked d x d matrices, stored as a d^2 x d^2 matrix.
using Superoperator = Eigen::MatrixXcd;

inline constexpr std::size_t kMaxQubits = 6;
inline constexpr Complex kI{0.0, 1.0};

namespace ops {

ComplexMatrix identity(Eigen::Index dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix sigma_minus();
ComplexMatrix sigma_plus();
/// Single-qubit |row><col|.
ComplexMatrix ket_bra(int row, int col);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// I (x) ... (x) op (x) ... (x) I with `op` on tensor factor `site`.
/// Throws std::out_of_range if site >= n_qubits, std::invalid_argument if
/// op is not 2x2 or n_qubits exceeds kMaxQubits.
ComplexMatrix embed(const ComplexMatrix& op, std::size_t site, std::size_t n_qubits);

/// Column stacking. Throws std::invalid_argument on non-square input.
ComplexVector vectorize(const ComplexMatrix& rho);
/// Inverse of vectorize; the length must be a perfect square.
ComplexMatrix unvectorize(const ComplexVector& v);

/// Superoperator of rho -> a * rho * b.
Superoperator sandwich(const ComplexMatrix& a, const ComplexMatrix& b);
/// Superoperator of rho -> -i [h, rho].
Superoperator hamiltonian_superop(const ComplexMatrix& h);
/// Superoperator of rho -> u rho u^dagger.
Superoperator unitary_superop(const ComplexMatrix& u);

/// Matrix exponential by scaling and squaring with diagonal Pade
/// approximants up to degree 13. Throws std::domain_error on non-finite
/// entries and std::invalid_argument on non-square input.
ComplexMatrix expm(const ComplexMatrix& m);

/// max |M - M^dagger|
double hermiticity_defect(const ComplexMatrix& m);

/// Row functional vec(I)^dagger * L, i.e. d/dt Tr[rho] as a linear form.
/// Its largest entry measures how far L is from trace preserving.
double trace_defect(const Superoperator& generator);

/// Smallest eigenvalue of the (Hermitian part of the) Choi matrix of a
/// superoperator. Normalized so the identity channel has Choi eigenvalues
/// {0, ..., 0, d}.
double choi_min_eigenvalue(const Superoperator& channel);

/// Number of qubits n with 2^n == dim. Throws if dim is not a power of two.
std::size_t qubit_count(Eigen::Index dim);

}  // namespace ops
}  // namespace sdid
