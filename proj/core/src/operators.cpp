#include "sdid/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace sdid::ops {

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix sigma_minus() { return ket_bra(0, 1); }
ComplexMatrix sigma_plus() { return ket_bra(1, 0); }

ComplexMatrix ket_bra(int row, int col) {
  if (row < 0 || row > 1 || col < 0 || col > 1) {
    throw std::out_of_range("ket_bra: qubit labels must be 0 or 1");
  }
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(row, col) = 1.0;
  return m;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index br = b.rows();
  const Eigen::Index bc = b.cols();
  ComplexMatrix out(a.rows() * br, a.cols() * bc);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, std::size_t site, std::size_t n_qubits) {
  if (op.rows() != 2 || op.cols() != 2) {
    throw std::invalid_argument("embed: operator must be 2x2");
  }
  if (n_qubits > kMaxQubits) {
    throw std::invalid_argument("embed: at most " + std::to_string(kMaxQubits) + " qubits supported");
  }
  if (site >= n_qubits) {
    throw std::out_of_range("embed: site " + std::to_string(site) + " out of range for " +
                            std::to_string(n_qubits) + " qubits");
  }
  const Eigen::Index left = Eigen::Index{1} << site;
  const Eigen::Index right = Eigen::Index{1} << (n_qubits - site - 1);
  return kron(kron(identity(left), op), identity(right));
}

ComplexVector vectorize(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) {
    throw std::invalid_argument("vectorize: matrix must be square");
  }
  return rho.reshaped();  // Eigen is column-major: reshaped() stacks columns
}

ComplexMatrix unvectorize(const ComplexVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) {
    throw std::invalid_argument("unvectorize: length is not a perfect square");
  }
  return v.reshaped(d, d);
}

Superoperator sandwich(const ComplexMatrix& a, const ComplexMatrix& b) {
  return kron(b.transpose(), a);
}

Superoperator hamiltonian_superop(const ComplexMatrix& h) {
  const ComplexMatrix id = identity(h.rows());
  return -kI * (kron(id, h) - kron(h.transpose(), id));
}

Superoperator unitary_superop(const ComplexMatrix& u) { return kron(u.conjugate(), u); }

namespace {

// Degree-m diagonal Pade coefficients and 1-norm thresholds from
// Higham (2005), "The scaling and squaring method for the matrix
// exponential revisited".
constexpr std::array<double, 4> kB3{120., 60., 12., 1.};
constexpr std::array<double, 6> kB5{30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kB7{17297280., 8648640., 1995840., 277200.,
                                    25200.,    1512.,    56.,      1.};
constexpr std::array<double, 10> kB9{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                     2162160.,     110880.,     3960.,       90.,        1.};
constexpr std::array<double, 14> kB13{64764752532480000., 32382376266240000., 7771770303897600.,
                                      1187353796428800.,  129060195264000.,   10559470521600.,
                                      670442572800.,      33522128640.,       1323241920.,
                                      40840800.,          960960.,            16380.,
                                      182.,               1.};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

double norm1(const ComplexMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

ComplexMatrix solve_pade(const ComplexMatrix& u, const ComplexMatrix& v) {
  return (v - u).partialPivLu().solve(v + u);
}

// Low-degree approximants: U = A * sum_k b_{2k+1} A^{2k}, V = sum_k b_{2k} A^{2k}.
template <std::size_t N>
ComplexMatrix pade_low(const ComplexMatrix& a, const std::array<double, N>& b) {
  const Eigen::Index d = a.rows();
  const ComplexMatrix a2 = a * a;
  ComplexMatrix power = ComplexMatrix::Identity(d, d);
  ComplexMatrix odd = ComplexMatrix::Zero(d, d);
  ComplexMatrix even = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; 2 * k + 1 < N; ++k) {
    even += b[2 * k] * power;
    odd += b[2 * k + 1] * power;
    power = power * a2;
  }
  return solve_pade(a * odd, even);
}

ComplexMatrix pade13(const ComplexMatrix& a) {
  const auto& b = kB13;
  const Eigen::Index d = a.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  const ComplexMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  const ComplexMatrix u =
      a * (u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const ComplexMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                          b[2] * a2 + b[0] * id;
  return solve_pade(u, v);
}

}  // namespace

ComplexMatrix expm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("expm: matrix must be square");
  }
  if (!m.allFinite()) {
    throw std::domain_error("expm: matrix has non-finite entries");
  }
  if (m.size() == 0) return m;

  const double norm = norm1(m);
  if (norm <= kTheta3) return pade_low(m, kB3);
  if (norm <= kTheta5) return pade_low(m, kB5);
  if (norm <= kTheta7) return pade_low(m, kB7);
  if (norm <= kTheta9) return pade_low(m, kB9);

  const int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
  ComplexMatrix r = pade13(m / std::ldexp(1.0, squarings));
  for (int k = 0; k < squarings; ++k) {
    r = r * r;
  }
  return r;
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermiticity_defect: matrix must be square");
  }
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double trace_defect(const Superoperator& generator) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(generator.rows()))));
  const ComplexVector tr = vectorize(identity(d));
  return (tr.adjoint() * generator).cwiseAbs().maxCoeff();
}

double choi_min_eigenvalue(const Superoperator& channel) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(channel.rows()))));
  // Choi = sum_{ab} |a><b| (x) Phi(|a><b|); column (a + d*b) of the
  // superoperator is vec(Phi(|a><b|)).
  ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      const ComplexMatrix image = unvectorize(channel.col(a + d * b));
      choi.block(a * d, b * d, d, d) = image;
    }
  }
  const ComplexMatrix herm = 0.5 * (choi + choi.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::size_t qubit_count(Eigen::Index dim) {
  std::size_t n = 0;
  Eigen::Index v = 1;
  while (v < dim) {
    v <<= 1;
    ++n;
  }
  if (v != dim || dim < 1) {
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
  }
  return n;
}

}  // namespace sdid::ops
