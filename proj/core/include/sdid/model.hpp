#pragma once

// Master-equation model of a control qubit ZZ-coupled to N spectators:
//
//   d rho/dt = -i [H, rho] + sum_j ( gamma_j D[sigma^-_j] + (gamma^phi_j / 2) D[Z_j] ) rho
//   H        = sum_j nu_j Z_0 Z_j
//
// in the frame rotating with the bare qubit frequencies.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "sdid/device.hpp"
#include "sdid/operators.hpp"
#include "sdid/pulses.hpp"

namespace sdid {

struct JumpTerm {
  double rate = 0.0;
  ComplexMatrix op;
};

struct LiouvillianBundle {
  Superoperator superop;
  ComplexMatrix hamiltonian;
  std::vector<JumpTerm> jump_terms;

  /// -i[H, .] + sum rate * D[op], rebuilt from the components.
  [[nodiscard]] Superoperator reassemble() const;
  [[nodiscard]] Eigen::Index dim() const { return hamiltonian.rows(); }
};

namespace model {

ComplexMatrix build_hamiltonian(const DeviceModel& device);

/// Superoperator of D[x] rho = x rho x^dagger - {x^dagger x, rho} / 2.
Superoperator dissipator(const ComplexMatrix& op);

/// Assembles a bundle from a Hamiltonian and diagonal jump terms.
LiouvillianBundle make_bundle(ComplexMatrix hamiltonian, std::vector<JumpTerm> jump_terms);

LiouvillianBundle build_liouvillian(const DeviceModel& device);

/// Product state |+><+| (x) |s_1><s_1| (x) ... with spectators in Z eigenstates.
ComplexMatrix initial_state(const DeviceModel& device, const SpectatorInit& init);

/// rho(t_k) for every t_k in `times` (sorted, non-negative), by exact
/// exponentiation on each free-evolution segment. Pulses are instantaneous pi
/// rotations of the control qubit about `axis`; a pulse at time p is included
/// in every rho(t_k) with t_k >= p.
///
/// Throws std::invalid_argument if rho0 is not a density matrix (1e-10) or
/// the times/pulse times are unsorted.
std::vector<ComplexMatrix> propagate(const LiouvillianBundle& liouvillian, const ComplexMatrix& rho0,
                                     std::span<const double> times,
                                     const std::optional<PulseSequence>& pulses = std::nullopt,
                                     PulseAxis axis = PulseAxis::kX);

/// Tr[rho_01]: trace over the spectators of the <0| . |1> control block.
Complex control_coherence(const ComplexMatrix& rho);

/// Throws std::invalid_argument unless rho is Hermitian, unit trace and
/// positive semidefinite to `tol`.
void check_density_matrix(const ComplexMatrix& rho, double tol = 1e-10);

}  // namespace model
}  // namespace sdid
