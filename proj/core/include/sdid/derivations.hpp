#pragma once

// Microscopic master-equation builders for a system weakly coupled to
// independent zero-temperature baths:
//
//   BMRWA  strong secular approximation, one dissipator per Bohr frequency
//   BMPSA  partial secular approximation, one dissipator per frequency cluster
//   CETCG  cumulant expansion with coarse-graining time tau_C, coherent
//          mixing of Bohr frequencies inside a cluster
//
// Pauli convention. The helpers below write energy in the operator Zhat =
// |1><1| - |0><0| = -Z, so |1> is the excited level and sigma^- = |0><1|
// lowers the energy. The ZZ term Zhat_0 Zhat_j = Z_0 Z_j is unaffected.

#include <functional>
#include <string>
#include <vector>

#include "sdid/model.hpp"
#include "sdid/operators.hpp"

namespace sdid {

enum class BathModel { kFlat, kOhmic, kTabulated, kZero };

/// Decay rate Gamma(Omega) and Lamb shift S(Omega) of one bath, in 1/s. Both
/// vanish for Omega <= 0.
struct BathSpectrum {
  BathModel model = BathModel::kFlat;
  std::function<double(double)> gamma_of;
  std::function<double(double)> lamb_of;

  [[nodiscard]] double gamma(double omega) const { return omega > 0.0 ? gamma_of(omega) : 0.0; }
  [[nodiscard]] double lamb(double omega) const {
    return omega > 0.0 && lamb_of ? lamb_of(omega) : 0.0;
  }

  static BathSpectrum flat(double gamma0);
  static BathSpectrum zero();
  /// Gamma = eta * Omega * exp(-Omega / cutoff).
  static BathSpectrum ohmic(double eta, double cutoff);
  /// Linear interpolation of (omega, gamma) samples, zero outside the table.
  static BathSpectrum tabulated(std::vector<double> omegas, std::vector<double> gammas);
};

struct BohrTerm {
  double frequency = 0.0;  ///< rad/s
  ComplexMatrix op;
};

struct Cluster {
  std::vector<BohrTerm> members;
  double mean = 0.0;
  double spread = 0.0;  ///< max - min member frequency

  [[nodiscard]] ComplexMatrix summed_op() const;
};

struct RateMatrix {
  std::vector<double> frequencies;
  ComplexMatrix gamma;  ///< gamma(a, b) = Gamma(Omega_a, Omega_b)
  double tau_c = 0.0;
};

/// H_S and one coupling operator per bath for N + 1 logical qubits:
///   H_S = sum_j omega_j / 2 Zhat_j + sum_j nu_j Zhat_0 Zhat_j
///   bath 0: X_0 + sum_j a_0j Zhat_0 X_j,   bath j: X_j + a_j0 X_0 Zhat_j
struct LogicalSystem {
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> couplings;
  std::vector<ComplexMatrix> dominant;  ///< couplings with every a set to 0
};

namespace derive {

/// omegas has N + 1 entries; nus, a_0j, a_j0 have N (empty a vectors mean 0).
LogicalSystem logical_system(const std::vector<double>& omegas, const std::vector<double>& nus,
                             const std::vector<double>& a_0j = {},
                             const std::vector<double>& a_j0 = {});

/// Two-qubit case: spectator bath coupling X_1 + a X_0 Zhat_1.
LogicalSystem two_qubit_system(double omega0, double omega1, double nu, double a = 0.0);

/// Bohr decomposition of X in the eigenbasis of H_S, sorted by frequency.
/// Frequencies closer than 1e-9 max|lambda| are merged; matrix elements below
/// `tol` are dropped. Throws std::invalid_argument if H_S is not Hermitian.
std::vector<BohrTerm> bohr_spectrum(const ComplexMatrix& h_s, const ComplexMatrix& coupling,
                                    double tol = 1e-12);

/// Keeps the terms of `full` whose frequency also occurs in `dominant`. With
/// `dominant` the spectrum of the a = 0 coupling this drops every
/// hybridization-only channel, whose dissipator is O(|a|^2).
std::vector<BohrTerm> drop_order_a2(const std::vector<BohrTerm>& full,
                                    const std::vector<BohrTerm>& dominant);

/// Greedy grouping of sorted frequencies: a cluster grows while the next
/// frequency is within delta_omega of its first member.
std::vector<Cluster> cluster_bohr(std::vector<BohrTerm> terms, double delta_omega);

LiouvillianBundle build_bmrwa(const std::vector<BohrTerm>& terms, const BathSpectrum& bath,
                              bool lamb_shift = false);
LiouvillianBundle build_bmpsa(const std::vector<Cluster>& clusters, const BathSpectrum& bath,
                              bool lamb_shift = false);

/// gamma_bar e^{i d tau_C / 2} sinc(d tau_C / 2), d = omega_p - omega.
Complex cetcg_rate(double omega, double omega_p, double tau_c, double gamma_bar);

RateMatrix rate_matrix(const Cluster& cluster, double tau_c, double gamma_bar);

/// CETCG generator with Gamma(Omega, Omega') = cetcg_rate(..., Gamma(mean))
/// inside each cluster and zero across clusters. `jump_terms` holds the
/// diagonalized form (rate = rate-matrix eigenvalue).
LiouvillianBundle build_cetcg(const std::vector<Cluster>& clusters, const BathSpectrum& bath,
                              double tau_c);

/// Closed-form two-qubit CETCG generator, with A = I (x) sigma^- and
/// B = Zhat (x) sigma^-:
///   (gamma/2) [ (1 + sinc 4x) D[A] + (1 - sinc 4x) D[B]
///               + sin(2x) sinc(2x) ( i A rho B^dagger + h.c. ) ],  x = nu tau_C
LiouvillianBundle two_qubit_cetcg_reference(double nu, double tau_c, double gamma);

/// Coefficients of a two-qubit generator on {D[A], D[B], i A.B^dagger + h.c.}
/// (least squares), in units of `gamma`.
struct Ceme1Coefficients {
  double uncorrelated = 0.0;
  double correlated = 0.0;
  double cross = 0.0;
  double residual = 0.0;  ///< max-norm of what the three terms do not explain
};
Ceme1Coefficients ceme1_coefficients(const Superoperator& generator, double gamma);
Ceme1Coefficients ceme1_closed_form(double nu_tau_c);

/// Validation of cetcg_rate: evaluates
///   (1/tau_C) int_0^tau_C ds int_0^tau_C ds' e^{i(Omega' s - Omega s')} C(s - s')
/// by adaptive quadrature for the Lorentzian correlation
///   C(u) = gamma0 / (2 tau_B) exp(-|u| / tau_B - i omega_b u),
/// whose Gamma(Omega) = gamma0 / (1 + (Omega - omega_b)^2 tau_B^2).
Complex cetcg_rate_quadrature(double omega, double omega_p, double tau_c, double tau_b,
                              double gamma0, double omega_b);

/// Sum of generators on the same space; jump terms are concatenated.
LiouvillianBundle sum_bundles(const std::vector<LiouvillianBundle>& parts);

}  // namespace derive
}  // namespace sdid
