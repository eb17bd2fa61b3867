#pragma once

// Closed-form control-qubit coherence under spectator-decay-induced
// dephasing. All phases are in the bare frame of H = sum_j nu_j Z_0 Z_j: a
// ground-state spectator rotates the coherence as e^{-2 i nu t}, an excited
// one as e^{+2 i nu t} until it decays.

#include <complex>
#include <span>
#include <vector>

#include "sdid/device.hpp"
#include "sdid/operators.hpp"

namespace sdid {

/// Sampled coherence Tr[rho_01(t)]. `scale` multiplies `values` when the trace
/// is reported, e.g. 2 for a |+> preparation so that C(0) = 1, times any
/// SPAM factor.
struct CoherenceTrace {
  std::vector<double> times;
  std::vector<Complex> values;
  std::vector<double> stderr_abs;  ///< empty unless the engine is stochastic
  double scale = 1.0;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] Complex scaled(std::size_t k) const { return scale * values[k]; }
  [[nodiscard]] std::vector<double> magnitudes() const;

  /// Sets `scale` so that the first point has unit modulus.
  void normalize();
  /// Multiplies the reported curve by `factor` (first-data-point rescaling).
  void spam_rescale(double factor) { scale *= factor; }
};

struct PhaseBounds {
  double lo = 0.0;
  double hi = 0.0;
};

namespace analytic {

/// Diagonal element of one spectator's eta block, started from |init><init|
/// with unit weight.
Complex eta_diag(int init, double nu, double gamma1, double t);

/// Tr[rho_01(t)] for one spectator, given the spectator-diagonal entries of
/// rho_01(0).
Complex coherence_1spec(Complex c00, Complex c11, double nu, double gamma0_tilde, double gamma1,
                        double t);

/// Tr[rho_01(t)] for N spectators in Z eigenstates; `amplitude` is
/// Tr[rho_01(0)] (1/2 for a |+> control).
Complex coherence_nspec(const DeviceModel& device, const SpectatorInit& init, double t,
                        Complex amplitude = 0.5);

/// coherence_nspec on a grid, normalized to C(0) = 1.
CoherenceTrace coherence_trace(const DeviceModel& device, const SpectatorInit& init,
                               std::span<const double> times);

/// gamma~_0 + sum over excited spectators of gamma_j.
double heuristic_rate(const DeviceModel& device, const SpectatorInit& init);

/// Device with every nu_j replaced by nu_j / (n + 1). Throws on n < 0.
DeviceModel cpmg_effective(const DeviceModel& device, int order);

/// Range of |accumulated phase| for one excited spectator over a CPMG_n
/// window of length T: [0, 2 |nu| T / (n + 1)].
PhaseBounds phase_bounds(double total_time, int order, double nu);

}  // namespace analytic
}  // namespace sdid
