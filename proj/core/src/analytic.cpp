#include "sdid/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace sdid {

std::vector<double> CoherenceTrace::magnitudes() const {
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = std::abs(scaled(k));
  return out;
}

void CoherenceTrace::normalize() {
  if (values.empty()) return;
  const double first = std::abs(values.front());
  if (first == 0.0) throw std::domain_error("cannot normalize a trace with zero initial coherence");
  scale = 1.0 / first;
}

namespace analytic {

Complex eta_diag(int init, double nu, double gamma1, double t) {
  if (t < 0.0) throw std::invalid_argument("eta_diag: t must be non-negative");
  if (init == 0) return std::exp(-2.0 * kI * nu * t);
  if (init != 1) throw std::invalid_argument("eta_diag: init must be 0 or 1");
  const Complex denom = 4.0 * kI * nu - gamma1;
  if (denom == Complex{0.0, 0.0}) return 1.0;  // nu = gamma1 = 0
  return (4.0 * kI * nu * std::exp((2.0 * kI * nu - gamma1) * t) -
          gamma1 * std::exp(-2.0 * kI * nu * t)) /
         denom;
}

Complex coherence_1spec(Complex c00, Complex c11, double nu, double gamma0_tilde, double gamma1,
                        double t) {
  const double envelope = std::exp(-gamma0_tilde * t);
  return envelope * (c00 * eta_diag(0, nu, gamma1, t) + c11 * eta_diag(1, nu, gamma1, t));
}

Complex coherence_nspec(const DeviceModel& device, const SpectatorInit& init, double t,
                        Complex amplitude) {
  check_init(device, init);
  if (t < 0.0) throw std::invalid_argument("coherence_nspec: t must be non-negative");
  Complex value = amplitude * std::exp(-device.control.transverse_rate() * t);
  for (std::size_t j = 0; j < device.spectators.size(); ++j) {
    const auto& s = device.spectators[j];
    value *= eta_diag(init.excited(j) ? 1 : 0, s.nu, s.qubit.gamma, t);
  }
  return value;
}

CoherenceTrace coherence_trace(const DeviceModel& device, const SpectatorInit& init,
                               std::span<const double> times) {
  CoherenceTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.values.reserve(times.size());
  for (double t : times) trace.values.push_back(coherence_nspec(device, init, t));
  trace.scale = 2.0;  // |+> control: Tr[rho_01(0)] = 1/2
  return trace;
}

double heuristic_rate(const DeviceModel& device, const SpectatorInit& init) {
  check_init(device, init);
  double rate = device.control.transverse_rate();
  for (std::size_t j = 0; j < device.spectators.size(); ++j) {
    if (init.excited(j)) rate += device.spectators[j].qubit.gamma;
  }
  return rate;
}

DeviceModel cpmg_effective(const DeviceModel& device, int order) {
  if (order < 0) throw std::invalid_argument("cpmg_effective: order must be >= 0");
  DeviceModel out = device;
  for (auto& s : out.spectators) s.nu /= static_cast<double>(order + 1);
  return out;
}

PhaseBounds phase_bounds(double total_time, int order, double nu) {
  if (order < 0) throw std::invalid_argument("phase_bounds: order must be >= 0");
  return PhaseBounds{0.0, 2.0 * std::abs(nu) * total_time / static_cast<double>(order + 1)};
}

}  // namespace analytic
}  // namespace sdid
