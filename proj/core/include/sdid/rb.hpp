#pragma once

// Randomized benchmarking of the control qubit under spectator ZZ coupling.
//
// Each Clifford gate of duration t_gate is followed by a control-qubit phase
// channel diag(1, lambda, lambda*, 1) acting on the column-stacked
// (rho00, rho10, rho01, rho11), conditioned on what the spectators did during
// that gate.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sdid/device.hpp"
#include "sdid/fitting.hpp"
#include "sdid/operators.hpp"

namespace sdid {

/// Raised for the zero-temperature-impossible spectator transition 0 -> 1.
class ForbiddenTransition : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ConditionalChannel {
  int i = 0;  ///< spectator bit before the gate
  int j = 0;  ///< spectator bit after the gate
  Eigen::Matrix4cd superop;
  double norm = 0.0;  ///< probability N_ij of the transition

  [[nodiscard]] Complex lambda() const { return superop(1, 1); }
};

enum class RbFrame { kBare, kExperimental };
enum class SpectatorPrep { kZero, kOne, kPlus };

SpectatorPrep parse_prep(std::string_view name);
RbFrame parse_frame(std::string_view name);
const char* to_string(SpectatorPrep prep);
const char* to_string(RbFrame frame);

struct CliffordGroup {
  std::vector<Eigen::Matrix2cd> elements;  ///< element 0 is the identity
  std::vector<std::vector<int>> product;   ///< product[a][b] ~ elements[a] * elements[b]
  std::vector<int> inverse;

  [[nodiscard]] std::size_t size() const { return elements.size(); }
};

struct RbOptions {
  std::vector<int> lengths{1, 10, 25, 50, 100, 200, 400};
  std::size_t n_seq = 30;
  std::size_t n_shots = 100;  ///< spectator histories per sequence
  double t_gate = 50e-9;
  RbFrame frame = RbFrame::kExperimental;
  std::uint64_t seed = 42;
};

struct RBCurve {
  std::vector<int> lengths;
  std::vector<double> survival;
  std::vector<double> stderr_survival;  ///< spread over sequences
  std::size_t n_seq = 0;
  std::optional<FitResult> fit;  ///< survival = B + A p^m
};

namespace rb {

/// Projected control-qubit map for spectator transition i -> j during a gate
/// of length t_gate, computed from the two-qubit Liouvillian with no control
/// dissipation. Throws ForbiddenTransition if N_ij vanishes.
ConditionalChannel conditional_channel(int i, int j, double nu, double gamma1, double t_gate);

/// Closed-form lambda_ij. Throws ForbiddenTransition for (0, 1) and
/// std::invalid_argument for (1, 0) with gamma1 <= 0.
Complex lambda_analytic(int i, int j, double nu, double gamma1, double t);

/// p = (Tr[superop] - 1) / 3 for a single-qubit channel.
double rb_decay_constant(const Eigen::Matrix4cd& superop);
double rb_decay_constant(const ConditionalChannel& channel);

/// Decay constant with frequencies referenced to ground-state spectators.
double p_experimental(int i, double nu, double t);

/// The 24 single-qubit Cliffords generated by H and S, modulo global phase.
const CliffordGroup& clifford_group();

/// Survival of |0> after random Clifford sequences plus recovery. Sequences
/// depend on (seed, length index, sequence index) only, so every spectator
/// preparation sees the same gates.
RBCurve simulate_rb(const DeviceModel& device, SpectatorPrep prep, const RbOptions& options);

}  // namespace rb
}  // namespace sdid
