#pragma once

// Orchestration behind the command-line tool: runs one configured
// experiment, fits the curves and writes a CSV plus a JSON sidecar.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdid/analytic.hpp"
#include "sdid/config.hpp"
#include "sdid/derivations.hpp"
#include "sdid/fitting.hpp"
#include "sdid/rb.hpp"

namespace sdid {

struct EngineTrace {
  std::string engine;
  std::string spectators;  ///< init bit string
  int order = -1;          ///< CPMG order, -1 for Ramsey
  CoherenceTrace trace;    ///< already normalized to C(0) = 1
  std::optional<FitResult> fit;
  std::string fit_error;
};

struct RamseyResult {
  std::vector<EngineTrace> traces;
  /// max |analytic - lindblad| over every shared curve; negative if not run.
  double max_delta_analytic_lindblad = -1.0;
};

struct CpmgOrderResult {
  int order = 0;
  double tmax_us = 0.0;
  std::vector<EngineTrace> traces;
  std::optional<FitResult> fit;  ///< of the configured fit engine
  std::string fit_error;
  /// max |analytic nu' model - trajectory| on normalized magnitude; negative
  /// if either engine was not run.
  double max_delta_model_trajectory = -1.0;
};

struct CpmgResult {
  std::string spectators;
  std::vector<CpmgOrderResult> orders;
};

struct RbResult {
  std::vector<std::pair<SpectatorPrep, RBCurve>> curves;
  double epc_spread = 0.0;  ///< max - min fitted EPC over preparations
};

struct DeriveRow {
  double nu_tau_c = 0.0;
  derive::Ceme1Coefficients builder;
  derive::Ceme1Coefficients reference;
  double max_rel_diff = 0.0;  ///< max |L_builder - L_reference| / max |L_reference|
};

struct DeriveResult {
  double nu = 0.0;
  double gamma = 0.0;
  std::vector<DeriveRow> rows;
};

namespace experiments {

/// Uniform grid of `points` times on [0, tmax].
std::vector<double> time_grid(double tmax, int points);

/// Dense-Lindblad control coherence on `times`, normalized to C(0) = 1. With
/// order >= 0 each window T carries a CPMG_order sequence of X pulses and the
/// value is reported in the toggling frame (conjugated after an odd number
/// of pulses), matching the analytic and trajectory engines.
CoherenceTrace lindblad_trace(const DeviceModel& device, const SpectatorInit& init,
                              std::span<const double> times, int order = -1);

/// First time at which the nu' = nu / (n + 1) closed-form magnitude drops to
/// 1/e of its initial value.
double cpmg_one_over_e_time(const DeviceModel& device, const SpectatorInit& init, int order);

RamseyResult run_ramsey(const ExperimentConfig& cfg);
CpmgResult run_cpmg(const ExperimentConfig& cfg);
RbResult run_rb(const ExperimentConfig& cfg);
DeriveResult run_derive(const ExperimentConfig& cfg);

/// Runs the configured experiment and writes `out` (CSV) and `out`.json.
/// Returns the list of files written.
std::vector<std::filesystem::path> run(const ExperimentConfig& cfg, const std::filesystem::path& out);

enum class FitKind { kExponential, kRb };

/// Fits a CSV written by `run` (or any CSV with time_us/coh_abs or
/// length/survival columns). Rows can be restricted to one engine and one
/// spectator string.
FitResult fit_csv(const std::filesystem::path& csv, FitKind kind, const std::string& engine = "",
                  const std::string& spectators = "");

/// JSON text of a fit result.
std::string fit_to_json(const FitResult& fit);

}  // namespace experiments
}  // namespace sdid
