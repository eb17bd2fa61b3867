#pragma once

// Experiment configuration, schema "v1". Device parameters are given in the
// units of a calibration table: T1/T2 in microseconds and the ZZ splitting 4nu
// in kHz. Internally nu = 2 pi 1e3 * zz_4nu_khz / 4 rad/s.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdid/device.hpp"
#include "sdid/rb.hpp"

namespace sdid {

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind { kRamsey, kCpmg, kRb, kDerive };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

struct QubitEntry {
  std::string label;
  std::optional<double> t1_us;  ///< absent: no relaxation
  std::optional<double> t2_us;  ///< absent: T2 = 2 T1
  double zz_4nu_khz = 0.0;      ///< spectators only
};

struct DeviceEntry {
  QubitEntry control;
  std::vector<QubitEntry> spectators;
};

struct DeriveOptions {
  std::vector<double> nu_tau_c{0.001, 0.1, 1.0, 10.0, 1000.0};
  double omega0_ghz = 5.0;
  double omega1_ghz = 5.1;
  // Used when the config has no device; otherwise spectator 0 is taken.
  double zz_4nu_khz = 45.0;
  double t1_us = 107.0;
};

struct ExperimentConfig {
  std::string version = "v1";
  std::optional<DeviceEntry> device_entry;  ///< as written, for re-emission
  DeviceModel device;                       ///< derived rates
  ExperimentKind experiment = ExperimentKind::kRamsey;

  std::vector<std::string> spectator_inits;  ///< bit strings, ramsey/cpmg
  double tmax_us = 500.0;
  int points = 101;
  std::vector<std::string> engines{"analytic", "lindblad"};

  std::vector<int> cpmg_orders{0, 1, 2, 4, 8, 16, 32, 64, 128, 160};
  double cpmg_tmax_factor = 5.0;  ///< tmax = factor * 1/e time of the nu' model
  std::string cpmg_fit_engine = "trajectory";

  RbOptions rb;
  std::vector<SpectatorPrep> rb_inits{SpectatorPrep::kZero, SpectatorPrep::kOne,
                                      SpectatorPrep::kPlus};

  DeriveOptions derive;

  std::uint64_t seed = 42;
  std::size_t n_traj = 100000;
  double spam_factor = 1.0;
  std::string output;
};

namespace config {

/// Parses and validates a JSON document. Throws ConfigError.
ExperimentConfig parse(const std::string& json_text);
ExperimentConfig load(const std::filesystem::path& path);

/// Canonical JSON for a config (parse(to_json(c)) reproduces c).
std::string to_json(const ExperimentConfig& cfg, int indent = 2);

/// Builds the internal device from calibration-table values. Throws
/// ConfigError naming the offending field.
DeviceModel build_device(const DeviceEntry& entry);

/// nu in rad/s from the 4nu splitting in kHz.
double nu_from_khz(double zz_4nu_khz);

/// Re-derives `device` after editing `device_entry`, and checks cross-field
/// constraints (init lengths, engine names, ...). Throws ConfigError.
void validate(ExperimentConfig& cfg);

}  // namespace config
}  // namespace sdid
