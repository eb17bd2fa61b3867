#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sdid {

/// Relaxation and pure-dephasing rates of one qubit, in 1/s.
struct QubitParams {
  std::string label;
  double gamma = 0.0;      ///< energy relaxation rate, 1/T1
  double gamma_phi = 0.0;  ///< pure dephasing rate

  /// Transverse decay rate gamma_phi + gamma/2 = 1/T2.
  [[nodiscard]] double transverse_rate() const { return gamma_phi + 0.5 * gamma; }

  /// Builds rates from T1/T2 in seconds. A non-positive or infinite t1 means
  /// "no relaxation"; a non-positive or infinite t2 means "no dephasing
  /// beyond T1". Throws std::invalid_argument if T2 > 2 T1.
  static QubitParams from_times(std::string label, double t1, double t2);
};

struct Spectator {
  QubitParams qubit;
  double nu = 0.0;  ///< ZZ coefficient in rad/s (H = nu Z_0 Z_j)
};

/// Control qubit (tensor factor 0) plus N ZZ-coupled spectators.
struct DeviceModel {
  QubitParams control;
  std::vector<Spectator> spectators;

  [[nodiscard]] std::size_t spectator_count() const { return spectators.size(); }
  [[nodiscard]] std::size_t qubit_count() const { return spectators.size() + 1; }
};

/// Initial computational-basis state of each spectator.
class SpectatorInit {
 public:
  SpectatorInit() = default;
  explicit SpectatorInit(std::vector<std::uint8_t> bits);

  /// Parses a bit string such as "101". Throws std::invalid_argument on
  /// characters other than '0' and '1'.
  static SpectatorInit parse(std::string_view bits);
  static SpectatorInit all(std::size_t n, std::uint8_t bit);

  [[nodiscard]] std::size_t size() const { return bits_.size(); }
  [[nodiscard]] bool excited(std::size_t j) const { return bits_.at(j) != 0; }
  [[nodiscard]] const std::vector<std::uint8_t>& bits() const { return bits_; }
  [[nodiscard]] std::string to_string() const;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Throws std::invalid_argument unless init.size() == device.spectator_count().
void check_init(const DeviceModel& device, const SpectatorInit& init);

}  // namespace sdid
