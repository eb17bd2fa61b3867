#pragma once

#include <span>
#include <string>
#include <vector>

namespace sdid {

enum class SequenceKind { kRamsey, kHahn, kCpmg, kCustom };
enum class PulseAxis { kX, kY };

/// Instantaneous control-qubit pi pulses inside a free-evolution window [0, T].
struct PulseSequence {
  double total_time = 0.0;
  std::vector<double> pulse_times;  ///< sorted, strictly inside (0, total_time)
  SequenceKind kind = SequenceKind::kRamsey;
  int order = -1;  ///< CPMG order n, -1 otherwise

  static PulseSequence ramsey(double total_time);
  static PulseSequence hahn(double total_time);
  /// Throws std::invalid_argument if times are unsorted or outside (0, T).
  static PulseSequence custom(double total_time, std::vector<double> pulse_times);

  [[nodiscard]] std::string describe() const;
};

/// Validates sortedness and the open-interval constraint.
void check_pulse_times(std::span<const double> pulse_times, double total_time);

}  // namespace sdid
