#pragma once

#include <array>
#include <span>
#include <string>

namespace sdid {

enum class FitModel { kExponential, kRbDecay };

/// Least-squares fit of one of two three-parameter models:
///   kExponential: y = A exp(-rate t) + C   (amplitude, rate, offset)
///   kRbDecay:     y = B + A p^m            (amplitude, p, offset)
struct FitResult {
  FitModel model = FitModel::kExponential;
  double amplitude = 0.0;
  double decay = 0.0;  ///< rate in 1/s, or p
  double offset = 0.0;
  std::array<double, 3> stderr_params{};  ///< same order as the fields above
  double residual_norm = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::string status;

  [[nodiscard]] const char* tag() const {
    return model == FitModel::kExponential ? "A*exp(-t/T2)+C" : "B+A*p^m";
  }
  [[nodiscard]] double t2() const { return 1.0 / decay; }
  [[nodiscard]] double t2_stderr() const { return stderr_params[1] / (decay * decay); }
  [[nodiscard]] double p() const { return decay; }
  [[nodiscard]] double epc() const { return 0.5 * (1.0 - decay); }
  [[nodiscard]] double epc_stderr() const { return 0.5 * stderr_params[1]; }
};

namespace fit {

/// Fits A exp(-t/T2) + C. Needs >= 4 points and positive magnitudes.
/// Iterates until the relative parameter change drops below 1e-10 or 200
/// function evaluations; on the latter the best iterate is returned with
/// converged = false.
FitResult fit_exponential(std::span<const double> times, std::span<const double> magnitudes);

/// Fits B + A p^m. Needs >= 3 distinct lengths. If the free fit does not
/// converge or lands outside 0 <= A, B <= 1, B is fixed at 1/2 and `status`
/// reads "ok-offset-fixed". A p outside (0, 1] is reported in `status`.
FitResult fit_rb(std::span<const int> lengths, std::span<const double> survival);

}  // namespace fit
}  // namespace sdid
