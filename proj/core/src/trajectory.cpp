#include "sdid/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdid/parallel.hpp"

namespace sdid::trajectory {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBlockSize = 4096;

// Running integral P(t) = int_0^t p(s) ds of the toggling sign p(s).
class ToggleIntegral {
 public:
  explicit ToggleIntegral(const PulseSequence& seq) : pulses_(seq.pulse_times), total_(seq.total_time) {
    prefix_.reserve(pulses_.size() + 1);
    prefix_.push_back(0.0);
    double last = 0.0;
    double sign = 1.0;
    for (double p : pulses_) {
      prefix_.push_back(prefix_.back() + sign * (p - last));
      last = p;
      sign = -sign;
    }
    at_end_ = at(total_);
  }

  [[nodiscard]] double at(double t) const {
    t = std::clamp(t, 0.0, total_);
    const auto k = static_cast<std::size_t>(
        std::upper_bound(pulses_.begin(), pulses_.end(), t) - pulses_.begin());
    const double start = k == 0 ? 0.0 : pulses_[k - 1];
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return prefix_[k] + sign * (t - start);
  }

  [[nodiscard]] double at_end() const { return at_end_; }

 private:
  const std::vector<double>& pulses_;
  double total_;
  std::vector<double> prefix_;
  double at_end_ = 0.0;
};

double phase_with(const ToggleIntegral& integral, std::span<const double> decays,
                  const DeviceModel& device, const SpectatorInit& init) {
  double phi = 0.0;
  const double full = integral.at_end();
  for (std::size_t j = 0; j < device.spectators.size(); ++j) {
    const double two_nu = 2.0 * device.spectators[j].nu;
    if (!init.excited(j)) {
      phi += two_nu * full;
      continue;
    }
    // z = -1 on [0, t_d), +1 afterwards.
    const double before = integral.at(decays[j]);
    phi += two_nu * (full - 2.0 * before);
  }
  return phi;
}

}  // namespace

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  engine_.seed(seq);
}

double TrajectoryRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double TrajectoryRng::exponential(double rate) {
  if (!(rate > 0.0)) return kInf;
  return -std::log1p(-uniform()) / rate;
}

PulseSequence build_cpmg(double total_time, int order) {
  if (!(total_time > 0.0)) throw std::invalid_argument("build_cpmg: T must be positive");
  if (order < 0) throw std::invalid_argument("build_cpmg: order must be >= 0");
  const double period = total_time / static_cast<double>(order + 1);
  PulseSequence seq{total_time, {}, SequenceKind::kCpmg, order};
  seq.pulse_times.reserve(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) {
    seq.pulse_times.push_back((static_cast<double>(k) + 0.5) * period);
  }
  return seq;
}

std::vector<double> sample_decays(const DeviceModel& device, const SpectatorInit& init,
                                  TrajectoryRng& rng) {
  check_init(device, init);
  std::vector<double> decays(device.spectator_count(), kInf);
  for (std::size_t j = 0; j < decays.size(); ++j) {
    if (init.excited(j)) decays[j] = rng.exponential(device.spectators[j].qubit.gamma);
  }
  return decays;
}

double accumulated_phase(const PulseSequence& sequence, std::span<const double> decays,
                         const DeviceModel& device, const SpectatorInit& init) {
  check_init(device, init);
  if (decays.size() != device.spectator_count()) {
    throw std::invalid_argument("accumulated_phase: one decay time per spectator required");
  }
  check_pulse_times(sequence.pulse_times, sequence.total_time);
  return phase_with(ToggleIntegral(sequence), decays, device, init);
}

EnsemblePoint ensemble_coherence(const DeviceModel& device, const SpectatorInit& init,
                                 const PulseSequence& sequence, const EnsembleSpec& ens) {
  const double t = sequence.total_time;
  const CoherenceTrace trace = ensemble_trace_impl(device, init, std::span<const double>(&t, 1),
                                                   std::vector<PulseSequence>{sequence}, ens);
  return EnsemblePoint{trace.values.front(), trace.stderr_abs.front()};
}

CoherenceTrace ensemble_trace_impl(const DeviceModel& device, const SpectatorInit& init,
                                   std::span<const double> times,
                                   const std::vector<PulseSequence>& sequences,
                                   const EnsembleSpec& ens) {
  check_init(device, init);
  if (ens.n_traj == 0) throw std::invalid_argument("ensemble needs at least one trajectory");
  if (sequences.size() != times.size()) {
    throw std::invalid_argument("ensemble_trace: one pulse sequence per time point required");
  }
  std::vector<ToggleIntegral> integrals;
  integrals.reserve(sequences.size());
  for (const auto& seq : sequences) {
    check_pulse_times(seq.pulse_times, seq.total_time);
    integrals.emplace_back(seq);
  }

  const std::size_t n_points = times.size();
  const std::size_t n_blocks = (ens.n_traj + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<Complex>> partial(n_blocks, std::vector<Complex>(n_points));

  parallel_blocks(n_blocks, [&](std::size_t block) {
    auto& sums = partial[block];
    const std::size_t begin = block * kBlockSize;
    const std::size_t end = std::min(ens.n_traj, begin + kBlockSize);
    for (std::size_t k = begin; k < end; ++k) {
      TrajectoryRng rng(ens.seed, k);
      const std::vector<double> decays = sample_decays(device, init, rng);
      for (std::size_t p = 0; p < n_points; ++p) {
        const double phi = phase_with(integrals[p], decays, device, init);
        sums[p] += Complex{std::cos(phi), -std::sin(phi)};
      }
    }
  });

  CoherenceTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.values.resize(n_points);
  trace.stderr_abs.resize(n_points);
  const double n = static_cast<double>(ens.n_traj);
  const double gamma0 = device.control.transverse_rate();
  for (std::size_t p = 0; p < n_points; ++p) {
    Complex total{0.0, 0.0};
    for (std::size_t b = 0; b < n_blocks; ++b) total += partial[b][p];
    const Complex mean = total / n;
    const double envelope = std::exp(-gamma0 * times[p]);
    // Every shot has |e^{-i phi}| = 1, so the sample variance is 1 - |mean|^2.
    const double var = std::max(0.0, 1.0 - std::norm(mean));
    trace.values[p] = envelope * mean;
    trace.stderr_abs[p] =
        ens.n_traj > 1 ? envelope * std::sqrt(var * n / (n - 1.0) / n) : kInf;
  }
  trace.scale = 1.0;
  return trace;
}

CoherenceTrace cpmg_trace(const DeviceModel& device, const SpectatorInit& init,
                          std::span<const double> times, int order, const EnsembleSpec& ens) {
  return ensemble_trace(
      device, init, times,
      [order](double t) { return order < 0 ? PulseSequence::ramsey(t) : build_cpmg(t, order); }, ens);
}

}  // namespace sdid::trajectory
