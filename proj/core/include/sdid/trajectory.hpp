#pragma once

// Monte-Carlo phase-kick model: each spectator that starts excited decays at
// most once at an exponentially distributed time; between events the control
// qubit picks up a deterministic Z phase whose sign is flipped by every echo
// pulse. Averaging e^{-i phi} over shots gives the ensemble coherence.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sdid/analytic.hpp"
#include "sdid/device.hpp"
#include "sdid/pulses.hpp"

namespace sdid {

struct EnsembleSpec {
  std::size_t n_traj = 100000;
  std::uint64_t seed = 42;
};

struct EnsemblePoint {
  Complex value;        ///< e^{-gamma~_0 T} <e^{-i phi}>, bare frame, C(0) = 1
  double stderr_abs;    ///< standard error of `value`
};

namespace trajectory {

/// Random stream for one trajectory, a pure function of (seed, index).
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t index);
  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform();
  /// Exponential variate with the given rate; +inf for rate <= 0.
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

/// CPMG_n: n + 1 pulses at (k + 1/2) T / (n + 1), k = 0..n.
PulseSequence build_cpmg(double total_time, int order);

/// One decay time per spectator; +inf for spectators that start in |0> or
/// have gamma = 0.
std::vector<double> sample_decays(const DeviceModel& device, const SpectatorInit& init,
                                  TrajectoryRng& rng);

/// phi = sum_j 2 nu_j int_0^T z_j(t) p(t) dt with z_j = +1 in |0>, -1 in |1>
/// and p(t) = (-1)^(pulses before t). Decay times >= T mean "no decay".
double accumulated_phase(const PulseSequence& sequence, std::span<const double> decays,
                         const DeviceModel& device, const SpectatorInit& init);

/// Throws std::invalid_argument if ens.n_traj == 0.
EnsemblePoint ensemble_coherence(const DeviceModel& device, const SpectatorInit& init,
                                 const PulseSequence& sequence, const EnsembleSpec& ens);

/// Ensemble coherence at several window lengths. `sequence_for` builds the
/// pulse sequence for window length T (T = 0 gives C = 1). All points share
/// the same sampled decay times.
template <class SequenceFor>
CoherenceTrace ensemble_trace(const DeviceModel& device, const SpectatorInit& init,
                              std::span<const double> times, SequenceFor&& sequence_for,
                              const EnsembleSpec& ens);

/// ensemble_trace for CPMG_n windows (order < 0 means no pulses).
CoherenceTrace cpmg_trace(const DeviceModel& device, const SpectatorInit& init,
                          std::span<const double> times, int order, const EnsembleSpec& ens);

// Implementation detail shared with the template above.
CoherenceTrace ensemble_trace_impl(const DeviceModel& device, const SpectatorInit& init,
                                   std::span<const double> times,
                                   const std::vector<PulseSequence>& sequences,
                                   const EnsembleSpec& ens);

template <class SequenceFor>
CoherenceTrace ensemble_trace(const DeviceModel& device, const SpectatorInit& init,
                              std::span<const double> times, SequenceFor&& sequence_for,
                              const EnsembleSpec& ens) {
  std::vector<PulseSequence> sequences;
  sequences.reserve(times.size());
  for (double t : times) {
    sequences.push_back(t > 0.0 ? sequence_for(t) : PulseSequence{0.0, {}, SequenceKind::kRamsey, -1});
  }
  return ensemble_trace_impl(device, init, times, sequences, ens);
}

}  // namespace trajectory
}  // namespace sdid
