#include "sdid/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

namespace sdid {

QubitParams QubitParams::from_times(std::string label, double t1, double t2) {
  QubitParams q;
  q.label = std::move(label);
  const bool has_t1 = t1 > 0.0 && std::isfinite(t1);
  const bool has_t2 = t2 > 0.0 && std::isfinite(t2);
  q.gamma = has_t1 ? 1.0 / t1 : 0.0;
  if (has_t2) {
    const double phi = 1.0 / t2 - 0.5 * q.gamma;
    // 1e-12 relative slack so that T2 == 2 T1 exactly maps to gamma_phi = 0.
    if (phi < -1e-12 * (1.0 / t2)) {
      throw std::invalid_argument("qubit '" + q.label + "': T2 exceeds 2*T1");
    }
    q.gamma_phi = std::max(phi, 0.0);
  }
  return q;
}

SpectatorInit::SpectatorInit(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw std::invalid_argument("spectator init bits must be 0 or 1");
  }
}

SpectatorInit SpectatorInit::parse(std::string_view bits) {
  std::vector<std::uint8_t> out;
  out.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("spectator init '" + std::string(bits) + "' must contain only 0/1");
    }
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return SpectatorInit(std::move(out));
}

SpectatorInit SpectatorInit::all(std::size_t n, std::uint8_t bit) {
  return SpectatorInit(std::vector<std::uint8_t>(n, bit));
}

std::string SpectatorInit::to_string() const {
  std::string s;
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

void check_init(const DeviceModel& device, const SpectatorInit& init) {
  if (init.size() != device.spectator_count()) {
    throw std::invalid_argument("spectator init has " + std::to_string(init.size()) +
                                " bits but the device has " +
                                std::to_string(device.spectator_count()) + " spectators");
  }
}

Superoperator LiouvillianBundle::reassemble() const {
  Superoperator l = ops::hamiltonian_superop(hamiltonian);
  for (const auto& term : jump_terms) {
    l += term.rate * model::dissipator(term.op);
  }
  return l;
}

namespace model {

ComplexMatrix build_hamiltonian(const DeviceModel& device) {
  const std::size_t n = device.qubit_count();
  if (n > kMaxQubits) {
    throw std::invalid_argument("device has more than " + std::to_string(kMaxQubits) + " qubits");
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  if (device.spectators.empty()) return h;
  const ComplexMatrix z0 = ops::embed(ops::pauli_z(), 0, n);
  for (std::size_t j = 0; j < device.spectators.size(); ++j) {
    h += device.spectators[j].nu * z0 * ops::embed(ops::pauli_z(), j + 1, n);
  }
  return h;
}

Superoperator dissipator(const ComplexMatrix& op) {
  if (op.rows() != op.cols()) {
    throw std::invalid_argument("dissipator: operator must be square");
  }
  const ComplexMatrix id = ops::identity(op.rows());
  const ComplexMatrix xdx = op.adjoint() * op;
  return ops::sandwich(op, op.adjoint()) - 0.5 * ops::sandwich(xdx, id) - 0.5 * ops::sandwich(id, xdx);
}

LiouvillianBundle make_bundle(ComplexMatrix hamiltonian, std::vector<JumpTerm> jump_terms) {
  LiouvillianBundle bundle;
  bundle.hamiltonian = std::move(hamiltonian);
  bundle.jump_terms = std::move(jump_terms);
  bundle.superop = bundle.reassemble();
  return bundle;
}

LiouvillianBundle build_liouvillian(const DeviceModel& device) {
  const std::size_t n = device.qubit_count();
  std::vector<JumpTerm> terms;
  auto add = [&](const QubitParams& q, std::size_t site) {
    if (q.gamma > 0.0) terms.push_back({q.gamma, ops::embed(ops::sigma_minus(), site, n)});
    // D[Z] damps coherences at twice its prefactor; gamma_phi is the
    // coherence decay rate, so 1/T2 = gamma_phi + gamma/2 holds.
    if (q.gamma_phi > 0.0) terms.push_back({0.5 * q.gamma_phi, ops::embed(ops::pauli_z(), site, n)});
  };
  add(device.control, 0);
  for (std::size_t j = 0; j < device.spectators.size(); ++j) add(device.spectators[j].qubit, j + 1);
  return make_bundle(build_hamiltonian(device), std::move(terms));
}

ComplexMatrix initial_state(const DeviceModel& device, const SpectatorInit& init) {
  check_init(device, init);
  ComplexMatrix rho = ComplexMatrix::Constant(2, 2, 0.5);
  for (std::size_t j = 0; j < init.size(); ++j) {
    const int b = init.excited(j) ? 1 : 0;
    rho = ops::kron(rho, ops::ket_bra(b, b));
  }
  return rho;
}

void check_density_matrix(const ComplexMatrix& rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw std::invalid_argument("density matrix must be square and non-empty");
  }
  if (ops::hermiticity_defect(rho) > tol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex{1.0, 0.0}) > tol) {
    throw std::invalid_argument("density matrix does not have unit trace");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol) {
    throw std::invalid_argument("density matrix is not positive semidefinite");
  }
}

std::vector<ComplexMatrix> propagate(const LiouvillianBundle& liouvillian, const ComplexMatrix& rho0,
                                     std::span<const double> times,
                                     const std::optional<PulseSequence>& pulses, PulseAxis axis) {
  check_density_matrix(rho0);
  if (rho0.rows() != liouvillian.dim()) {
    throw std::invalid_argument("propagate: state and Liouvillian dimensions differ");
  }
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw std::invalid_argument("propagate: times must be sorted and non-negative");
  }
  std::vector<double> pulse_times;
  if (pulses) {
    check_pulse_times(pulses->pulse_times, pulses->total_time);
    pulse_times = pulses->pulse_times;
  }

  const std::size_t n = ops::qubit_count(rho0.rows());
  const ComplexMatrix flip = ops::embed(axis == PulseAxis::kX ? ops::pauli_x() : ops::pauli_y(), 0, n);
  const Superoperator pulse_superop = ops::unitary_superop(flip);

  // Uniform grids reuse the same segment propagator.
  std::map<double, Superoperator> cache;
  auto step = [&](ComplexVector& v, double dt) {
    if (dt <= 0.0) return;
    auto it = cache.find(dt);
    if (it == cache.end()) {
      it = cache.emplace(dt, ops::expm(liouvillian.superop * dt)).first;
    }
    v = it->second * v;
  };

  ComplexVector v = ops::vectorize(rho0);
  double now = 0.0;
  std::size_t next_pulse = 0;
  std::vector<ComplexMatrix> out;
  out.reserve(times.size());
  for (double t : times) {
    while (next_pulse < pulse_times.size() && pulse_times[next_pulse] <= t) {
      step(v, pulse_times[next_pulse] - now);
      now = pulse_times[next_pulse];
      v = pulse_superop * v;
      ++next_pulse;
    }
    step(v, t - now);
    now = t;
    out.push_back(ops::unvectorize(v));
  }
  return out;
}

Complex control_coherence(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() % 2 != 0) {
    throw std::invalid_argument("control_coherence: expected an even-dimensional square matrix");
  }
  const Eigen::Index half = rho.rows() / 2;
  return rho.block(0, half, half, half).trace();
}

}  // namespace model

PulseSequence PulseSequence::ramsey(double total_time) {
  if (!(total_time > 0.0)) throw std::invalid_argument("pulse sequence needs T > 0");
  return PulseSequence{total_time, {}, SequenceKind::kRamsey, -1};
}

PulseSequence PulseSequence::hahn(double total_time) {
  if (!(total_time > 0.0)) throw std::invalid_argument("pulse sequence needs T > 0");
  return PulseSequence{total_time, {0.5 * total_time}, SequenceKind::kHahn, 0};
}

PulseSequence PulseSequence::custom(double total_time, std::vector<double> pulse_times) {
  check_pulse_times(pulse_times, total_time);
  return PulseSequence{total_time, std::move(pulse_times), SequenceKind::kCustom, -1};
}

std::string PulseSequence::describe() const {
  switch (kind) {
    case SequenceKind::kRamsey:
      return "ramsey";
    case SequenceKind::kHahn:
      return "hahn";
    case SequenceKind::kCpmg:
      return "cpmg(" + std::to_string(order) + ")";
    case SequenceKind::kCustom:
      return "custom(" + std::to_string(pulse_times.size()) + " pulses)";
  }
  return "unknown";
}

void check_pulse_times(std::span<const double> pulse_times, double total_time) {
  if (!std::is_sorted(pulse_times.begin(), pulse_times.end())) {
    throw std::invalid_argument("pulse times must be sorted");
  }
  for (double p : pulse_times) {
    if (!(p > 0.0 && p < total_time)) {
      throw std::invalid_argument("pulse time " + std::to_string(p) + " outside (0, T)");
    }
  }
}

}  // namespace sdid
