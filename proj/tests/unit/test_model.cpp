#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "devices.hpp"
#include "sdid/model.hpp"
#include "sdid/operators.hpp"
#include "sdid/trajectory.hpp"

using namespace sdid;
using namespace sdid::testing;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ComplexMatrix random_matrix(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

ComplexMatrix random_density(Eigen::Index n, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(n, rng);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

DeviceModel random_device(std::size_t n_spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t1(50e-6, 300e-6), frac(0.2, 2.0), khz(10, 80);
  DeviceModel d;
  const double c1 = t1(rng);
  d.control = QubitParams::from_times("c", c1, frac(rng) * c1);
  for (std::size_t j = 0; j < n_spec; ++j) {
    const double s1 = t1(rng);
    d.spectators.push_back({QubitParams::from_times("s", s1, frac(rng) * s1), nu_khz(khz(rng))});
  }
  return d;
}

}  // namespace

TEST(Hamiltonian, NoSpectators) {
  DeviceModel d;
  const ComplexMatrix h = model::build_hamiltonian(d);
  ASSERT_EQ(h.rows(), 2);
  EXPECT_EQ(max_abs(h), 0.0);
}

TEST(Hamiltonian, OneSpectator) {
  DeviceModel d;
  d.spectators.push_back({QubitParams{}, 3.5});
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.diagonal() << 3.5, -3.5, -3.5, 3.5;
  EXPECT_LT(max_abs(model::build_hamiltonian(d) - expected), 1e-15);
}

TEST(Hamiltonian, ThreeSpectatorSpectrum) {
  const DeviceModel d = three_spectator_device();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(model::build_hamiltonian(d));
  std::vector<double> expected;
  for (int s0 : {-1, 1})
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1}) {
        // Each eigenvalue appears twice (control in |0> or |1>).
        const double e = s0 * d.spectators[0].nu + s1 * d.spectators[1].nu + s2 * d.spectators[2].nu;
        expected.push_back(e);
        expected.push_back(e);
      }
  std::sort(expected.begin(), expected.end());
  for (int k = 0; k < 16; ++k) EXPECT_NEAR(es.eigenvalues()(k), expected[k], 1e-9 * std::abs(expected[k]));
}

TEST(Dissipator, DephasingKillsOffDiagonals) {
  ComplexMatrix rho(2, 2);
  rho << Complex(0.3), Complex(0.1, 0.2), Complex(0.1, -0.2), Complex(0.7);
  const ComplexMatrix out = ops::unvectorize(model::dissipator(ops::pauli_z()) * ops::vectorize(rho));
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 1) = -2.0 * rho(0, 1);
  expected(1, 0) = -2.0 * rho(1, 0);
  EXPECT_LT(max_abs(out - expected), 1e-15);
}

TEST(Dissipator, DecayOfExcitedState) {
  const ComplexMatrix out =
      ops::unvectorize(model::dissipator(ops::sigma_minus()) * ops::vectorize(ops::ket_bra(1, 1)));
  EXPECT_LT(max_abs(out - (ops::ket_bra(0, 0) - ops::ket_bra(1, 1))), 1e-15);
}

TEST(Dissipator, MatchesDirectFormula) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix x = random_matrix(4, rng);
    const ComplexMatrix rho = random_matrix(4, rng);
    const ComplexMatrix xdx = x.adjoint() * x;
    const ComplexMatrix direct = x * rho * x.adjoint() - 0.5 * (xdx * rho + rho * xdx);
    EXPECT_LT(max_abs(ops::unvectorize(model::dissipator(x) * ops::vectorize(rho)) - direct), 1e-12);
  }
}

TEST(Liouvillian, ClosedSystem) {
  DeviceModel d;
  d.spectators.push_back({QubitParams{}, 2.0});
  const LiouvillianBundle b = model::build_liouvillian(d);
  const ComplexMatrix h = b.hamiltonian;
  const ComplexMatrix i4 = ops::identity(4);
  const ComplexMatrix expected = -kI * (ops::kron(i4, h) - ops::kron(h.transpose(), i4));
  EXPECT_LT(max_abs(b.superop - expected), 1e-15);
  EXPECT_TRUE(b.jump_terms.empty());
}

TEST(Liouvillian, TracePreservingAndReassembles) {
  std::mt19937_64 rng(12);
  for (std::size_t n = 0; n <= 3; ++n) {
    const LiouvillianBundle b = model::build_liouvillian(random_device(n, rng));
    EXPECT_LT(ops::trace_defect(b.superop), 1e-12);
    EXPECT_LT(max_abs(b.reassemble() - b.superop), 1e-12 * max_abs(b.superop));
    EXPECT_GT(ops::choi_min_eigenvalue(ops::expm(b.superop * 1e-7)), -1e-9);
  }
}

TEST(Liouvillian, CoherenceDecaysAtInverseT2) {
  // Single qubit, no spectators: |rho01(t)| = rho01(0) e^{-t/T2}.
  DeviceModel d;
  d.control = QubitParams::from_times("c", 100e-6, 150e-6);
  const auto b = model::build_liouvillian(d);
  const double t = 80e-6;
  const double times[] = {t};
  const auto rho = model::propagate(b, model::initial_state(d, SpectatorInit{}), times);
  EXPECT_NEAR(std::abs(rho[0](0, 1)), 0.5 * std::exp(-t / 150e-6), 1e-12);
}

TEST(QubitParams, FromTimes) {
  const QubitParams boundary = QubitParams::from_times("q", 100e-6, 200e-6);
  EXPECT_EQ(boundary.gamma_phi, 0.0);
  EXPECT_THROW(QubitParams::from_times("q", 100e-6, 210e-6), std::invalid_argument);
  const QubitParams none = QubitParams::from_times("q", kNoT1, 0.0);
  EXPECT_EQ(none.gamma, 0.0);
  EXPECT_EQ(none.gamma_phi, 0.0);
}

TEST(Propagate, NullGenerator) {
  std::mt19937_64 rng(13);
  const LiouvillianBundle b = model::make_bundle(ComplexMatrix::Zero(4, 4), {});
  const ComplexMatrix rho0 = random_density(4, rng);
  const double times[] = {0.0, 1.0, 7.5};
  for (const auto& rho : model::propagate(b, rho0, times)) EXPECT_LT(max_abs(rho - rho0), 1e-15);
}

TEST(Propagate, EnergyRelaxation) {
  const double gamma = 2.5e4;
  const LiouvillianBundle b = model::make_bundle(ComplexMatrix::Zero(2, 2), {{gamma, ops::sigma_minus()}});
  std::vector<double> times{0.0, 10e-6, 40e-6, 100e-6};
  const auto rho = model::propagate(b, ops::ket_bra(1, 1), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_NEAR(rho[k](1, 1).real(), std::exp(-gamma * times[k]), 1e-10);
  }
}

TEST(Propagate, HahnEchoCancelsStaticShift) {
  DeviceModel d;
  d.spectators.push_back({QubitParams{}, nu_khz(45)});
  const auto b = model::build_liouvillian(d);
  const double total = 37e-6;
  const double times[] = {total};
  const auto rho = model::propagate(b, model::initial_state(d, SpectatorInit::parse("1")), times,
                                    PulseSequence::hahn(total));
  EXPECT_NEAR(2.0 * std::abs(model::control_coherence(rho[0])), 1.0, 1e-12);
}

TEST(Propagate, PulseAxisDoesNotChangeMagnitude) {
  const DeviceModel d = one_spectator_device();
  const auto b = model::build_liouvillian(d);
  const auto rho0 = model::initial_state(d, SpectatorInit::parse("1"));
  const double t = 120e-6;
  const double times[] = {t};
  const auto seq = trajectory::build_cpmg(t, 3);
  const auto x = model::propagate(b, rho0, times, seq, PulseAxis::kX);
  const auto y = model::propagate(b, rho0, times, seq, PulseAxis::kY);
  EXPECT_NEAR(std::abs(model::control_coherence(x[0])), std::abs(model::control_coherence(y[0])), 1e-12);
}

TEST(Propagate, Errors) {
  const LiouvillianBundle b = model::make_bundle(ComplexMatrix::Zero(2, 2), {});
  const double sorted[] = {0.0, 1.0};
  const double unsorted[] = {1.0, 0.0};
  EXPECT_THROW(model::propagate(b, ops::identity(2), sorted), std::invalid_argument);  // trace 2
  EXPECT_THROW(model::propagate(b, ops::ket_bra(0, 0), unsorted), std::invalid_argument);
  EXPECT_THROW(PulseSequence::custom(1.0, {0.6, 0.4}), std::invalid_argument);
  EXPECT_THROW(PulseSequence::custom(1.0, {1.0}), std::invalid_argument);
}

TEST(Propagate, PhysicalityAlongTrajectory) {
  std::mt19937_64 rng(14);
  for (std::size_t n = 1; n <= 2; ++n) {
    const DeviceModel d = random_device(n, rng);
    const auto b = model::build_liouvillian(d);
    std::vector<double> times;
    for (int k = 0; k <= 20; ++k) times.push_back(k * 25e-6);
    const auto states = model::propagate(b, random_density(b.dim(), rng), times, PulseSequence::hahn(500e-6));
    for (const auto& rho : states) {
      EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-10);
      EXPECT_LT(ops::hermiticity_defect(rho), 1e-12);
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()));
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
    }
  }
}

TEST(ControlCoherence, Definitions) {
  const ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  EXPECT_NEAR(std::abs(model::control_coherence(ops::kron(plus, ops::ket_bra(0, 0))) - 0.5), 0.0, 1e-15);

  std::mt19937_64 rng(15);
  EXPECT_EQ(model::control_coherence(ops::kron(ops::ket_bra(0, 0), random_density(2, rng))), Complex(0.0));

  const ComplexMatrix rho = random_density(4, rng);
  EXPECT_LT(std::abs(model::control_coherence(rho) - (rho(0, 2) + rho(1, 3))), 1e-15);
}

TEST(Invariants, SpectatorDephasingDoesNotChangeCoherence) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 5; ++trial) {
    DeviceModel d = random_device(2, rng);
    for (auto& s : d.spectators) s.qubit.gamma_phi = 0.0;
    DeviceModel dephased = d;
    dephased.spectators[0].qubit.gamma_phi = 3e4;
    dephased.spectators[1].qubit.gamma_phi = 1e4;
    const SpectatorInit init = SpectatorInit::parse(trial % 2 ? "10" : "11");
    std::vector<double> times{0.0, 30e-6, 90e-6, 250e-6};
    const auto a = model::propagate(model::build_liouvillian(d), model::initial_state(d, init), times);
    const auto b = model::propagate(model::build_liouvillian(dephased), model::initial_state(d, init), times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      EXPECT_LT(std::abs(model::control_coherence(a[k]) - model::control_coherence(b[k])), 1e-10);
    }
  }
}

TEST(Invariants, FrozenSpectatorsKeepMagnitude) {
  DeviceModel d;
  d.spectators.push_back({QubitParams{}, nu_khz(47)});
  d.spectators.push_back({QubitParams{}, nu_khz(41)});
  std::vector<double> times{0.0, 13e-6, 170e-6, 480e-6};
  const auto states =
      model::propagate(model::build_liouvillian(d), model::initial_state(d, SpectatorInit::parse("10")), times);
  for (const auto& rho : states) EXPECT_NEAR(std::abs(model::control_coherence(rho)), 0.5, 1e-12);
}
