// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "devices.hpp"
#include "sdid/analytic.hpp"
#include "sdid/config.hpp"
#include "sdid/derivations.hpp"
#include "sdid/experiments.hpp"
#include "sdid/fitting.hpp"
#include "sdid/model.hpp"
#include "sdid/operators.hpp"
#include "sdid/rb.hpp"
#include "sdid/trajectory.hpp"

using namespace sdid;
using namespace sdid::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::vector<double> grid(double tmax, int points) { return experiments::time_grid(tmax, points); }

double max_complex_delta(const CoherenceTrace& a, const CoherenceTrace& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.scaled(k) - b.scaled(k)));
  return worst;
}

ExperimentConfig load(const char* name) { return config::load(fs::path(SDID_CONFIG_DIR) / name); }

Outcome engine_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  const DeviceModel d = one_spectator_device();
  const SpectatorInit init = SpectatorInit::parse("1");
  const auto times = grid(500e-6, 101);
  const CoherenceTrace a = analytic::coherence_trace(d, init, times);
  const CoherenceTrace l = experiments::lindblad_trace(d, init, times);
  const double delta = max_complex_delta(a, l);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {delta <= 1e-8 && secs < 1.0, "max|delta| = " + num(delta) + ", " + num(secs) + " s"};
}

Outcome trajectory_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const DeviceModel d = one_spectator_device();
  const SpectatorInit init = SpectatorInit::parse("1");
  const auto times = grid(500e-6, 101);
  const CoherenceTrace tr = trajectory::cpmg_trace(d, init, times, -1, EnsembleSpec{100000, 42});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double worst = 0.0;
  int outside = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double diff = std::abs(std::abs(tr.values[k]) - std::abs(analytic::coherence_nspec(d, init, times[k], 1.0)));
    worst = std::max(worst, diff);
    if (diff > 3.0 * tr.stderr_abs[k] + 1e-12) ++outside;
  }
  return {outside == 0 && worst <= 0.01 && secs < 10.0,
          "max|delta| = " + num(worst) + ", points beyond 3 SE: " + std::to_string(outside) + ", " + num(secs) + " s"};
}

Outcome additivity() {
  const DeviceModel d = three_spectator_device();
  const auto times = grid(500e-6, 101);
  double worst = 0.0;
  std::vector<double> t2;
  for (const char* bits : {"000", "100", "110", "111"}) {
    const SpectatorInit init = SpectatorInit::parse(bits);
    const CoherenceTrace a = analytic::coherence_trace(d, init, times);
    worst = std::max(worst, max_complex_delta(a, experiments::lindblad_trace(d, init, times)));
    t2.push_back(fit::fit_exponential(times, a.magnitudes()).t2());
  }
  bool decreasing = true;
  std::string fits;
  for (std::size_t k = 0; k < t2.size(); ++k) {
    if (k > 0 && !(t2[k] < t2[k - 1])) decreasing = false;
    fits += (k ? "/" : "") + num(t2[k] * 1e6);
  }
  return {worst <= 1e-8 && decreasing, "max|delta| = " + num(worst) + ", T2 = " + fits + " us"};
}

Outcome heuristic_limit() {
  DeviceModel fast = one_spectator_device();
  fast.spectators[0].nu = 100.0 * fast.spectators[0].qubit.gamma;
  const SpectatorInit init = SpectatorInit::parse("1");
  const double rate = 1.0 / 127e-6 + 1.0 / 107e-6;
  const auto times = grid(5.0 / rate, 201);
  std::vector<double> mags;
  for (double t : times) mags.push_back(std::abs(analytic::coherence_nspec(fast, init, t, 1.0)));
  const double rel = std::abs(fit::fit_exponential(times, mags).decay / rate - 1.0);

  const DeviceModel slow = one_spectator_device();
  int extrema = 0;
  std::vector<double> m;
  for (double t : grid(500e-6, 101)) m.push_back(std::abs(analytic::coherence_nspec(slow, init, t, 1.0)));
  for (std::size_t k = 1; k + 1 < m.size(); ++k) {
    if ((m[k] - m[k - 1]) * (m[k + 1] - m[k]) < 0.0) ++extrema;
  }
  return {rel <= 0.02 && extrema >= 1,
          "rate deviation = " + num(rel) + ", local extrema = " + std::to_string(extrema)};
}

Outcome cpmg_revival() {
  ExperimentConfig cfg = load("three_spectators.json");
  cfg.experiment = ExperimentKind::kCpmg;
  cfg.spectator_inits = {"111"};
  cfg.engines = {"analytic", "trajectory"};
  cfg.cpmg_fit_engine = "trajectory";
  cfg.cpmg_orders = {0, 1, 4, 16, 64, 160};
  cfg.n_traj = 100000;
  config::validate(cfg);
  const CpmgResult r = experiments::run_cpmg(cfg);

  double worst = 0.0;
  bool monotone = true, fitted = true;
  double previous = 0.0;
  std::string deltas, fits;
  for (const auto& o : r.orders) {
    worst = std::max(worst, o.max_delta_model_trajectory);
    deltas += (deltas.empty() ? "" : "/") + num(o.max_delta_model_trajectory);
    if (!o.fit) {
      fitted = false;
      fits += (fits.empty() ? "" : "/") + std::string("-");
      continue;
    }
    const double t2 = o.fit->t2();
    if (t2 < previous) monotone = false;
    previous = t2;
    fits += (fits.empty() ? "" : "/") + num(t2 * 1e6);
  }
  const bool a = worst <= 0.01;
  const bool c = fitted && std::abs(r.orders.back().fit->t2() / 241e-6 - 1.0) <= 0.1;
  const double t2_0 = fitted ? r.orders.front().fit->t2() * 1e6 : 0.0;
  const bool dd = fitted && t2_0 >= 25.0 && t2_0 <= 45.0;
  std::string parts = std::string("(a) ") + (a ? "pass" : "FAIL") + " (b) " + (monotone && fitted ? "pass" : "FAIL") +
                      " (c) " + (c ? "pass" : "FAIL") + " (d) " + (dd ? "pass" : "FAIL");
  return {a && monotone && fitted && c && dd,
          parts + "; model-trajectory max|delta| per order = " + deltas + "; T2 = " + fits + " us"};
}

Outcome rb_channels() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lnu(std::log(1e3), std::log(1e7)), lg(std::log(1e2), std::log(1e6)),
      lt(std::log(1e-8), std::log(1e-4));
  double lambda_err = 0.0, norm_err = 0.0, p_gap = 0.0;
  bool forbidden = true;
  for (int trial = 0; trial < 20; ++trial) {
    const double nu = std::exp(lnu(rng)), g = std::exp(lg(rng)), t = std::exp(lt(rng));
    const auto c00 = rb::conditional_channel(0, 0, nu, g, t);
    const auto c11 = rb::conditional_channel(1, 1, nu, g, t);
    const auto c10 = rb::conditional_channel(1, 0, nu, g, t);
    for (const auto* c : {&c00, &c11, &c10}) {
      lambda_err = std::max(lambda_err, std::abs(c->lambda() - rb::lambda_analytic(c->i, c->j, nu, g, t)));
      lambda_err = std::max(lambda_err, std::abs(c->superop(2, 2) - std::conj(c->lambda())));
      lambda_err = std::max({lambda_err, std::abs(c->superop(0, 0) - 1.0), std::abs(c->superop(3, 3) - 1.0)});
    }
    norm_err = std::max(norm_err, std::abs(c10.norm + c11.norm - 1.0));
    p_gap = std::max(p_gap, std::abs(rb::rb_decay_constant(c00) - rb::rb_decay_constant(c11)));
    try {
      rb::conditional_channel(0, 1, nu, g, t);
      forbidden = false;
    } catch (const ForbiddenTransition&) {
    }
  }
  return {lambda_err <= 1e-10 && norm_err <= 1e-10 && p_gap <= 1e-12 && forbidden,
          "max lambda error = " + num(lambda_err) + ", |N10+N11-1| = " + num(norm_err) + ", |p00-p11| = " +
              num(p_gap) + (forbidden ? ", 0->1 rejected" : ", 0->1 accepted")};
}

Outcome rb_insensitivity() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load("three_spectators.json");
  cfg.experiment = ExperimentKind::kRb;
  cfg.rb.frame = RbFrame::kExperimental;
  cfg.rb.lengths = {1, 10, 25, 50, 100, 200, 400};
  cfg.rb.n_seq = 30;
  cfg.rb.t_gate = 50e-9;
  cfg.rb_inits = {SpectatorPrep::kZero, SpectatorPrep::kOne, SpectatorPrep::kPlus};
  config::validate(cfg);
  const RbResult r = experiments::run_rb(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string epcs;
  bool fitted = true;
  for (const auto& [prep, curve] : r.curves) {
    if (!curve.fit) fitted = false;
    epcs += std::string(epcs.empty() ? "" : ", ") + to_string(prep) + " " + (curve.fit ? num(curve.fit->epc()) : "-");
  }
  return {fitted && r.epc_spread <= 1e-4 && secs < 60.0,
          "EPC " + epcs + "; spread = " + num(r.epc_spread) + ", " + num(secs) + " s"};
}

Outcome derivation_limits() {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  // rad/us units keep the generator entries O(1).
  const double w0 = kTwoPi * 5000.0, w1 = kTwoPi * 5100.0, nu = kTwoPi * 0.01125, g = 1.0 / 107.0;
  auto rel = [](const Superoperator& a, const Superoperator& b) {
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
  };
  const auto sys = derive::two_qubit_system(w0, w1, nu);
  const auto terms = derive::bohr_spectrum(sys.hamiltonian, sys.couplings[1]);
  const auto clusters = derive::cluster_bohr(terms, 8.0 * nu);
  const BathSpectrum bath = BathSpectrum::flat(g);

  double ref_err = 0.0;
  for (double x : {0.1, 1.0, 10.0}) {
    ref_err = std::max(ref_err, rel(derive::build_cetcg(clusters, bath, x / nu).superop,
                                    derive::two_qubit_cetcg_reference(nu, x / nu, g).superop));
  }
  const Superoperator short_tau = derive::build_cetcg(clusters, bath, 1e-6 / nu).superop;
  const Superoperator bmpsa = derive::build_bmpsa(clusters, bath).superop;
  const double psa = rel(short_tau, bmpsa);
  const double psa_fro = (short_tau - bmpsa).norm() / bmpsa.norm();
  const double rwa = rel(derive::build_cetcg(clusters, bath, 1e6 / nu).superop, derive::build_bmrwa(terms, bath).superop);

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> f(-50.0, 50.0), ltau(std::log(1e-4), std::log(1e3));
  std::uniform_int_distribution<int> size(1, 8);
  int not_psd = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Cluster c;
    const int m = size(rng);
    for (int k = 0; k < m; ++k) c.members.push_back({f(rng), ops::identity(2)});
    const RateMatrix r = derive::rate_matrix(c, std::exp(ltau(rng)), 1.0);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (r.gamma + r.gamma.adjoint()));
    if (es.eigenvalues().minCoeff() < -1e-10 * r.gamma.trace().real()) ++not_psd;
  }

  // Both couplings together: +-w0 +- 2nu, +-w1 +- 2nu.
  std::vector<double> got;
  for (const auto& x : sys.couplings)
    for (const auto& t : derive::bohr_spectrum(sys.hamiltonian, x)) got.push_back(t.frequency);
  std::sort(got.begin(), got.end());
  std::vector<double> want;
  for (double w : {w0, w1})
    for (double s : {1.0, -1.0})
      for (double dn : {2.0 * nu, -2.0 * nu}) want.push_back(s * w + dn);
  std::sort(want.begin(), want.end());
  bool spectrum = got.size() == want.size();
  for (std::size_t k = 0; spectrum && k < got.size(); ++k) spectrum = std::abs(got[k] - want[k]) <= 1e-9 * w1;

  return {ref_err <= 1e-10 && psa <= 1e-6 && rwa <= 1e-6 && not_psd == 0 && spectrum,
          "builder vs reference = " + num(ref_err) + ", short tau vs PSA = " + num(psa) + " (Frobenius " + num(psa_fro) + "), long tau vs RWA = " +
              num(rwa) + ", non-PSD rate matrices = " + std::to_string(not_psd) + ", Bohr frequencies " +
              std::to_string(got.size()) + (spectrum ? " match" : " mismatch")};
}

Outcome physicality() {
  double trace = 0.0, choi = 0.0;
  auto check = [&](const Superoperator& l) {
    trace = std::max(trace, ops::trace_defect(l));
    const double scale = l.cwiseAbs().maxCoeff();
    if (scale > 0.0) choi = std::min(choi, ops::choi_min_eigenvalue(ops::expm(l * (1e-3 / scale))));
  };
  check(model::build_liouvillian(one_spectator_device()).superop);
  check(model::build_liouvillian(three_spectator_device()).superop);
  DeviceModel cpmg = analytic::cpmg_effective(three_spectator_device(), 16);
  check(model::build_liouvillian(cpmg).superop);

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double w0 = kTwoPi * 5000.0, w1 = kTwoPi * 5100.0, nu = kTwoPi * 0.01125, g = 1.0 / 107.0;
  const auto sys = derive::two_qubit_system(w0, w1, nu);
  const auto terms = derive::bohr_spectrum(sys.hamiltonian, sys.couplings[1]);
  const auto clusters = derive::cluster_bohr(terms, 8.0 * nu);
  for (const BathSpectrum& bath : {BathSpectrum::flat(g), BathSpectrum::ohmic(0.001, 1e5)}) {
    check(derive::build_bmrwa(terms, bath).superop);
    check(derive::build_bmpsa(clusters, bath).superop);
    for (double x : {1e-3, 0.1, 1.0, 10.0, 1e3}) check(derive::build_cetcg(clusters, bath, x / nu).superop);
  }
  for (double x : {0.1, 1.0, 10.0}) check(derive::two_qubit_cetcg_reference(nu, x / nu, g).superop);

  // Spectators in |+>: their dephasing must not touch the control coherence.
  const DeviceModel d = three_spectator_device();
  DeviceModel no_dephasing = d;
  for (auto& s : no_dephasing.spectators) s.qubit.gamma_phi = 0.0;
  const ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  ComplexMatrix rho0 = plus;
  for (std::size_t j = 0; j < d.spectator_count(); ++j) rho0 = ops::kron(rho0, plus);
  const auto times = grid(300e-6, 7);
  const auto with = model::propagate(model::build_liouvillian(d), rho0, times);
  const auto without = model::propagate(model::build_liouvillian(no_dephasing), rho0, times);
  double invariance = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    invariance =
        std::max(invariance, std::abs(model::control_coherence(with[k]) - model::control_coherence(without[k])));
  }
  return {trace <= 1e-12 && choi >= -1e-9 && invariance <= 1e-10,
          "max trace defect = " + num(trace) + ", min Choi eigenvalue = " + num(choi) +
              ", dephasing invariance = " + num(invariance)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "sdid_acceptance";
  fs::create_directories(dir);
  const std::string cli = SDID_CLI;
  const std::string one = (fs::path(SDID_CONFIG_DIR) / "one_spectator.json").string();
  const std::string three = (fs::path(SDID_CONFIG_DIR) / "three_spectators.json").string();
  const std::vector<std::pair<std::string, std::string>> runs{
      {"ramsey", "ramsey --config " + one + " --ntraj 20000 --seed 7"},
      {"cpmg", "cpmg --config " + three + " --spectators 111 --orders 0,4 --engines analytic,trajectory --ntraj 5000"},
      {"rb", "rb --config " + three + " --init plus --lengths 1,10,50 --nseq 5 --nshots 10"},
      {"derive", "derive --two-qubit --nu-tauc 0.001,1,1000"},
  };
  int identical = 0;
  std::string failures;
  for (const auto& [name, args] : runs) {
    bool same = true;
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / (name + std::to_string(rep) + ".csv");
      fs::remove(out);
      const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + out.string() + "\" 2>/dev/null";
      if (std::system(cmd.c_str()) != 0 || !fs::exists(out)) {
        same = false;
        break;
      }
      const std::string text = slurp(out);
      if (rep == 0) first = text;
      else same = same && text == first && !text.empty();
    }
    if (same) ++identical;
    else failures += " " + name;
  }
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " subcommands byte-identical" +
              (failures.empty() ? "" : "; differing:" + failures)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"engine agreement", engine_agreement},
      {"trajectory oracle", trajectory_oracle},
      {"multi-spectator additivity", additivity},
      {"heuristic-rate limit and oscillations", heuristic_limit},
      {"CPMG revival", cpmg_revival},
      {"RB channel theory", rb_channels},
      {"RB insensitivity to spectator preparation", rb_insensitivity},
      {"master-equation limits", derivation_limits},
      {"physicality", physicality},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first << " -- "
              << o.detail << " [" << num(secs) << " s]" << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
