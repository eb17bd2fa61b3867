// sdid: command-line front end. Each subcommand loads an optional config,
// applies flag overrides and runs one experiment.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "sdid/config.hpp"
#include "sdid/experiments.hpp"

namespace {

using sdid::ExperimentConfig;
using sdid::ExperimentKind;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& s, const char* flag) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    T value{};
    try {
      if constexpr (std::is_integral_v<T>) {
        value = static_cast<T>(std::stoll(item, &used));
      } else {
        value = static_cast<T>(std::stod(item, &used));
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw sdid::ConfigError(flag, "cannot parse '" + item + "'");
    out.push_back(value);
  }
  return out;
}

// Flags shared by the run subcommands. Unset options leave the config alone.
struct Overrides {
  std::string config;
  std::optional<std::string> spectators, engines, orders, init, lengths, frame, nu_tauc, out;
  std::optional<double> tmax_us, tgate_ns, spam, tmax_factor;
  std::optional<int> points;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> ntraj, nseq, nshots;
  std::optional<std::string> fit_engine;
  bool two_qubit = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "experiment config (JSON)");
  app->add_option("--seed", o.seed, "RNG seed");
  app->add_option("--out", o.out, "output CSV path");
}

void add_time(CLI::App* app, Overrides& o) {
  app->add_option("--spectators", o.spectators, "spectator init bit strings, comma separated");
  app->add_option("--tmax-us", o.tmax_us, "final time in microseconds");
  app->add_option("--points", o.points, "number of time points");
  app->add_option("--engines", o.engines, "analytic,lindblad,trajectory");
  app->add_option("--ntraj", o.ntraj, "trajectories per point");
  app->add_option("--spam", o.spam, "SPAM factor applied to theory curves");
}

ExperimentConfig resolve(const Overrides& o, ExperimentKind kind) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : sdid::config::load(o.config);
  cfg.experiment = kind;
  if (o.spectators) cfg.spectator_inits = split_list(*o.spectators);
  if (o.tmax_us) cfg.tmax_us = *o.tmax_us;
  if (o.points) cfg.points = *o.points;
  if (o.engines) cfg.engines = split_list(*o.engines);
  if (o.seed) cfg.seed = *o.seed;
  if (o.ntraj) cfg.n_traj = *o.ntraj;
  if (o.spam) cfg.spam_factor = *o.spam;
  if (o.orders) cfg.cpmg_orders = parse_numbers<int>(*o.orders, "cpmg.orders");
  if (o.tmax_factor) cfg.cpmg_tmax_factor = *o.tmax_factor;
  if (o.fit_engine) cfg.cpmg_fit_engine = *o.fit_engine;
  if (o.init) {
    cfg.rb_inits.clear();
    for (const auto& name : split_list(*o.init)) {
      try {
        cfg.rb_inits.push_back(sdid::parse_prep(name));
      } catch (const std::invalid_argument& e) {
        throw sdid::ConfigError("rb.init", e.what());
      }
    }
  }
  if (o.lengths) cfg.rb.lengths = parse_numbers<int>(*o.lengths, "rb.lengths");
  if (o.nseq) cfg.rb.n_seq = *o.nseq;
  if (o.nshots) cfg.rb.n_shots = *o.nshots;
  if (o.tgate_ns) cfg.rb.t_gate = *o.tgate_ns * 1e-9;
  if (o.frame) {
    try {
      cfg.rb.frame = sdid::parse_frame(*o.frame);
    } catch (const std::invalid_argument& e) {
      throw sdid::ConfigError("rb.frame", e.what());
    }
  }
  if (o.nu_tauc) cfg.derive.nu_tau_c = parse_numbers<double>(*o.nu_tauc, "derive.nu_tauc");
  if (o.out) cfg.output = *o.out;
  sdid::config::validate(cfg);
  return cfg;
}

int run_experiment(const Overrides& o, ExperimentKind kind) {
  const ExperimentConfig cfg = resolve(o, kind);
  for (const auto& path : sdid::experiments::run(cfg, cfg.output)) {
    std::cerr << "wrote " << path.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectator-decay-induced dephasing simulator"};
  app.set_version_flag("--version", std::string(SDID_VERSION));
  app.require_subcommand(1);

  Overrides ramsey, cpmg, rb, derive;

  auto* r = app.add_subcommand("ramsey", "Ramsey decay of the control qubit");
  add_common(r, ramsey);
  add_time(r, ramsey);

  auto* c = app.add_subcommand("cpmg", "CPMG sweep and per-order T2 table");
  add_common(c, cpmg);
  add_time(c, cpmg);
  c->add_option("--orders", cpmg.orders, "CPMG orders, comma separated");
  c->add_option("--tmax-factor", cpmg.tmax_factor, "window length in units of the 1/e time");
  c->add_option("--fit-engine", cpmg.fit_engine, "engine whose curves are fitted");

  auto* b = app.add_subcommand("rb", "randomized benchmarking with a decaying spectator");
  add_common(b, rb);
  b->add_option("--init", rb.init, "spectator preparations: zero,one,plus");
  b->add_option("--lengths", rb.lengths, "sequence lengths, comma separated");
  b->add_option("--nseq", rb.nseq, "random sequences per length");
  b->add_option("--nshots", rb.nshots, "spectator shots per sequence");
  b->add_option("--tgate-ns", rb.tgate_ns, "Clifford duration in ns");
  b->add_option("--frame", rb.frame, "bare or experimental");

  auto* d = app.add_subcommand("derive", "two-qubit master-equation coefficients versus nu*tau_C");
  add_common(d, derive);
  d->add_flag("--two-qubit", derive.two_qubit, "two-qubit reduction (the only one available)");
  d->add_option("--nu-tauc", derive.nu_tauc, "nu*tau_C values, comma separated");

  std::string fit_in, fit_model = "exp", fit_engine, fit_spectators;
  std::optional<std::string> fit_out;
  auto* f = app.add_subcommand("fit", "fit a CSV written by another subcommand");
  f->add_option("--in", fit_in, "input CSV")->required();
  f->add_option("--model", fit_model, "exp or rb")->check(CLI::IsMember({"exp", "rb"}));
  f->add_option("--engine", fit_engine, "restrict to one engine");
  f->add_option("--spectators", fit_spectators, "restrict to one spectator string or RB init");
  f->add_option("--out", fit_out, "write the fit as JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (r->parsed()) return run_experiment(ramsey, ExperimentKind::kRamsey);
    if (c->parsed()) return run_experiment(cpmg, ExperimentKind::kCpmg);
    if (b->parsed()) return run_experiment(rb, ExperimentKind::kRb);
    if (d->parsed()) return run_experiment(derive, ExperimentKind::kDerive);
    if (f->parsed()) {
      const auto kind = fit_model == "rb" ? sdid::experiments::FitKind::kRb
                                          : sdid::experiments::FitKind::kExponential;
      const auto fit = sdid::experiments::fit_csv(fit_in, kind, fit_engine, fit_spectators);
      const std::string text = sdid::experiments::fit_to_json(fit);
      if (fit_out) {
        std::ofstream os(*fit_out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + *fit_out);
        os << text << '\n';
      } else {
        std::cout << text << '\n';
      }
      return fit.converged ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "sdid: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
