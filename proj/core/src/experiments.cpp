#include "sdid/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sdid/model.hpp"
#include "sdid/trajectory.hpp"

#ifndef SDID_VERSION
#define SDID_VERSION "unknown"
#endif

namespace sdid::experiments {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

EngineTrace make_trace(std::string engine, std::string spectators, int order, CoherenceTrace trace,
                       double spam) {
  EngineTrace out{std::move(engine), std::move(spectators), order, std::move(trace), std::nullopt, ""};
  out.trace.spam_rescale(spam);
  try {
    out.fit = fit::fit_exponential(out.trace.times, out.trace.magnitudes());
  } catch (const std::exception& e) {
    out.fit_error = e.what();
  }
  return out;
}

CoherenceTrace engine_trace(const std::string& engine, const ExperimentConfig& cfg,
                            const SpectatorInit& init, std::span<const double> times, int order) {
  if (engine == "analytic") {
    const DeviceModel dev = order < 0 ? cfg.device : analytic::cpmg_effective(cfg.device, order);
    return analytic::coherence_trace(dev, init, times);
  }
  if (engine == "lindblad") return lindblad_trace(cfg.device, init, times, order);
  if (engine == "trajectory") {
    return trajectory::cpmg_trace(cfg.device, init, times, order, EnsembleSpec{cfg.n_traj, cfg.seed});
  }
  throw std::invalid_argument("unknown engine '" + engine + "'");
}

double max_abs_delta(const CoherenceTrace& a, const CoherenceTrace& b, bool magnitude) {
  if (a.size() != b.size()) throw std::logic_error("traces on different grids");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = magnitude ? std::abs(std::abs(a.scaled(k)) - std::abs(b.scaled(k)))
                               : std::abs(a.scaled(k) - b.scaled(k));
    worst = std::max(worst, d);
  }
  return worst;
}

std::string csv_header(bool with_order) {
  return with_order ? "time_us,coh_re,coh_im,coh_abs,engine,stderr_abs,spectators,order\n"
                    : "time_us,coh_re,coh_im,coh_abs,engine,stderr_abs,spectators\n";
}

void append_rows(std::ostringstream& os, const EngineTrace& t, bool with_order) {
  const CoherenceTrace& tr = t.trace;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const Complex v = tr.scaled(k);
    os << fmt(tr.times[k] * 1e6) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << ','
       << fmt(std::abs(v)) << ',' << t.engine << ',';
    if (!tr.stderr_abs.empty()) os << fmt(tr.stderr_abs[k] * std::abs(tr.scale));
    os << ',' << t.spectators;
    if (with_order) os << ',' << t.order;
    os << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

json fit_json(const std::optional<FitResult>& fit, const std::string& error) {
  if (!fit) return json{{"error", error}};
  return json::parse(fit_to_json(*fit));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<double> time_grid(double tmax, int points) {
  if (!(tmax > 0.0)) throw std::invalid_argument("time grid: tmax must be positive");
  if (points < 2) throw std::invalid_argument("time grid: need at least 2 points");
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) t[static_cast<std::size_t>(k)] = tmax * k / (points - 1);
  return t;
}

CoherenceTrace lindblad_trace(const DeviceModel& device, const SpectatorInit& init,
                              std::span<const double> times, int order) {
  const LiouvillianBundle bundle = model::build_liouvillian(device);
  const ComplexMatrix rho0 = model::initial_state(device, init);
  CoherenceTrace trace;
  trace.times.assign(times.begin(), times.end());
  if (order < 0) {
    for (const auto& rho : model::propagate(bundle, rho0, times)) {
      trace.values.push_back(model::control_coherence(rho));
    }
  } else {
    const bool odd = (order + 1) % 2 == 1;
    for (double t : times) {
      if (t <= 0.0) {
        trace.values.push_back(model::control_coherence(rho0));
        continue;
      }
      const double window[] = {t};
      const auto rho = model::propagate(bundle, rho0, window, trajectory::build_cpmg(t, order));
      const Complex v = model::control_coherence(rho.front());
      trace.values.push_back(odd ? std::conj(v) : v);
    }
  }
  trace.scale = 2.0;  // |+> control
  return trace;
}

double cpmg_one_over_e_time(const DeviceModel& device, const SpectatorInit& init, int order) {
  const DeviceModel dev = analytic::cpmg_effective(device, order);
  const double rate = analytic::heuristic_rate(device, init);
  if (!(rate > 0.0)) throw std::domain_error("coherence does not decay; no 1/e time");
  auto mag = [&](double t) { return std::abs(analytic::coherence_nspec(dev, init, t, 1.0)); };
  const double target = std::exp(-1.0);
  const double step = 0.01 / rate;
  const double limit = 1e4 / rate;
  double lo = 0.0;
  while (mag(lo + step) > target) {
    lo += step;
    if (lo > limit) throw std::domain_error("1/e time not found");
  }
  double hi = lo + step;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mag(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RamseyResult run_ramsey(const ExperimentConfig& cfg) {
  const std::vector<double> times = time_grid(cfg.tmax_us * 1e-6, cfg.points);
  RamseyResult out;
  for (const auto& bits : cfg.spectator_inits) {
    const SpectatorInit init = SpectatorInit::parse(bits);
    std::size_t first = out.traces.size();
    for (const auto& engine : cfg.engines) {
      out.traces.push_back(make_trace(engine, bits, -1, engine_trace(engine, cfg, init, times, -1), cfg.spam_factor));
    }
    const EngineTrace* a = nullptr;
    const EngineTrace* l = nullptr;
    for (std::size_t k = first; k < out.traces.size(); ++k) {
      if (out.traces[k].engine == "analytic") a = &out.traces[k];
      if (out.traces[k].engine == "lindblad") l = &out.traces[k];
    }
    if (a && l) {
      out.max_delta_analytic_lindblad =
          std::max(out.max_delta_analytic_lindblad, max_abs_delta(a->trace, l->trace, false));
    }
  }
  return out;
}

CpmgResult run_cpmg(const ExperimentConfig& cfg) {
  CpmgResult out;
  out.spectators = cfg.spectator_inits.front();
  const SpectatorInit init = SpectatorInit::parse(out.spectators);
  std::vector<std::string> engines = cfg.engines;
  if (std::find(engines.begin(), engines.end(), cfg.cpmg_fit_engine) == engines.end()) {
    engines.push_back(cfg.cpmg_fit_engine);
  }
  for (int order : cfg.cpmg_orders) {
    CpmgOrderResult r;
    r.order = order;
    const double tmax = cfg.cpmg_tmax_factor * cpmg_one_over_e_time(cfg.device, init, order);
    r.tmax_us = tmax * 1e6;
    const std::vector<double> times = time_grid(tmax, cfg.points);
    for (const auto& engine : engines) {
      r.traces.push_back(
          make_trace(engine, out.spectators, order, engine_trace(engine, cfg, init, times, order), cfg.spam_factor));
    }
    const EngineTrace* model = nullptr;
    const EngineTrace* traj = nullptr;
    for (const auto& t : r.traces) {
      if (t.engine == cfg.cpmg_fit_engine) {
        r.fit = t.fit;
        r.fit_error = t.fit_error;
      }
      if (t.engine == "analytic") model = &t;
      if (t.engine == "trajectory") traj = &t;
    }
    if (model && traj) r.max_delta_model_trajectory = max_abs_delta(model->trace, traj->trace, true);
    out.orders.push_back(std::move(r));
  }
  return out;
}

RbResult run_rb(const ExperimentConfig& cfg) {
  RbResult out;
  double lo = 1.0, hi = 0.0;
  for (SpectatorPrep prep : cfg.rb_inits) {
    RBCurve curve = rb::simulate_rb(cfg.device, prep, cfg.rb);
    try {
      curve.fit = fit::fit_rb(curve.lengths, curve.survival);
      lo = std::min(lo, curve.fit->epc());
      hi = std::max(hi, curve.fit->epc());
    } catch (const std::exception&) {
      curve.fit.reset();
    }
    out.curves.emplace_back(prep, std::move(curve));
  }
  out.epc_spread = hi >= lo ? hi - lo : 0.0;
  return out;
}

DeriveResult run_derive(const ExperimentConfig& cfg) {
  DeriveResult out;
  if (cfg.device_entry) {
    if (cfg.device.spectators.empty()) throw std::invalid_argument("derive: device needs a spectator");
    out.nu = cfg.device.spectators.front().nu;
    out.gamma = cfg.device.spectators.front().qubit.gamma;
  } else {
    out.nu = config::nu_from_khz(cfg.derive.zz_4nu_khz);
    out.gamma = 1.0 / (cfg.derive.t1_us * 1e-6);
  }
  if (out.nu == 0.0) throw std::invalid_argument("derive: nu must be nonzero to sweep nu*tau_C");
  if (!(out.gamma > 0.0)) throw std::invalid_argument("derive: spectator needs a finite T1");

  constexpr double kGhz = 2.0 * std::numbers::pi * 1e9;
  const LogicalSystem sys =
      derive::two_qubit_system(kGhz * cfg.derive.omega0_ghz, kGhz * cfg.derive.omega1_ghz, out.nu);
  const auto clusters =
      derive::cluster_bohr(derive::bohr_spectrum(sys.hamiltonian, sys.couplings[1]), 8.0 * std::abs(out.nu));
  const BathSpectrum bath = BathSpectrum::flat(out.gamma);

  for (double x : cfg.derive.nu_tau_c) {
    const double tau = x / std::abs(out.nu);
    const LiouvillianBundle built = derive::build_cetcg(clusters, bath, tau);
    const LiouvillianBundle ref = derive::two_qubit_cetcg_reference(out.nu, tau, out.gamma);
    DeriveRow row;
    row.nu_tau_c = x;
    row.builder = derive::ceme1_coefficients(built.superop, out.gamma);
    row.reference = derive::ceme1_closed_form(out.nu * tau);
    row.max_rel_diff = (built.superop - ref.superop).cwiseAbs().maxCoeff() / ref.superop.cwiseAbs().maxCoeff();
    out.rows.push_back(row);
  }
  return out;
}

std::string fit_to_json(const FitResult& fit) {
  json j{{"model", fit.tag()},
         {"amplitude", fit.amplitude},
         {"decay", fit.decay},
         {"offset", fit.offset},
         {"stderr", fit.stderr_params},
         {"residual_norm", fit.residual_norm},
         {"evaluations", fit.evaluations},
         {"converged", fit.converged},
         {"status", fit.status}};
  if (fit.model == FitModel::kExponential) {
    j["t2_us"] = fit.t2() * 1e6;
    j["t2_stderr_us"] = fit.t2_stderr() * 1e6;
  } else {
    j["p"] = fit.p();
    j["epc"] = fit.epc();
    j["epc_stderr"] = fit.epc_stderr();
  }
  return j.dump();
}

std::vector<std::filesystem::path> run(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  if (out.empty()) throw std::invalid_argument("no output path given");
  json side{{"version", SDID_VERSION},
            {"experiment", to_string(cfg.experiment)},
            {"seed", cfg.seed},
            {"config", json::parse(config::to_json(cfg))}};
  std::vector<std::filesystem::path> written;
  std::ostringstream csv;

  switch (cfg.experiment) {
    case ExperimentKind::kRamsey: {
      const RamseyResult r = run_ramsey(cfg);
      csv << csv_header(false);
      json curves = json::array();
      for (const auto& t : r.traces) {
        append_rows(csv, t, false);
        curves.push_back({{"engine", t.engine}, {"spectators", t.spectators}, {"fit", fit_json(t.fit, t.fit_error)}});
      }
      side["curves"] = curves;
      side["fit_target"] = "magnitude";
      if (r.max_delta_analytic_lindblad >= 0.0) {
        side["max_delta_analytic_lindblad"] = r.max_delta_analytic_lindblad;
      }
      break;
    }
    case ExperimentKind::kCpmg: {
      const CpmgResult r = run_cpmg(cfg);
      csv << csv_header(true);
      std::ostringstream table;
      table << "order,tmax_us,t2_us,t2_stderr_us,engine,status,max_delta_model_trajectory\n";
      json rows = json::array();
      for (const auto& o : r.orders) {
        for (const auto& t : o.traces) append_rows(csv, t, true);
        table << o.order << ',' << fmt(o.tmax_us) << ',';
        if (o.fit) {
          table << fmt(o.fit->t2() * 1e6) << ',' << fmt(o.fit->t2_stderr() * 1e6);
        } else {
          table << ',';
        }
        table << ',' << cfg.cpmg_fit_engine << ',' << (o.fit ? o.fit->status : "fit-failed") << ',';
        if (o.max_delta_model_trajectory >= 0.0) table << fmt(o.max_delta_model_trajectory);
        table << '\n';
        json row{{"order", o.order}, {"tmax_us", o.tmax_us}, {"fit", fit_json(o.fit, o.fit_error)}};
        if (o.max_delta_model_trajectory >= 0.0) row["max_delta_model_trajectory"] = o.max_delta_model_trajectory;
        rows.push_back(row);
      }
      std::filesystem::path t2_path = out;
      t2_path.replace_filename(out.stem().string() + "_t2" + out.extension().string());
      write_file(t2_path, table.str());
      written.push_back(t2_path);
      side["spectators"] = r.spectators;
      side["t2_table"] = rows;
      side["fit_target"] = "magnitude";
      side["fit_engine"] = cfg.cpmg_fit_engine;
      side["tmax_rule"] = "tmax = tmax_factor * (first 1/e crossing of the nu/(n+1) closed-form magnitude)";
      break;
    }
    case ExperimentKind::kRb: {
      const RbResult r = run_rb(cfg);
      csv << "length,survival,stderr,init\n";
      json curves = json::array();
      for (const auto& [prep, curve] : r.curves) {
        for (std::size_t k = 0; k < curve.lengths.size(); ++k) {
          csv << curve.lengths[k] << ',' << fmt(curve.survival[k]) << ',' << fmt(curve.stderr_survival[k]) << ','
              << to_string(prep) << '\n';
        }
        curves.push_back({{"init", to_string(prep)}, {"fit", fit_json(curve.fit, "fit failed")}});
      }
      side["curves"] = curves;
      side["epc_spread"] = r.epc_spread;
      break;
    }
    case ExperimentKind::kDerive: {
      const DeriveResult r = run_derive(cfg);
      csv << "nu_tauc,uncorrelated,correlated,cross,ref_uncorrelated,ref_correlated,ref_cross,"
             "max_rel_diff\n";
      for (const auto& row : r.rows) {
        csv << fmt(row.nu_tau_c) << ',' << fmt(row.builder.uncorrelated) << ',' << fmt(row.builder.correlated)
            << ',' << fmt(row.builder.cross) << ',' << fmt(row.reference.uncorrelated) << ','
            << fmt(row.reference.correlated) << ',' << fmt(row.reference.cross) << ',' << fmt(row.max_rel_diff)
            << '\n';
      }
      side["nu_rad_s"] = r.nu;
      side["gamma_per_s"] = r.gamma;
      side["coefficients_in_units_of"] = "gamma";
      break;
    }
  }

  write_file(out, csv.str());
  written.insert(written.begin(), out);
  std::filesystem::path side_path = out;
  side_path += ".json";
  write_file(side_path, side.dump(2) + "\n");
  written.push_back(side_path);
  return written;
}

FitResult fit_csv(const std::filesystem::path& csv, FitKind kind, const std::string& engine,
                  const std::string& spectators) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open '" + csv.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + csv.string() + "' is empty");
  const std::vector<std::string> header = split(line);
  auto column = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int cx = column(kind == FitKind::kExponential ? "time_us" : "length");
  const int cy = column(kind == FitKind::kExponential ? "coh_abs" : "survival");
  if (cx < 0 || cy < 0) {
    throw std::runtime_error(kind == FitKind::kExponential ? "CSV needs time_us and coh_abs columns"
                                                           : "CSV needs length and survival columns");
  }
  const int ce = column("engine");
  const int cs = column(kind == FitKind::kExponential ? "spectators" : "init");

  std::vector<double> x, y;
  std::vector<int> lengths;
  std::set<std::string> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) <= std::max(cx, cy)) throw std::runtime_error("short CSV row: " + line);
    if (!engine.empty() && ce >= 0 && cells[static_cast<std::size_t>(ce)] != engine) continue;
    if (!spectators.empty() && cs >= 0 && cells[static_cast<std::size_t>(cs)] != spectators) continue;
    curves.insert((ce >= 0 ? cells[static_cast<std::size_t>(ce)] : "") + "/" +
                  (cs >= 0 && static_cast<int>(cells.size()) > cs ? cells[static_cast<std::size_t>(cs)] : ""));
    const double xv = std::stod(cells[static_cast<std::size_t>(cx)]);
    y.push_back(std::stod(cells[static_cast<std::size_t>(cy)]));
    if (kind == FitKind::kExponential) {
      x.push_back(xv * 1e-6);
    } else {
      lengths.push_back(static_cast<int>(std::lround(xv)));
    }
  }
  if (y.empty()) throw std::runtime_error("no rows matched in '" + csv.string() + "'");
  if (curves.size() > 1) {
    throw std::runtime_error("CSV holds " + std::to_string(curves.size()) +
                             " curves; select one by engine and spectators");
  }
  return kind == FitKind::kExponential ? fit::fit_exponential(x, y) : fit::fit_rb(lengths, y);
}

}  // namespace sdid::experiments
