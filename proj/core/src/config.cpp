#include "sdid/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sdid {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kRamsey: return "ramsey";
    case ExperimentKind::kCpmg: return "cpmg";
    case ExperimentKind::kRb: return "rb";
    case ExperimentKind::kDerive: return "derive";
  }
  return "?";
}

ExperimentKind parse_experiment(const std::string& name) {
  if (name == "ramsey") return ExperimentKind::kRamsey;
  if (name == "cpmg") return ExperimentKind::kCpmg;
  if (name == "rb") return ExperimentKind::kRb;
  if (name == "derive") return ExperimentKind::kDerive;
  throw ConfigError("experiment", "unknown experiment '" + name + "' (expected ramsey, cpmg, rb or derive)");
}

namespace config {

namespace {

const std::set<std::string> kEngines{"analytic", "lindblad", "trajectory"};

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double positive(const json& v, const std::string& field) {
  const double x = number(v, field);
  if (!(x > 0.0)) throw ConfigError(field, "must be positive (got " + v.dump() + ")");
  return x;
}

std::int64_t integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "must be an integer");
  return v.get<std::int64_t>();
}

std::string string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "must be a string");
  return v.get<std::string>();
}

std::vector<std::string> strings(const json& v, const std::string& field) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ConfigError(field, "must be a string or an array of strings");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(string(v[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

QubitEntry parse_qubit(const json& obj, const std::string& path, bool spectator) {
  if (spectator) {
    check_keys(obj, path, {"label", "t1_us", "t2_us", "zz_4nu_khz"});
  } else {
    check_keys(obj, path, {"label", "t1_us", "t2_us"});
  }
  QubitEntry q;
  if (obj.contains("label")) q.label = string(obj["label"], join(path, "label"));
  if (obj.contains("t1_us")) q.t1_us = positive(obj["t1_us"], join(path, "t1_us"));
  if (obj.contains("t2_us")) q.t2_us = positive(obj["t2_us"], join(path, "t2_us"));
  if (spectator) {
    if (!obj.contains("zz_4nu_khz")) throw ConfigError(join(path, "zz_4nu_khz"), "required");
    q.zz_4nu_khz = number(obj["zz_4nu_khz"], join(path, "zz_4nu_khz"));
  }
  return q;
}

json qubit_json(const QubitEntry& q, bool spectator) {
  json j = json::object();
  if (!q.label.empty()) j["label"] = q.label;
  if (q.t1_us) j["t1_us"] = *q.t1_us;
  if (q.t2_us) j["t2_us"] = *q.t2_us;
  if (spectator) j["zz_4nu_khz"] = q.zz_4nu_khz;
  return j;
}

QubitParams qubit_params(const QubitEntry& q, const std::string& path) {
  const double t1 = q.t1_us ? *q.t1_us * 1e-6 : 0.0;
  const double t2 = q.t2_us ? *q.t2_us * 1e-6 : 0.0;
  if (q.t1_us && q.t2_us && *q.t2_us > 2.0 * *q.t1_us * (1.0 + 1e-12)) {
    throw ConfigError(join(path, "t2_us"), "T2 exceeds 2*T1 (t2_us = " + std::to_string(*q.t2_us) +
                                               ", t1_us = " + std::to_string(*q.t1_us) + ")");
  }
  return QubitParams::from_times(q.label.empty() ? path : q.label, t1, t2);
}

}  // namespace

double nu_from_khz(double zz_4nu_khz) {
  return 2.0 * std::numbers::pi * 1e3 * zz_4nu_khz / 4.0;
}

DeviceModel build_device(const DeviceEntry& entry) {
  DeviceModel device;
  device.control = qubit_params(entry.control, "device.control");
  for (std::size_t j = 0; j < entry.spectators.size(); ++j) {
    const std::string path = "device.spectators[" + std::to_string(j) + "]";
    device.spectators.push_back(
        Spectator{qubit_params(entry.spectators[j], path), nu_from_khz(entry.spectators[j].zz_4nu_khz)});
  }
  if (device.qubit_count() > kMaxQubits) {
    throw ConfigError("device.spectators", "at most " + std::to_string(kMaxQubits - 1) + " spectators supported");
  }
  return device;
}

void validate(ExperimentConfig& cfg) {
  if (cfg.version != "v1") throw ConfigError("version", "unsupported schema version '" + cfg.version + "'");
  if (cfg.device_entry) {
    cfg.device = build_device(*cfg.device_entry);
  } else if (cfg.experiment != ExperimentKind::kDerive) {
    throw ConfigError("device", std::string("required for experiment '") + to_string(cfg.experiment) + "'");
  }
  const std::size_t n = cfg.device.spectator_count();
  if (cfg.spectator_inits.empty()) cfg.spectator_inits.push_back(std::string(n, '1'));
  for (std::size_t k = 0; k < cfg.spectator_inits.size(); ++k) {
    const std::string field = "spectator_init[" + std::to_string(k) + "]";
    try {
      (void)SpectatorInit::parse(cfg.spectator_inits[k]);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field, e.what());
    }
    if (cfg.experiment != ExperimentKind::kDerive && cfg.spectator_inits[k].size() != n) {
      throw ConfigError(field, "has " + std::to_string(cfg.spectator_inits[k].size()) +
                                   " bits but the device has " + std::to_string(n) + " spectators");
    }
  }
  if (!(cfg.tmax_us > 0.0)) throw ConfigError("time.tmax_us", "must be positive");
  if (cfg.points < 2) throw ConfigError("time.points", "must be >= 2");
  if (cfg.engines.empty()) throw ConfigError("engines", "at least one engine required");
  for (std::size_t k = 0; k < cfg.engines.size(); ++k) {
    if (!kEngines.count(cfg.engines[k])) {
      throw ConfigError("engines[" + std::to_string(k) + "]",
                        "unknown engine '" + cfg.engines[k] + "' (expected analytic, lindblad or trajectory)");
    }
  }
  if (cfg.cpmg_orders.empty()) throw ConfigError("cpmg.orders", "at least one order required");
  for (int order : cfg.cpmg_orders) {
    if (order < 0) throw ConfigError("cpmg.orders", "orders must be >= 0");
  }
  if (!(cfg.cpmg_tmax_factor > 0.0)) throw ConfigError("cpmg.tmax_factor", "must be positive");
  if (!kEngines.count(cfg.cpmg_fit_engine)) {
    throw ConfigError("cpmg.fit_engine", "unknown engine '" + cfg.cpmg_fit_engine + "'");
  }
  if (cfg.rb.lengths.empty()) throw ConfigError("rb.lengths", "at least one length required");
  for (int m : cfg.rb.lengths) {
    if (m < 1) throw ConfigError("rb.lengths", "lengths must be >= 1");
  }
  if (cfg.rb.n_seq == 0) throw ConfigError("rb.n_seq", "must be >= 1");
  if (cfg.rb.n_shots == 0) throw ConfigError("rb.n_shots", "must be >= 1");
  if (!(cfg.rb.t_gate > 0.0)) throw ConfigError("rb.t_gate_ns", "must be positive");
  if (cfg.rb_inits.empty()) throw ConfigError("rb.init", "at least one preparation required");
  cfg.rb.seed = cfg.seed;
  if (cfg.derive.nu_tau_c.empty()) throw ConfigError("derive.nu_tauc", "at least one value required");
  for (double x : cfg.derive.nu_tau_c) {
    if (!(x > 0.0)) throw ConfigError("derive.nu_tauc", "values must be positive");
  }
  if (!(cfg.derive.t1_us > 0.0)) throw ConfigError("derive.t1_us", "must be positive");
  if (cfg.n_traj == 0) throw ConfigError("n_traj", "must be >= 1");
  if (!(cfg.spam_factor > 0.0)) throw ConfigError("spam_factor", "must be positive");
}

ExperimentConfig parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "", {"version", "experiment", "device", "spectator_init", "time", "engines", "cpmg",
                        "rb", "derive", "seed", "n_traj", "spam_factor", "output"});

  ExperimentConfig cfg;
  if (!root.contains("version")) throw ConfigError("version", "required (use \"v1\")");
  cfg.version = string(root["version"], "version");
  if (root.contains("experiment")) cfg.experiment = parse_experiment(string(root["experiment"], "experiment"));

  if (root.contains("device")) {
    const json& dev = root["device"];
    check_keys(dev, "device", {"control", "spectators"});
    if (!dev.contains("control")) throw ConfigError("device.control", "required");
    DeviceEntry entry;
    entry.control = parse_qubit(dev["control"], "device.control", false);
    if (dev.contains("spectators")) {
      const json& specs = dev["spectators"];
      if (!specs.is_array()) throw ConfigError("device.spectators", "must be an array");
      for (std::size_t j = 0; j < specs.size(); ++j) {
        entry.spectators.push_back(
            parse_qubit(specs[j], "device.spectators[" + std::to_string(j) + "]", true));
      }
    }
    cfg.device_entry = std::move(entry);
  }

  if (root.contains("spectator_init")) cfg.spectator_inits = strings(root["spectator_init"], "spectator_init");

  if (root.contains("time")) {
    const json& t = root["time"];
    check_keys(t, "time", {"tmax_us", "points"});
    if (t.contains("tmax_us")) cfg.tmax_us = positive(t["tmax_us"], "time.tmax_us");
    if (t.contains("points")) cfg.points = static_cast<int>(integer(t["points"], "time.points"));
  }
  if (root.contains("engines")) cfg.engines = strings(root["engines"], "engines");

  if (root.contains("cpmg")) {
    const json& c = root["cpmg"];
    check_keys(c, "cpmg", {"orders", "tmax_factor", "fit_engine"});
    if (c.contains("orders")) {
      if (!c["orders"].is_array()) throw ConfigError("cpmg.orders", "must be an array");
      cfg.cpmg_orders.clear();
      for (const auto& o : c["orders"]) cfg.cpmg_orders.push_back(static_cast<int>(integer(o, "cpmg.orders")));
    }
    if (c.contains("tmax_factor")) cfg.cpmg_tmax_factor = positive(c["tmax_factor"], "cpmg.tmax_factor");
    if (c.contains("fit_engine")) cfg.cpmg_fit_engine = string(c["fit_engine"], "cpmg.fit_engine");
  }

  if (root.contains("rb")) {
    const json& r = root["rb"];
    check_keys(r, "rb", {"init", "lengths", "n_seq", "n_shots", "t_gate_ns", "frame"});
    if (r.contains("init")) {
      cfg.rb_inits.clear();
      for (const auto& name : strings(r["init"], "rb.init")) {
        try {
          cfg.rb_inits.push_back(parse_prep(name));
        } catch (const std::invalid_argument& e) {
          throw ConfigError("rb.init", e.what());
        }
      }
    }
    if (r.contains("lengths")) {
      if (!r["lengths"].is_array()) throw ConfigError("rb.lengths", "must be an array");
      cfg.rb.lengths.clear();
      for (const auto& m : r["lengths"]) cfg.rb.lengths.push_back(static_cast<int>(integer(m, "rb.lengths")));
    }
    if (r.contains("n_seq")) {
      const auto v = integer(r["n_seq"], "rb.n_seq");
      if (v < 1) throw ConfigError("rb.n_seq", "must be >= 1");
      cfg.rb.n_seq = static_cast<std::size_t>(v);
    }
    if (r.contains("n_shots")) {
      const auto v = integer(r["n_shots"], "rb.n_shots");
      if (v < 1) throw ConfigError("rb.n_shots", "must be >= 1");
      cfg.rb.n_shots = static_cast<std::size_t>(v);
    }
    if (r.contains("t_gate_ns")) cfg.rb.t_gate = positive(r["t_gate_ns"], "rb.t_gate_ns") * 1e-9;
    if (r.contains("frame")) {
      try {
        cfg.rb.frame = parse_frame(string(r["frame"], "rb.frame"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("rb.frame", e.what());
      }
    }
  }

  if (root.contains("derive")) {
    const json& d = root["derive"];
    check_keys(d, "derive", {"nu_tauc", "omega0_ghz", "omega1_ghz", "zz_4nu_khz", "t1_us"});
    if (d.contains("nu_tauc")) {
      if (!d["nu_tauc"].is_array()) throw ConfigError("derive.nu_tauc", "must be an array");
      cfg.derive.nu_tau_c.clear();
      for (const auto& x : d["nu_tauc"]) cfg.derive.nu_tau_c.push_back(positive(x, "derive.nu_tauc"));
    }
    if (d.contains("omega0_ghz")) cfg.derive.omega0_ghz = positive(d["omega0_ghz"], "derive.omega0_ghz");
    if (d.contains("omega1_ghz")) cfg.derive.omega1_ghz = positive(d["omega1_ghz"], "derive.omega1_ghz");
    if (d.contains("zz_4nu_khz")) cfg.derive.zz_4nu_khz = number(d["zz_4nu_khz"], "derive.zz_4nu_khz");
    if (d.contains("t1_us")) cfg.derive.t1_us = positive(d["t1_us"], "derive.t1_us");
  }

  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw ConfigError("seed", "must be a non-negative integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("n_traj")) {
    const auto v = integer(root["n_traj"], "n_traj");
    if (v < 1) throw ConfigError("n_traj", "must be >= 1");
    cfg.n_traj = static_cast<std::size_t>(v);
  }
  if (root.contains("spam_factor")) cfg.spam_factor = positive(root["spam_factor"], "spam_factor");
  if (root.contains("output")) cfg.output = string(root["output"], "output");

  validate(cfg);
  return cfg;
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string to_json(const ExperimentConfig& cfg, int indent) {
  json root = json::object();
  root["version"] = cfg.version;
  root["experiment"] = to_string(cfg.experiment);
  if (cfg.device_entry) {
    json specs = json::array();
    for (const auto& s : cfg.device_entry->spectators) specs.push_back(qubit_json(s, true));
    root["device"] = {{"control", qubit_json(cfg.device_entry->control, false)}, {"spectators", specs}};
  }
  root["spectator_init"] = cfg.spectator_inits;
  root["time"] = {{"tmax_us", cfg.tmax_us}, {"points", cfg.points}};
  root["engines"] = cfg.engines;
  root["cpmg"] = {{"orders", cfg.cpmg_orders},
                  {"tmax_factor", cfg.cpmg_tmax_factor},
                  {"fit_engine", cfg.cpmg_fit_engine}};
  std::vector<std::string> inits;
  for (auto p : cfg.rb_inits) inits.emplace_back(to_string(p));
  root["rb"] = {{"init", inits},
                {"lengths", cfg.rb.lengths},
                {"n_seq", cfg.rb.n_seq},
                {"n_shots", cfg.rb.n_shots},
                {"t_gate_ns", cfg.rb.t_gate * 1e9},
                {"frame", to_string(cfg.rb.frame)}};
  root["derive"] = {{"nu_tauc", cfg.derive.nu_tau_c},
                    {"omega0_ghz", cfg.derive.omega0_ghz},
                    {"omega1_ghz", cfg.derive.omega1_ghz},
                    {"zz_4nu_khz", cfg.derive.zz_4nu_khz},
                    {"t1_us", cfg.derive.t1_us}};
  root["seed"] = cfg.seed;
  root["n_traj"] = cfg.n_traj;
  root["spam_factor"] = cfg.spam_factor;
  if (!cfg.output.empty()) root["output"] = cfg.output;
  return root.dump(indent);
}

}  // namespace config
}  // namespace sdid
