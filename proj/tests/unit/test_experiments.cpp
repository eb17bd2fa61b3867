#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sdid/experiments.hpp"

using namespace sdid;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sdid_test_experiments";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig one_spectator() { return config::load(fs::path(SDID_CONFIG_DIR) / "one_spectator.json"); }
ExperimentConfig three_spectators() { return config::load(fs::path(SDID_CONFIG_DIR) / "three_spectators.json"); }

}  // namespace

TEST(Run, RamseyThreeEngines) {
  ExperimentConfig cfg = one_spectator();
  cfg.n_traj = 20000;
  const fs::path out = scratch("ramsey.csv");
  const auto files = experiments::run(cfg, out);
  ASSERT_EQ(files.size(), 2u);

  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time_us,coh_re,coh_im,coh_abs,engine,stderr_abs,spectators");
  std::vector<std::string> blocks;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream is(line);
    std::string cell;
    for (int k = 0; k < 5; ++k) std::getline(is, cell, ',');
    if (blocks.empty() || blocks.back() != cell) blocks.push_back(cell);
  }
  EXPECT_EQ(rows, 3 * 101);
  EXPECT_EQ(blocks, (std::vector<std::string>{"analytic", "lindblad", "trajectory"}));

  const auto side = nlohmann::json::parse(slurp(files[1]));
  EXPECT_LE(side.at("max_delta_analytic_lindblad").get<double>(), 1e-8);
  EXPECT_EQ(side.at("seed").get<int>(), 42);
  EXPECT_EQ(side.at("curves").size(), 3u);
  EXPECT_TRUE(side.at("config").contains("device"));
}

TEST(Run, RamseyIsDeterministic) {
  ExperimentConfig cfg = one_spectator();
  cfg.n_traj = 5000;
  cfg.points = 21;
  const fs::path a = scratch("det_a.csv"), b = scratch("det_b.csv");
  experiments::run(cfg, a);
  experiments::run(cfg, b);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Run, CpmgTableShowsRevival) {
  ExperimentConfig cfg = three_spectators();
  cfg.experiment = ExperimentKind::kCpmg;
  cfg.spectator_inits = {"111"};
  // The nu' closed form dips slightly at n = 1, 2; the revival is a property of
  // the explicit-pulse engine, which is also the default fit engine.
  cfg.engines = {"trajectory"};
  cfg.cpmg_fit_engine = "trajectory";
  cfg.n_traj = 20000;
  cfg.cpmg_orders = {0, 1, 2, 4, 8, 16, 32, 64, 128, 160};
  config::validate(cfg);
  const CpmgResult r = experiments::run_cpmg(cfg);
  ASSERT_EQ(r.orders.size(), cfg.cpmg_orders.size());
  double previous = 0.0;
  for (const auto& o : r.orders) {
    ASSERT_TRUE(o.fit.has_value()) << o.fit_error;
    EXPECT_GE(o.fit->t2(), previous) << "order " << o.order;
    previous = o.fit->t2();
  }
  EXPECT_NEAR(previous / 241e-6, 1.0, 0.1);

  cfg.cpmg_orders = {0, 4};
  cfg.n_traj = 2000;
  const fs::path out = scratch("cpmg.csv");
  const auto files = experiments::run(cfg, out);
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[1].filename(), "cpmg_t2.csv");
  const std::string table = slurp(files[1]);
  EXPECT_EQ(table.substr(0, table.find('\n')),
            "order,tmax_us,t2_us,t2_stderr_us,engine,status,max_delta_model_trajectory");
}

TEST(Run, DeriveTableFollowsClosedForm) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::kDerive;
  const DeriveResult r = experiments::run_derive(cfg);
  ASSERT_EQ(r.rows.size(), cfg.derive.nu_tau_c.size());
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.builder.uncorrelated, row.reference.uncorrelated, 1e-8) << row.nu_tau_c;
    EXPECT_NEAR(row.builder.correlated, row.reference.correlated, 1e-8) << row.nu_tau_c;
    EXPECT_NEAR(row.builder.cross, row.reference.cross, 1e-8) << row.nu_tau_c;
    EXPECT_LE(row.max_rel_diff, 1e-8);
  }
  EXPECT_NEAR(r.rows.front().reference.uncorrelated, 1.0, 1e-5);
  EXPECT_NEAR(r.rows.back().reference.correlated, 0.5, 1e-3);
}

TEST(Run, RbFileAndFit) {
  ExperimentConfig cfg = one_spectator();
  cfg.experiment = ExperimentKind::kRb;
  cfg.rb.n_seq = 4;
  cfg.rb.n_shots = 4;
  cfg.rb_inits = {SpectatorPrep::kZero, SpectatorPrep::kOne};
  const fs::path out = scratch("rb.csv");
  experiments::run(cfg, out);
  const std::string text = slurp(out);
  EXPECT_EQ(text.substr(0, text.find('\n')), "length,survival,stderr,init");
  const FitResult fit = experiments::fit_csv(out, experiments::FitKind::kRb, "", "zero");
  EXPECT_GT(fit.p(), 0.99);
  EXPECT_THROW(experiments::fit_csv(out, experiments::FitKind::kRb), std::runtime_error);
}

TEST(FitCsv, RecoversAnalyticCurve) {
  ExperimentConfig cfg = one_spectator();
  cfg.engines = {"analytic"};
  cfg.spectator_inits = {"0"};
  const fs::path out = scratch("ground.csv");
  experiments::run(cfg, out);
  const FitResult fit = experiments::fit_csv(out, experiments::FitKind::kExponential, "analytic", "0");
  EXPECT_NEAR(fit.t2() / 127e-6, 1.0, 1e-4);
  EXPECT_THROW(experiments::fit_csv(scratch("missing.csv"), experiments::FitKind::kExponential),
               std::runtime_error);
  EXPECT_THROW(experiments::fit_csv(out, experiments::FitKind::kRb), std::runtime_error);
}

TEST(TimeGrid, Endpoints) {
  const auto t = experiments::time_grid(5e-4, 101);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_DOUBLE_EQ(t.back(), 5e-4);
  EXPECT_THROW(experiments::time_grid(0.0, 10), std::invalid_argument);
  EXPECT_THROW(experiments::time_grid(1.0, 1), std::invalid_argument);
}
