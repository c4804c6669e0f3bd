#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "apfmpc/config.hpp"
#include "apfmpc/potential.hpp"
#include "apfmpc/sim.hpp"

namespace fs = std::filesystem;
using namespace apfmpc;

namespace {

ScenarioConfig resolve_scenario(const std::string& preset, const std::string& config_path) {
  if (!config_path.empty()) return load_config(config_path);
  return preset_by_name(preset);
}

int cmd_run(const std::string& preset, const std::string& config_path, int trials_override,
            std::int64_t seed_override, const std::string& out_dir, int parallel) {
  ScenarioConfig cfg = resolve_scenario(preset, config_path);
  if (trials_override > 0) cfg.trials = trials_override;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

  fs::create_directories(out_dir);
  Simulator sim(cfg);

  std::vector<TrialLog> logs(cfg.trials);
  std::vector<TrialOutcome> outcomes(cfg.trials);
  std::atomic<int> next{0};
  std::atomic<bool> runtime_failure{false};

  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < cfg.trials; i = next.fetch_add(1)) {
      auto [log, outcome] = sim.run_trial(cfg.seed + static_cast<std::uint64_t>(i));
      if (outcome.aborted) runtime_failure = true;
      logs[i] = std::move(log);
      outcomes[i] = std::move(outcome);
    }
  };
  const int n_threads = std::max(1, std::min(parallel, cfg.trials));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (int i = 0; i < cfg.trials; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "trial_%03d.csv", i);
    std::ofstream os(fs::path(out_dir) / name);
    write_trial_csv(os, logs[i]);
    const auto& o = outcomes[i];
    std::cout << cfg.name << " trial " << i << " seed " << logs[i].seed << ": "
              << (o.success ? "success" : "FAIL")
              << (o.collision ? " [collision]" : "")
              << (o.aborted ? " [aborted: " + o.diagnostic + "]" : "")
              << (o.goal_reached ? " [goal]" : "") << "\n";
  }
  BatchSummary summary = summarize(cfg.name, outcomes);
  {
    std::ofstream os(fs::path(out_dir) / "summary.csv");
    write_summary_csv(os, summary);
  }
  std::cout << cfg.name << ": " << summary.successes << "/" << summary.trials
            << " successful, mean solve " << summary.mean_solve_ms << " ms, max "
            << summary.max_solve_ms << " ms\n";
  return runtime_failure ? 3 : 0;
}

int cmd_dump_field(const std::string& preset, const std::string& config_path, double xmin,
                   double xmax, double ymin, double ymax, double res,
                   const std::string& out_path) {
  ScenarioConfig cfg = resolve_scenario(preset, config_path);
  Simulator sim(cfg);
  WorldState world = sim.make_world(cfg.seed);
  std::vector<SurroundingVehicle> svs;
  for (const auto& sv : world.svs) svs.push_back(sv.current);

  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open output file '" + out_path + "'");
  os << "x,y,F_total,F_NR,F_TR,F_V,F_TL\n";
  char line[256];
  for (double y = ymin; y <= ymax + 1e-12; y += res) {
    for (double x = xmin; x <= xmax + 1e-12; x += res) {
      VehicleState probe = cfg.ev_initial;
      probe.p_x = x;
      probe.p_y = y;
      EnvironmentQuery q = query_environment(cfg.road, probe, cfg.pf.query_range, 0.0);
      EnvironmentSnapshot env = EnvironmentSnapshot::from_query(q, svs);
      FieldBreakdown f = evaluate_field(env, probe, cfg.pf);
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", x, y,
                    f.total(), f.nr, f.tr, f.vehicles, f.tl);
      os << line;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential-field NMPC driving simulator"};
  app.require_subcommand(1);

  std::string preset = "multilane_acc";
  std::string config_path;
  int trials = -1;
  std::int64_t seed = -1;
  std::string out_dir = "out";
  int parallel = 1;

  auto* run = app.add_subcommand("run", "Run closed-loop trials of a scenario");
  run->add_option("--scenario", preset, "Preset: roundabout, multilane_acc, crossroad");
  run->add_option("--config", config_path, "JSON scenario config (overrides --scenario)");
  run->add_option("--trials", trials, "Number of trials (overrides config)");
  run->add_option("--seed", seed, "Base seed (overrides config)");
  run->add_option("--out", out_dir, "Output directory for CSV logs");
  run->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);

  double xmin = -20, xmax = 20, ymin = -20, ymax = 20, res = 0.5;
  std::string field_out = "field.csv";
  auto* dump = app.add_subcommand("dump-field", "Sample the potential field on a grid");
  dump->add_option("--scenario", preset, "Preset name");
  dump->add_option("--config", config_path, "JSON scenario config");
  dump->add_option("--xmin", xmin);
  dump->add_option("--xmax", xmax);
  dump->add_option("--ymin", ymin);
  dump->add_option("--ymax", ymax);
  dump->add_option("--res", res, "Grid resolution [m]")->check(CLI::PositiveNumber);
  dump->add_option("--out", field_out, "Output CSV path");

  auto* echo = app.add_subcommand("echo-config", "Parse a config and print it back");
  echo->add_option("--scenario", preset, "Preset name");
  echo->add_option("--config", config_path, "JSON scenario config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    if (run->parsed()) return cmd_run(preset, config_path, trials, seed, out_dir, parallel);
    if (dump->parsed())
      return cmd_dump_field(preset, config_path, xmin, xmax, ymin, ymax, res, field_out);
    if (echo->parsed()) {
      std::cout << echo_config(resolve_scenario(preset, config_path)) << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
