#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rwsim/engine.hpp"

namespace fs = std::filesystem;
using namespace rwsim;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct RunOutputs {
  KpiSeries series;
  ScenarioConfig cfg;
};

RunOutputs run_once(ScenarioConfig cfg) {
  Simulation sim(cfg);
  return {sim.run(), cfg};
}

void write_outputs(const RunOutputs& r, const fs::path& dir,
                   const std::string& stem) {
  fs::create_directories(dir);
  export_csv(r.series, (dir / (stem + ".csv")).string());
  export_json(r.series, r.cfg, (dir / (stem + ".json")).string());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> scheduler, const std::string& out_dir) {
  ScenarioConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (scheduler) cfg.scheduler = scheduler_kind_from_string(*scheduler);
  const auto r = run_once(cfg);
  std::ostringstream stem;
  stem << "run_" << to_string(cfg.scheduler) << "_seed" << cfg.seed;
  write_outputs(r, out_dir, stem.str());
  for (int c = 0; c < kNumClasses; ++c) {
    const auto label = to_string(flow_class(qci_of_class_index(c)).label);
    const auto ratio = r.series.delivery_ratio(c);
    const auto hol = r.series.mean_hol_ms(c);
    std::cout << label << ": delivery_ratio="
              << (ratio ? fmt(*ratio) : "n/a") << " mean_hol_ms="
              << (hol ? fmt(*hol) : "n/a") << "\n";
  }
  return 0;
}

struct SweepCell {
  SchedulerKind scheduler;
  double axis_value = 0;
  std::uint64_t seed = 0;
  KpiSeries series;
  bool failed = false;
  std::string error;
};

int cmd_sweep(const std::string& config_path, const std::string& axis,
              std::vector<double> values, std::vector<std::uint64_t> seeds,
              std::vector<std::string> schedulers, const std::string& out_dir,
              int jobs) {
  const ScenarioConfig base = load_config(config_path);
  if (values.empty() || seeds.empty()) {
    std::cerr << "sweep: need at least one axis value and one seed\n";
    return kExitUsage;
  }
  if (schedulers.empty()) schedulers.push_back(to_string(base.scheduler));

  std::vector<SweepCell> cells;
  for (const auto& s : schedulers)
    for (double v : values)
      for (auto seed : seeds)
        cells.push_back({scheduler_kind_from_string(s), v, seed, {}, false, ""});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      auto& cell = cells[i];
      try {
        ScenarioConfig cfg = base;
        cfg.scheduler = cell.scheduler;
        cfg.seed = cell.seed;
        if (axis == "n_ue")
          cfg.n_ue = static_cast<int>(cell.axis_value);
        else
          cfg.mobile_fraction = cell.axis_value;
        const auto r = run_once(cfg);
        cell.series = r.series;
        std::ostringstream stem;
        stem << "cell_" << to_string(cfg.scheduler) << "_" << axis << cell.axis_value
             << "_seed" << cell.seed;
        write_outputs({cell.series, cfg}, fs::path(out_dir) / "cells", stem.str());
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_jobs = std::max(1, jobs);
  for (int t = 0; t < n_jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Aggregate across seeds per (scheduler, axis value, class).
  fs::create_directories(out_dir);
  std::ofstream agg(fs::path(out_dir) / "aggregate.csv");
  agg << "axis,axis_value,scheduler,class,n_seeds,mean_delivery_ratio,"
         "std_delivery_ratio,mean_hol_ms,std_hol_ms\n";
  for (const auto& s : schedulers) {
    const auto kind = scheduler_kind_from_string(s);
    for (double v : values) {
      for (int c = 0; c < kNumClasses; ++c) {
        std::vector<double> ratios, hols;
        for (const auto& cell : cells) {
          if (cell.failed || cell.scheduler != kind || cell.axis_value != v)
            continue;
          if (auto r = cell.series.delivery_ratio(c)) ratios.push_back(*r);
          if (auto h = cell.series.mean_hol_ms(c)) hols.push_back(*h);
        }
        auto mean_std = [](const std::vector<double>& xs) {
          if (xs.empty()) return std::pair<double, double>{0, 0};
          double m = 0;
          for (double x : xs) m += x;
          m /= static_cast<double>(xs.size());
          double s2 = 0;
          for (double x : xs) s2 += (x - m) * (x - m);
          return std::pair<double, double>{
              m, std::sqrt(s2 / static_cast<double>(xs.size()))};
        };
        const auto [mr, sr] = mean_std(ratios);
        const auto [mh, sh] = mean_std(hols);
        agg << axis << ',' << fmt(v) << ',' << s << ','
            << to_string(flow_class(qci_of_class_index(c)).label) << ','
            << ratios.size() << ',' << fmt(mr) << ',' << fmt(sr) << ','
            << fmt(mh) << ',' << fmt(sh) << '\n';
      }
    }
  }
  int failures = 0;
  for (const auto& cell : cells) {
    if (cell.failed) {
      ++failures;
      std::cerr << "cell failed (" << to_string(cell.scheduler) << ", "
                << cell.axis_value << ", seed " << cell.seed
                << "): " << cell.error << "\n";
    }
  }
  std::cout << "sweep: " << cells.size() - failures << "/" << cells.size()
            << " cells completed; aggregate at " << out_dir << "/aggregate.csv\n";
  return 0;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& checkpoint, const std::string& out_dir) {
  ScenarioConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (cfg.scheduler != SchedulerKind::DA2C &&
      cfg.scheduler != SchedulerKind::CDPAA2C) {
    std::cerr << "train: config must select an A2C scheduler\n";
    return kExitUsage;
  }
  Simulation sim(cfg);
  const auto series = sim.run();
  if (fs::path(checkpoint).has_parent_path())
    fs::create_directories(fs::path(checkpoint).parent_path());
  sim.a2c()->save(checkpoint);
  std::ostringstream stem;
  stem << "train_" << to_string(cfg.scheduler) << "_seed" << cfg.seed;
  write_outputs({series, cfg}, out_dir, stem.str());
  const auto curve = reward_curve(series.reward_per_tti(), 100);
  std::ofstream rw(fs::path(out_dir) / (stem.str() + "_reward.csv"));
  rw << "tti,reward,running_mean\n";
  const auto per_tti = series.reward_per_tti();
  for (std::size_t i = 0; i < curve.size(); ++i)
    rw << i << ',' << fmt(per_tti[i]) << ',' << fmt(curve[i]) << '\n';
  std::cout << "train: checkpoint written to " << checkpoint << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, std::optional<std::uint64_t> seed,
             const std::string& checkpoint, const std::string& out_dir) {
  ScenarioConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  A2cSystem system = A2cSystem::load(checkpoint, cfg);
  Simulation sim(cfg, std::move(system));
  const auto series = sim.run();
  std::ostringstream stem;
  stem << "eval_" << to_string(cfg.scheduler) << "_seed" << cfg.seed;
  write_outputs({series, cfg}, out_dir, stem.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TTI-granular downlink scheduling simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", checkpoint = "a2c.ckpt";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scheduler;

  auto* run = app.add_subcommand("run", "execute a single scenario");
  run->add_option("--config", config_path, "scenario JSON file")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--scheduler", scheduler, "override the scheduler");
  run->add_option("--out", out_dir, "output directory");

  std::string axis = "n_ue";
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> schedulers;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("--config", config_path, "base scenario JSON")->required();
  sweep->add_option("--axis", axis, "n_ue or mobile_fraction")
      ->check(CLI::IsMember({"n_ue", "mobile_fraction"}));
  sweep->add_option("--values", values, "axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", seeds, "seed list")->required()->delimiter(',');
  sweep->add_option("--schedulers", schedulers, "scheduler list")
      ->delimiter(',');
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "parallel workers");

  auto* train = app.add_subcommand("train", "train an A2C scheduler");
  train->add_option("--config", config_path, "scenario JSON file")->required();
  train->add_option("--seed", seed, "override the config seed");
  train->add_option("--checkpoint", checkpoint, "checkpoint output path");
  train->add_option("--out", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a trained checkpoint");
  eval->add_option("--config", config_path, "scenario JSON file")->required();
  eval->add_option("--seed", seed, "override the config seed");
  eval->add_option("--checkpoint", checkpoint, "checkpoint to load")->required();
  eval->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, seed, scheduler, out_dir);
    if (sweep->parsed())
      return cmd_sweep(config_path, axis, values, seeds, schedulers, out_dir,
                       jobs);
    if (train->parsed()) return cmd_train(config_path, seed, checkpoint, out_dir);
    if (eval->parsed()) return cmd_eval(config_path, seed, checkpoint, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
