// Command-line front end: run experiments, synthesize datasets, compare
// result groups statistically, and export plot-ready series.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rltest/config.hpp"
#include "rltest/dataset.hpp"
#include "rltest/errors.hpp"
#include "rltest/experiment.hpp"
#include "rltest/metrics.hpp"
#include "rltest/stats.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
  std::optional<int> reps;
  std::string out;
};

void add_config_option(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--config", opts.config, "configuration file")->required();
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t pos = csv.find(',', start);
    if (pos == std::string::npos) pos = csv.size();
    std::string item = csv.substr(start, pos - start);
    const std::size_t b = item.find_first_not_of(" \t");
    const std::size_t e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    start = pos + 1;
  }
  return out;
}

rltest::KeyValueFile load_with_overrides(const CommonOpts& opts, const char* steps_key) {
  rltest::KeyValueFile kv = rltest::KeyValueFile::parse_file(opts.config);
  if (opts.seed) kv.set("seed", std::to_string(*opts.seed));
  if (opts.steps) kv.set(steps_key, std::to_string(*opts.steps));
  if (opts.reps) kv.set("repetitions", std::to_string(*opts.reps));
  if (!opts.out.empty()) kv.set("output", opts.out);
  return kv;
}

std::string write_results(const rltest::ExperimentConfig& cfg,
                          const std::vector<rltest::RunRecord>& records) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = cfg.output_dir + "/" + cfg.name + ".results";
  rltest::write_run_records_file(path, records);
  return path;
}

void print_group_means(const std::vector<rltest::RunRecord>& records,
                       const std::vector<std::string>& metrics) {
  for (const std::string& metric : metrics) {
    const auto groups = rltest::collect_metric_groups(records, metric);
    for (const rltest::GroupSample& g : groups) {
      if (g.values.empty()) continue;
      std::cout << "  " << metric << ": mean " << g.mean() << " over " << g.values.size()
                << " run(s)\n";
    }
  }
}

int run_game(const CommonOpts& opts) {
  const rltest::KeyValueFile kv = load_with_overrides(opts, "maze.total_steps");
  const rltest::ExperimentConfig cfg = rltest::load_experiment_config(kv);
  if (cfg.task != rltest::Task::blockmaze)
    throw rltest::ConfigError("game-test needs task = blockmaze");
  const auto records = rltest::run_game_experiment(cfg);
  const std::string path = write_results(cfg, records);
  std::cout << "wrote " << records.size() << " records (" << cfg.repetitions
            << " repetition(s)) to " << path << "\n";
  print_group_means(records, {"bugs", "state_coverage", "reward"});
  return 0;
}

int run_prioritize(const CommonOpts& opts) {
  const rltest::KeyValueFile kv = load_with_overrides(opts, "ciprio.max_steps_per_cycle");
  const rltest::ExperimentConfig cfg = rltest::load_experiment_config(kv);
  if (cfg.task != rltest::Task::ciprio)
    throw rltest::ConfigError("prioritize needs task = ciprio");
  const rltest::LoadedDataset dataset =
      rltest::load_dataset(cfg.ciprio.dataset_path, cfg.ciprio.schema);
  if (dataset.dropped_cycles > 0)
    std::cout << "dropped " << dataset.dropped_cycles
              << " cycle(s) with fewer than 6 tests\n";
  const auto records = rltest::run_ciprio_experiment(cfg, dataset);
  const std::string path = write_results(cfg, records);
  std::cout << "wrote " << records.size() << " records (" << cfg.repetitions
            << " repetition(s), " << dataset.cycles.size() << " cycles) to " << path << "\n";
  print_group_means(records, {"apfd", "nrpa"});
  return 0;
}

int run_gen_data(const CommonOpts& opts) {
  rltest::KeyValueFile kv = rltest::KeyValueFile::parse_file(opts.config);
  if (opts.seed) kv.set("seed", std::to_string(*opts.seed));
  if (!opts.out.empty()) kv.set("output", opts.out);
  const rltest::DatasetProfile profile = rltest::load_dataset_profile(kv);
  const std::uint64_t seed = kv.get_u64("seed", 1);
  const std::string path = kv.get_string("output");
  kv.reject_unused();

  const auto cycles = rltest::generate_dataset(profile, seed);
  rltest::write_dataset_file(path, cycles,
                             profile.enriched ? rltest::kEnrichedColumns : 0);

  long rows = 0, failures = 0;
  int failed_cycles = 0;
  for (const rltest::Cycle& c : cycles) {
    rows += static_cast<long>(c.tests.size());
    failures += c.failure_count();
    failed_cycles += c.has_failures() ? 1 : 0;
  }
  std::cout << "wrote " << cycles.size() << " cycles, " << rows << " records ("
            << failures << " failures in " << failed_cycles << " cycles) to " << path << "\n";
  return 0;
}

int run_stats(const CommonOpts& opts) {
  rltest::KeyValueFile kv = rltest::KeyValueFile::parse_file(opts.config);
  if (!opts.out.empty()) kv.set("stats.output", opts.out);
  const std::vector<std::string> inputs = split_list(kv.get_string("stats.inputs"));
  const std::string metric = kv.get_string("stats.metric");
  const double alpha = kv.get_double("stats.alpha", 0.05);
  const std::string csv_path = kv.get_string("stats.output", "");
  kv.reject_unused();
  if (inputs.empty()) throw rltest::ConfigError("stats.inputs names no results files");

  std::vector<rltest::RunRecord> records;
  for (const std::string& path : inputs) {
    auto part = rltest::read_run_records_file(path);
    records.insert(records.end(), part.begin(), part.end());
  }

  auto groups = rltest::collect_metric_groups(records, metric);
  std::vector<rltest::GroupSample> usable;
  for (auto& g : groups) {
    if (g.values.size() < 2 || g.variance() == 0.0) {
      std::cout << "warning: excluding degenerate group '" << g.name << "' ("
                << g.values.size() << " observation(s))\n";
    } else {
      usable.push_back(std::move(g));
    }
  }
  if (usable.size() < 2)
    throw rltest::DataError("need at least two non-degenerate groups for metric '" + metric +
                            "'");

  const rltest::StatReport report = rltest::compare_groups(usable);
  std::cout << rltest::render_stat_report(report, alpha);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw rltest::DataError("cannot write stats file: " + csv_path);
    rltest::write_stat_csv(out, report);
    std::cout << "wrote pairwise table to " << csv_path << "\n";
  }
  return 0;
}

int run_report(const CommonOpts& opts) {
  rltest::KeyValueFile kv = rltest::KeyValueFile::parse_file(opts.config);
  if (!opts.out.empty()) kv.set("report.output", opts.out);
  const std::vector<std::string> inputs = split_list(kv.get_string("report.inputs"));
  const std::string out_dir = kv.get_string("report.output");
  kv.reject_unused();
  if (inputs.empty()) throw rltest::ConfigError("report.inputs names no results files");

  std::vector<rltest::RunRecord> records;
  for (const std::string& path : inputs) {
    auto part = rltest::read_run_records_file(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto written = rltest::export_plot_data(records, out_dir);
  for (const std::string& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RL benchmark engine for game bug discovery and CI test prioritization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "1.0.0");

  CommonOpts game, prio, gen, stats, report;

  CLI::App* game_cmd = app.add_subcommand("game-test", "train agents to hunt maze bugs");
  add_config_option(game_cmd, game);
  game_cmd->add_option("--seed", game.seed, "override the base seed");
  game_cmd->add_option("--steps", game.steps, "override maze.total_steps");
  game_cmd->add_option("--reps", game.reps, "override repetitions");
  game_cmd->add_option("--out", game.out, "override the output directory");

  CLI::App* prio_cmd =
      app.add_subcommand("prioritize", "replay-train agents over CI cycles and score rankings");
  add_config_option(prio_cmd, prio);
  prio_cmd->add_option("--seed", prio.seed, "override the base seed");
  prio_cmd->add_option("--steps", prio.steps, "override ciprio.max_steps_per_cycle");
  prio_cmd->add_option("--reps", prio.reps, "override repetitions");
  prio_cmd->add_option("--out", prio.out, "override the output directory");

  CLI::App* gen_cmd = app.add_subcommand("gen-data", "synthesize a CI dataset file");
  add_config_option(gen_cmd, gen);
  gen_cmd->add_option("--seed", gen.seed, "override the base seed");
  gen_cmd->add_option("--out", gen.out, "override the output file path");

  CLI::App* stats_cmd =
      app.add_subcommand("stats", "compare result groups (omnibus, post-hoc, effect sizes)");
  add_config_option(stats_cmd, stats);
  stats_cmd->add_option("--out", stats.out, "write the pairwise CSV table here");

  CLI::App* report_cmd = app.add_subcommand("report", "export plot-ready series from results");
  add_config_option(report_cmd, report);
  report_cmd->add_option("--out", report.out, "override the export directory");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(game_cmd)) return run_game(game);
    if (app.got_subcommand(prio_cmd)) return run_prioritize(prio);
    if (app.got_subcommand(gen_cmd)) return run_gen_data(gen);
    if (app.got_subcommand(stats_cmd)) return run_stats(stats);
    if (app.got_subcommand(report_cmd)) return run_report(report);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const rltest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const rltest::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
