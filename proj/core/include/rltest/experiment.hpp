#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rltest/ciprio.hpp"
#include "rltest/config.hpp"
#include "rltest/dataset.hpp"
#include "rltest/stats.hpp"

namespace rltest {

inline constexpr const char* kResultsVersion = "rltest.results.v1";

// One scalar measurement of one repetition, written as a delimited row.
// Game runs index rows by training step; ranking runs by evaluated cycle.
struct RunRecord {
  std::string config;  // experiment name
  int run = 0;         // repetition, 0-based
  std::uint64_t seed = 0;
  std::string index_kind;  // "step" or "cycle"
  long index = 0;
  std::string metric;  // bugs | state_coverage | reward | apfd | nrpa
  double value = 0.0;
  double train_s = 0.0;
  double predict_s = 0.0;
};

// Results file: one version line, one header line, then one row per record.
void write_run_records(std::ostream& out, const std::vector<RunRecord>& records);
void write_run_records_file(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_run_records(std::istream& in,
                                        const std::string& origin = "<stream>");
std::vector<RunRecord> read_run_records_file(const std::string& path);

// Block Maze bug hunt: per repetition a fresh maze and a fresh agent; trains
// for maze.total_steps and records cumulative distinct bugs, distinct visited
// cells, and cumulative reward at step 0, every checkpoint_interval steps,
// and the final step.
std::vector<RunRecord> run_game_experiment(const ExperimentConfig& config);

// CI prioritization: per repetition a fresh agent replay-trained over the
// dataset's consecutive cycles; records APFD or NRPA per evaluated cycle.
std::vector<RunRecord> run_ciprio_experiment(const ExperimentConfig& config,
                                             const LoadedDataset& dataset);
std::vector<RunRecord> run_ciprio_experiment(const ExperimentConfig& config);

// One observation per (config, run): step-indexed records contribute their
// final-step value, cycle-indexed records their mean over cycles. Groups are
// ordered by first appearance; runs within a group by run index.
std::vector<GroupSample> collect_metric_groups(const std::vector<RunRecord>& records,
                                               const std::string& metric);

// Human-readable comparison: group table, omnibus test, pairwise tests with
// a significance flag at the given level, and the effect-size matrix.
std::string render_stat_report(const StatReport& report, double alpha = 0.05);

// Machine-readable pairwise rows: header `A,B,mean(A),mean(B),p`, means with
// four decimals, p with six significant digits.
void write_stat_csv(std::ostream& out, const StatReport& report);

// Plot-ready series. Step-indexed metrics become
// `<name>_<metric>_curve.csv` files (`steps,mean,stddev` across runs);
// cycle-indexed metrics become `<name>_<metric>_cycles.csv` files
// (`cycle,value`, value averaged across runs). Returns the written paths.
std::vector<std::string> export_plot_data(const std::vector<RunRecord>& records,
                                          const std::string& out_dir);

}  // namespace rltest
