#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rltest/agents.hpp"
#include "rltest/blockmaze.hpp"
#include "rltest/dataset.hpp"

namespace rltest {

// Flat key-value configuration text:
//   - `key = value` lines; whole-line comments start with '#' or ';'
//   - `[section]` prefixes the following keys as `section.key`
//   - duplicate keys are rejected with their line number
// Reads are tracked so callers can reject keys that no consumer understands.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse(std::istream& in, const std::string& origin);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);  // CLI overrides

  std::string get_string(const std::string& key) const;  // ConfigError when absent
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_long(const std::string& key, long fallback) const;
  long require_long(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  // Throws ConfigError naming every key that was never read.
  void reject_unused() const;

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> read_;

  const std::string* find(const std::string& key) const;
};

enum class Task { blockmaze, ciprio };
Task task_from_string(const std::string& name);

struct MazeExperiment {
  int width = 20;
  int height = 20;
  double wall_density = 0.2;
  int bug_count = 25;
  int step_cap = 500;
  double step_reward = -1.0;
  double goal_reward = 100.0;
  MazeObservation observation = MazeObservation::coordinates;
  long total_steps = 4'000'000;
  long checkpoint_interval = 10'000;
};

struct CiprioExperiment {
  std::string model;  // pairwise | pointwise | listwise
  std::string dataset_path;
  DatasetSchema schema = DatasetSchema::simple;
  long max_steps_per_cycle = 1'000'000;
  int no_improve_limit = 100;
};

struct ExperimentConfig {
  std::string name;  // label carried into result rows; defaults to algorithm-task
  Task task = Task::blockmaze;
  std::uint64_t seed = 1;
  int repetitions = 0;  // defaults to 10 for blockmaze, 1 for ciprio
  std::string output_dir = "results";
  AgentConfig agent;
  MazeExperiment maze;
  CiprioExperiment ciprio;
};

// Builds a validated ExperimentConfig; rejects unknown keys, repetitions < 1,
// and ranking-model/action-space mismatches (pointwise needs a continuous
// agent; pairwise and listwise need discrete ones).
ExperimentConfig load_experiment_config(const KeyValueFile& kv);

// Parses the [dataset] section used by dataset synthesis.
DatasetProfile load_dataset_profile(const KeyValueFile& kv);

}  // namespace rltest
