#include "rltest/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "rltest/errors.hpp"

namespace rltest {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' ||
                    c == '.';
    if (!ok) return false;
  }
  return true;
}

[[noreturn]] void line_error(const std::string& origin, long line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') line_error(origin, line_no, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!valid_key(section)) line_error(origin, line_no, "invalid section name");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      line_error(origin, line_no, "expected 'key = value' or '[section]'");
    std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (!valid_key(key)) line_error(origin, line_no, "invalid key '" + key + "'");
    if (!section.empty()) key = section + "." + key;
    if (!kv.values_.emplace(key, value).second)
      line_error(origin, line_no, "duplicate key '" + key + "'");
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse(in, path);
}

const std::string* KeyValueFile::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  read_.insert(key);
  return &it->second;
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) != 0; }

void KeyValueFile::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
  values_[key] = value;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr) throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return *v;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v == nullptr ? fallback : *v;
}

namespace {

long parse_long(const std::string& value, const std::string& key, const std::string& origin) {
  long out = 0;
  const char* b = value.data();
  const char* e = b + value.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc{} || res.ptr != e)
    throw ConfigError(origin + ": key '" + key + "' needs an integer, got '" + value + "'");
  return out;
}

double parse_double(const std::string& value, const std::string& key, const std::string& origin) {
  double out = 0.0;
  const char* b = value.data();
  const char* e = b + value.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc{} || res.ptr != e || !std::isfinite(out))
    throw ConfigError(origin + ": key '" + key + "' needs a number, got '" + value + "'");
  return out;
}

}  // namespace

long KeyValueFile::get_long(const std::string& key, long fallback) const {
  const std::string* v = find(key);
  return v == nullptr ? fallback : parse_long(*v, key, origin_);
}

long KeyValueFile::require_long(const std::string& key) const {
  return parse_long(get_string(key), key, origin_);
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  const long v = get_long(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(origin_ + ": key '" + key + "' out of range");
  return static_cast<int>(v);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v == nullptr ? fallback : parse_double(*v, key, origin_);
}

double KeyValueFile::require_double(const std::string& key) const {
  return parse_double(get_string(key), key, origin_);
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "' needs a boolean, got '" + *v + "'");
}

std::uint64_t KeyValueFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  std::uint64_t out = 0;
  const char* b = v->data();
  const char* e = b + v->size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc{} || res.ptr != e)
    throw ConfigError(origin_ + ": key '" + key + "' needs an unsigned integer, got '" + *v + "'");
  return out;
}

std::vector<int> KeyValueFile::get_int_list(const std::string& key,
                                            const std::vector<int>& fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  std::vector<int> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty())
      throw ConfigError(origin_ + ": key '" + key + "' has an empty list element");
    out.push_back(static_cast<int>(parse_long(t, key, origin_)));
  }
  if (out.empty()) throw ConfigError(origin_ + ": key '" + key + "' needs a non-empty list");
  return out;
}

void KeyValueFile::reject_unused() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    (void)value;
    if (read_.count(key) == 0) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) throw ConfigError(origin_ + ": unknown key(s): " + unknown);
}

Task task_from_string(const std::string& name) {
  if (name == "blockmaze") return Task::blockmaze;
  if (name == "ciprio") return Task::ciprio;
  throw ConfigError("unknown task: " + name);
}

namespace {

AgentConfig load_agent_config(const KeyValueFile& kv, std::uint64_t seed) {
  AgentConfig a;
  a.algorithm = algorithm_from_string(kv.get_string("agent.algorithm"));
  a.seed = seed;
  a.gamma = kv.get_double("agent.gamma", a.gamma);
  a.lr = kv.get_double("agent.learning_rate", a.lr);
  a.hidden = kv.get_int_list("agent.hidden", a.hidden);
  for (int h : a.hidden)
    if (h <= 0) throw ConfigError("agent.hidden layers must be positive");

  a.buffer_capacity = kv.get_int("agent.buffer_capacity", a.buffer_capacity);
  a.batch_size = kv.get_int("agent.batch_size", a.batch_size);
  a.eps_start = kv.get_double("agent.eps_start", a.eps_start);
  a.eps_end = kv.get_double("agent.eps_end", a.eps_end);
  a.anneal_steps = kv.get_long("agent.anneal_steps", a.anneal_steps);
  a.target_update_interval = kv.get_int("agent.target_update_interval", a.target_update_interval);
  a.learn_every = kv.get_int("agent.learn_every", a.learn_every);
  a.learn_start = kv.get_int("agent.learn_start", a.learn_start);
  a.param_noise_sigma = kv.get_double("agent.param_noise_sigma", a.param_noise_sigma);

  a.n_step = kv.get_int("agent.n_step", a.n_step);
  a.entropy_coef = kv.get_double("agent.entropy_coef", a.entropy_coef);
  a.value_coef = kv.get_double("agent.value_coef", a.value_coef);

  a.clip_range = kv.get_double("agent.clip_range", a.clip_range);
  a.update_epochs = kv.get_int("agent.update_epochs", a.update_epochs);
  a.gae_lambda = kv.get_double("agent.gae_lambda", a.gae_lambda);
  a.rollout_steps = kv.get_int("agent.rollout_steps", a.rollout_steps);
  a.normalize_advantages = kv.get_bool("agent.normalize_advantages", a.normalize_advantages);

  a.tau = kv.get_double("agent.tau", a.tau);
  a.action_noise_sigma = kv.get_double("agent.action_noise_sigma", a.action_noise_sigma);
  a.log_std_init = kv.get_double("agent.log_std_init", a.log_std_init);

  if (a.gamma < 0.0 || a.gamma > 1.0) throw ConfigError("agent.gamma must lie in [0, 1]");
  if (a.lr <= 0.0) throw ConfigError("agent.learning_rate must be positive");
  if (a.buffer_capacity < 1) throw ConfigError("agent.buffer_capacity must be positive");
  if (a.batch_size < 1) throw ConfigError("agent.batch_size must be positive");
  if (a.n_step < 1) throw ConfigError("agent.n_step must be positive");
  if (a.update_epochs < 1) throw ConfigError("agent.update_epochs must be positive");
  if (a.rollout_steps < 1) throw ConfigError("agent.rollout_steps must be positive");
  return a;
}

}  // namespace

ExperimentConfig load_experiment_config(const KeyValueFile& kv) {
  ExperimentConfig c;
  c.task = task_from_string(kv.get_string("task"));
  c.seed = kv.get_u64("seed", 1);
  c.repetitions = kv.get_int("repetitions", c.task == Task::blockmaze ? 10 : 1);
  if (c.repetitions < 1) throw ConfigError("repetitions must be at least 1");
  c.output_dir = kv.get_string("output", "results");
  c.agent = load_agent_config(kv, c.seed);

  if (c.task == Task::blockmaze) {
    MazeExperiment& m = c.maze;
    m.width = kv.get_int("maze.width", m.width);
    m.height = kv.get_int("maze.height", m.height);
    m.wall_density = kv.get_double("maze.density", m.wall_density);
    m.bug_count = kv.get_int("maze.bugs", m.bug_count);
    m.step_cap = kv.get_int("maze.step_cap", m.step_cap);
    m.step_reward = kv.get_double("maze.step_reward", m.step_reward);
    m.goal_reward = kv.get_double("maze.goal_reward", m.goal_reward);
    m.observation = maze_observation_from_string(
        kv.get_string("maze.observation", "coordinates"));
    m.total_steps = kv.get_long("maze.total_steps", m.total_steps);
    m.checkpoint_interval = kv.get_long("maze.checkpoint_interval", m.checkpoint_interval);
    if (m.width < 2 || m.height < 2) throw ConfigError("maze dimensions must be at least 2x2");
    if (m.wall_density < 0.0 || m.wall_density > 0.4)
      throw ConfigError("maze.density must lie in [0, 0.4]");
    if (m.bug_count < 0) throw ConfigError("maze.bugs must be non-negative");
    if (m.step_cap < 1) throw ConfigError("maze.step_cap must be positive");
    if (m.total_steps < 0) throw ConfigError("maze.total_steps must be non-negative");
    if (m.checkpoint_interval < 1) throw ConfigError("maze.checkpoint_interval must be positive");
    if (c.agent.algorithm == Algorithm::ddpg)
      throw ConfigError("ddpg cannot drive the maze task: its actions are continuous");
  } else {
    CiprioExperiment& p = c.ciprio;
    p.model = kv.get_string("ciprio.model");
    if (p.model != "pairwise" && p.model != "pointwise" && p.model != "listwise")
      throw ConfigError("unknown ranking model: " + p.model);
    p.dataset_path = kv.get_string("ciprio.dataset");
    p.schema = dataset_schema_from_string(kv.get_string("ciprio.schema", "simple"));
    p.max_steps_per_cycle = kv.get_long("ciprio.max_steps_per_cycle", p.max_steps_per_cycle);
    p.no_improve_limit = kv.get_int("ciprio.no_improve_limit", p.no_improve_limit);
    if (p.max_steps_per_cycle < 1)
      throw ConfigError("ciprio.max_steps_per_cycle must be positive");
    if (p.no_improve_limit < 1) throw ConfigError("ciprio.no_improve_limit must be positive");

    const bool continuous_model = p.model == "pointwise";
    const Algorithm alg = c.agent.algorithm;
    if (continuous_model && alg == Algorithm::dqn)
      throw ConfigError("pointwise ranking needs a continuous-action agent; dqn is discrete");
    if (!continuous_model && alg == Algorithm::ddpg)
      throw ConfigError(p.model + " ranking needs a discrete-action agent; ddpg is continuous");
  }

  const std::string default_name =
      to_string(c.agent.algorithm) + "-" +
      (c.task == Task::blockmaze ? std::string("maze") : c.ciprio.model);
  c.name = kv.get_string("name", default_name);
  if (c.name.empty() || c.name.find(',') != std::string::npos ||
      c.name.find('\n') != std::string::npos)
    throw ConfigError("name must be non-empty and free of commas");

  kv.reject_unused();
  return c;
}

DatasetProfile load_dataset_profile(const KeyValueFile& kv) {
  DatasetProfile p;
  p.cycles = kv.get_int("dataset.cycles", 0);
  p.logs = kv.get_long("dataset.logs", 0);
  p.fail_rate = kv.get_double("dataset.fail_rate", 0.0);
  p.failed_cycles = kv.get_int("dataset.failed_cycles", 0);
  p.enriched = kv.get_bool("dataset.enriched", false);
  if (p.cycles <= 0) throw ConfigError("dataset.cycles must be positive");
  if (p.logs <= 0) throw ConfigError("dataset.logs must be positive");
  return p;
}

}  // namespace rltest
