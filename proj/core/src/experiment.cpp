#include "rltest/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "rltest/blockmaze.hpp"
#include "rltest/errors.hpp"
#include "rltest/rng.hpp"
#include "text_num.hpp"

namespace rltest {

namespace {

constexpr const char* kColumnHeader =
    "config,run,seed,index_kind,index,metric,value,train_s,predict_s";

// Seed streams for the independent random sources of one repetition.
constexpr std::uint64_t kMazeStream = 101;
constexpr std::uint64_t kAgentStream = 202;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void row_error(const std::string& origin, long line, const std::string& what) {
  throw DataError(origin + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(const std::string& field, const std::string& origin, long line,
               const char* name) {
  T value{};
  const char* b = field.data();
  const char* e = b + field.size();
  const auto res = std::from_chars(b, e, value);
  if (res.ec != std::errc{} || res.ptr != e)
    row_error(origin, line, std::string("invalid ") + name + " '" + field + "'");
  return value;
}

}  // namespace

void write_run_records(std::ostream& out, const std::vector<RunRecord>& records) {
  std::string buf(kResultsVersion);
  buf += '\n';
  buf += kColumnHeader;
  buf += '\n';
  for (const RunRecord& r : records) {
    buf += r.config;
    buf += ',';
    buf += std::to_string(r.run);
    buf += ',';
    buf += std::to_string(r.seed);
    buf += ',';
    buf += r.index_kind;
    buf += ',';
    buf += std::to_string(r.index);
    buf += ',';
    buf += r.metric;
    buf += ',';
    detail::append_double(buf, r.value);
    buf += ',';
    detail::append_double(buf, r.train_s);
    buf += ',';
    detail::append_double(buf, r.predict_s);
    buf += '\n';
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_run_records_file(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write results file: " + path);
  write_run_records(out, records);
  out.flush();
  if (!out) throw DataError("failed writing results file: " + path);
}

std::vector<RunRecord> read_run_records(std::istream& in, const std::string& origin) {
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw DataError(origin + ": empty results file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsVersion)
    throw DataError(origin + ": unsupported results format '" + line + "'");
  if (!std::getline(in, line)) throw DataError(origin + ": missing column header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kColumnHeader) throw DataError(origin + ": unexpected column header");

  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 9) row_error(origin, line_no, "expected 9 fields");
    RunRecord r;
    r.config = f[0];
    r.run = parse_number<int>(f[1], origin, line_no, "run");
    r.seed = parse_number<std::uint64_t>(f[2], origin, line_no, "seed");
    r.index_kind = f[3];
    if (r.index_kind != "step" && r.index_kind != "cycle")
      row_error(origin, line_no, "index_kind must be 'step' or 'cycle'");
    r.index = parse_number<long>(f[4], origin, line_no, "index");
    r.metric = f[5];
    r.value = parse_number<double>(f[6], origin, line_no, "value");
    r.train_s = parse_number<double>(f[7], origin, line_no, "train_s");
    r.predict_s = parse_number<double>(f[8], origin, line_no, "predict_s");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RunRecord> read_run_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results file: " + path);
  return read_run_records(in, path);
}

// ---------------------------------------------------------------------------
// Block Maze experiment
// ---------------------------------------------------------------------------

std::vector<RunRecord> run_game_experiment(const ExperimentConfig& config) {
  if (config.task != Task::blockmaze)
    throw ConfigError("run_game_experiment needs task = blockmaze");
  const MazeExperiment& m = config.maze;

  std::vector<RunRecord> records;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = mix_seed(config.seed, static_cast<std::uint64_t>(rep));

    Rng maze_rng(mix_seed(rep_seed, kMazeStream));
    const MazeSpec spec =
        generate_maze(m.width, m.height, m.wall_density, m.bug_count, maze_rng);

    AgentConfig agent_cfg = config.agent;
    agent_cfg.seed = mix_seed(rep_seed, kAgentStream);
    agent_cfg.total_steps_hint = m.total_steps;
    const auto agent = make_discrete_agent(agent_cfg, observation_size(spec, m.observation),
                                           kMazeActionCount);

    BlockMazeEnv env(spec, m.observation);
    CoverageTracker coverage;
    double cumulative_reward = 0.0;
    const auto start = std::chrono::steady_clock::now();

    const auto emit = [&](long step) {
      const double elapsed = seconds_since(start);
      records.push_back({config.name, rep, rep_seed, "step", step,
                         to_string(MetricValue::Kind::bug_count),
                         static_cast<double>(coverage.bugs_found()), elapsed, 0.0});
      records.push_back({config.name, rep, rep_seed, "step", step,
                         to_string(MetricValue::Kind::state_coverage),
                         static_cast<double>(coverage.state_coverage()), elapsed, 0.0});
      records.push_back({config.name, rep, rep_seed, "step", step,
                         to_string(MetricValue::Kind::reward), cumulative_reward, elapsed, 0.0});
    };

    Vec obs = env.reset();
    coverage.visit(spec.cell_index(env.position()));
    emit(0);

    for (long step = 1; step <= m.total_steps; ++step) {
      const int action = agent->act(obs);
      MazeStep ms = env.step(action);
      const int cell = spec.cell_index(env.position());
      coverage.visit(cell);
      if (ms.bug_triggered) coverage.trigger_bug(cell);
      cumulative_reward += ms.reward;

      Transition t;
      t.state = std::move(obs);
      t.action = action;
      t.reward = ms.reward;
      t.next_state = ms.observation;
      t.done = ms.done;
      agent->observe(t);

      obs = std::move(ms.observation);
      if (ms.done) {
        obs = env.reset();
        coverage.visit(spec.cell_index(env.position()));
      }
      if (step % m.checkpoint_interval == 0 || step == m.total_steps) emit(step);
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// CI prioritization experiment
// ---------------------------------------------------------------------------

std::vector<RunRecord> run_ciprio_experiment(const ExperimentConfig& config,
                                             const LoadedDataset& dataset) {
  if (config.task != Task::ciprio)
    throw ConfigError("run_ciprio_experiment needs task = ciprio");
  if (dataset.cycles.size() < 2)
    throw DataError("dataset needs at least two usable cycles");

  int padded = 0;
  for (const Cycle& c : dataset.cycles)
    padded = std::max(padded, static_cast<int>(c.tests.size()));
  const int features = feature_size(dataset.enriched_dims);
  const bool continuous = config.ciprio.model == "pointwise";
  const ReplayBudget budget{config.ciprio.max_steps_per_cycle, config.ciprio.no_improve_limit};

  std::vector<RunRecord> records;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = mix_seed(config.seed, static_cast<std::uint64_t>(rep));
    AgentConfig agent_cfg = config.agent;
    agent_cfg.seed = mix_seed(rep_seed, kAgentStream);

    const auto env = make_ranking_env(config.ciprio.model, features, padded);

    std::vector<CycleEvalRecord> evals;
    std::unique_ptr<DiscreteAgent> discrete;
    std::unique_ptr<ContinuousAgent> cont;
    if (continuous) {
      cont = make_continuous_agent(agent_cfg, env->observation_size());
      evals = replay_train(*env, PolicyHandle(*cont), dataset.cycles, budget);
    } else {
      discrete = make_discrete_agent(agent_cfg, env->observation_size(), env->action_count());
      evals = replay_train(*env, PolicyHandle(*discrete), dataset.cycles, budget);
    }

    for (const CycleEvalRecord& e : evals)
      records.push_back({config.name, rep, rep_seed, "cycle", static_cast<long>(e.cycle_id),
                         to_string(e.metric.kind), e.metric.value, e.train_seconds,
                         e.predict_seconds});
  }
  return records;
}

std::vector<RunRecord> run_ciprio_experiment(const ExperimentConfig& config) {
  const LoadedDataset dataset =
      load_dataset(config.ciprio.dataset_path, config.ciprio.schema);
  return run_ciprio_experiment(config, dataset);
}

// ---------------------------------------------------------------------------
// Aggregation, statistics rendering, plot export
// ---------------------------------------------------------------------------

std::vector<GroupSample> collect_metric_groups(const std::vector<RunRecord>& records,
                                               const std::string& metric) {
  struct RunAgg {
    long best_index = -1;
    double final_value = 0.0;
    double sum = 0.0;
    long count = 0;
    bool by_cycle = false;
  };
  std::vector<std::string> order;
  std::map<std::string, std::map<int, RunAgg>> groups;

  for (const RunRecord& r : records) {
    if (r.metric != metric) continue;
    auto it = groups.find(r.config);
    if (it == groups.end()) {
      order.push_back(r.config);
      it = groups.emplace(r.config, std::map<int, RunAgg>{}).first;
    }
    RunAgg& agg = it->second[r.run];
    if (r.index_kind == "cycle") {
      agg.by_cycle = true;
      agg.sum += r.value;
      agg.count += 1;
    } else if (r.index > agg.best_index) {
      agg.best_index = r.index;
      agg.final_value = r.value;
    }
  }

  std::vector<GroupSample> out;
  out.reserve(order.size());
  for (const std::string& name : order) {
    GroupSample g;
    g.name = name;
    for (const auto& [run, agg] : groups[name]) {
      (void)run;
      g.values.push_back(agg.by_cycle ? agg.sum / static_cast<double>(agg.count)
                                      : agg.final_value);
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void pad_to(std::string& line, std::size_t width) {
  if (line.size() < width) line.append(width - line.size(), ' ');
}

}  // namespace

std::string render_stat_report(const StatReport& report, double alpha) {
  std::string out;
  std::size_t name_width = 5;
  for (const std::string& n : report.group_names) name_width = std::max(name_width, n.size());

  out += "group";
  pad_to(out, name_width + 2);
  out += "    n       mean     stddev\n";
  for (std::size_t i = 0; i < report.group_names.size(); ++i) {
    std::string line = report.group_names[i];
    pad_to(line, name_width + 2);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%5zu %10.4f %10.4f", report.group_sizes[i],
                  report.group_means[i], report.group_stddevs[i]);
    line += buf;
    out += line;
    out += '\n';
  }

  out += "\nWelch ANOVA: F(" + sig6(report.anova.df1) + ", " + sig6(report.anova.df2) +
         ") = " + sig6(report.anova.f_stat) + ", p = " + sig6(report.anova.p_value) + "\n";

  out += "\npairwise (Games-Howell, alpha = " + sig6(alpha) + "):\n";
  for (const PairwiseComparison& c : report.pairwise) {
    out += "  " + c.a + " vs " + c.b + ": mean " + fixed4(c.mean_a) + " vs " +
           fixed4(c.mean_b) + ", t = " + sig6(c.t_stat) + ", df = " + sig6(c.df) +
           ", p = " + sig6(c.p_value) + (c.p_value <= alpha ? "  [significant]" : "") + "\n";
  }

  out += "\nCLE (P[row beats column]):\n";
  std::string header(name_width + 2, ' ');
  for (const std::string& n : report.group_names) {
    std::string cell = n;
    if (cell.size() < 8) cell = std::string(8 - cell.size(), ' ') + cell;
    header += "  " + cell;
  }
  out += header + "\n";
  for (std::size_t i = 0; i < report.group_names.size(); ++i) {
    std::string line = report.group_names[i];
    pad_to(line, name_width + 2);
    for (std::size_t j = 0; j < report.group_names.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "  %8.3f", report.cle_matrix[i][j]);
      line += buf;
    }
    out += line + "\n";
  }
  return out;
}

void write_stat_csv(std::ostream& out, const StatReport& report) {
  std::string buf = "A,B,mean(A),mean(B),p\n";
  for (const PairwiseComparison& c : report.pairwise) {
    buf += c.a;
    buf += ',';
    buf += c.b;
    buf += ',';
    buf += fixed4(c.mean_a);
    buf += ',';
    buf += fixed4(c.mean_b);
    buf += ',';
    buf += sig6(c.p_value);
    buf += '\n';
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

namespace {

std::string sanitize_file_part(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

double sample_stddev(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace

std::vector<std::string> export_plot_data(const std::vector<RunRecord>& records,
                                          const std::string& out_dir) {
  if (records.empty()) throw std::invalid_argument("no records to export");
  std::filesystem::create_directories(out_dir);

  // (config, metric) -> index -> values across runs, per index kind.
  using SeriesKey = std::pair<std::string, std::string>;
  std::map<SeriesKey, std::map<long, std::vector<double>>> step_series;
  std::map<SeriesKey, std::map<long, std::vector<double>>> cycle_series;
  for (const RunRecord& r : records) {
    auto& bucket = r.index_kind == "cycle" ? cycle_series : step_series;
    bucket[{r.config, r.metric}][r.index].push_back(r.value);
  }

  std::vector<std::string> written;
  const auto emit = [&](const SeriesKey& key, const std::map<long, std::vector<double>>& series,
                        bool curve) {
    const std::string path = out_dir + "/" + sanitize_file_part(key.first) + "_" +
                             sanitize_file_part(key.second) +
                             (curve ? "_curve.csv" : "_cycles.csv");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write plot file: " + path);
    std::string buf = curve ? "steps,mean,stddev\n" : "cycle,value\n";
    for (const auto& [index, values] : series) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      buf += std::to_string(index);
      buf += ',';
      detail::append_double(buf, mean);
      if (curve) {
        buf += ',';
        detail::append_double(buf, sample_stddev(values, mean));
      }
      buf += '\n';
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw DataError("failed writing plot file: " + path);
    written.push_back(path);
  };

  for (const auto& [key, series] : step_series) emit(key, series, true);
  for (const auto& [key, series] : cycle_series) emit(key, series, false);
  return written;
}

}  // namespace rltest
