#include "rltest/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "rltest/errors.hpp"
#include "rltest/rng.hpp"
#include "text_num.hpp"

namespace rltest {

namespace {

constexpr const char* kBaseColumns[] = {"cycle_id", "test_id",        "verdict",
                                        "duration", "age",            "verdict_history"};
constexpr int kBaseColumnCount = 6;

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

int parse_int_field(const std::string& field, const std::string& origin, long line,
                    const char* name) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    row_error(origin, line, std::string("invalid ") + name + " '" + field + "'");
  return value;
}

double parse_double_field(const std::string& field, const std::string& origin, long line,
                          const char* name) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(value))
    row_error(origin, line, std::string("invalid ") + name + " '" + field + "'");
  return value;
}

int expected_fields(DatasetSchema schema, int enriched_dims) {
  return schema == DatasetSchema::simple ? kBaseColumnCount : kBaseColumnCount + enriched_dims;
}

int validate_header(const std::string& line, DatasetSchema schema, const std::string& origin) {
  const std::vector<std::string> cols = split_fields(line);
  const auto fail = [&](const std::string& what) { row_error(origin, 1, what); };
  if (static_cast<int>(cols.size()) < kBaseColumnCount) fail("header does not match schema");
  for (int i = 0; i < kBaseColumnCount; ++i)
    if (cols[static_cast<std::size_t>(i)] != kBaseColumns[i])
      fail("header column " + std::to_string(i + 1) + " must be '" + kBaseColumns[i] + "'");
  const int extras = static_cast<int>(cols.size()) - kBaseColumnCount;
  if (schema == DatasetSchema::simple && extras != 0)
    fail("simple schema takes exactly 6 columns");
  if (schema == DatasetSchema::enriched && extras < 1)
    fail("enriched schema needs at least one extra column");
  for (int i = 0; i < extras; ++i) {
    const std::string want = "e" + std::to_string(i + 1);
    if (cols[static_cast<std::size_t>(kBaseColumnCount + i)] != want)
      fail("extra column " + std::to_string(i + 1) + " must be named '" + want + "'");
  }
  return extras;
}

}  // namespace

DatasetSchema dataset_schema_from_string(const std::string& name) {
  if (name == "simple") return DatasetSchema::simple;
  if (name == "enriched") return DatasetSchema::enriched;
  throw ConfigError("unknown dataset schema: " + name);
}

LoadedDataset load_dataset(std::istream& in, DatasetSchema schema, int min_cycle_size,
                           const std::string& origin) {
  std::string line;
  long line_no = 0;

  // Header.
  int enriched_dims = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    enriched_dims = validate_header(line, schema, origin);
    break;
  }
  if (enriched_dims < 0) throw DataError(origin + ": empty dataset file");

  struct CycleRows {
    Cycle cycle;
    std::unordered_set<int> seen_ids;
  };
  std::map<int, CycleRows> by_cycle;
  const int n_fields = expected_fields(schema, enriched_dims);
  long rows = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != n_fields)
      row_error(origin, line_no,
                "expected " + std::to_string(n_fields) + " fields, got " +
                    std::to_string(fields.size()));

    TestCaseRecord rec;
    rec.cycle_id = parse_int_field(fields[0], origin, line_no, "cycle_id");
    rec.test_id = parse_int_field(fields[1], origin, line_no, "test_id");
    rec.verdict = parse_int_field(fields[2], origin, line_no, "verdict");
    rec.duration = parse_double_field(fields[3], origin, line_no, "duration");
    rec.age = parse_int_field(fields[4], origin, line_no, "age");
    if (rec.cycle_id < 0) row_error(origin, line_no, "cycle_id must be non-negative");
    if (rec.test_id < 0) row_error(origin, line_no, "test_id must be non-negative");
    if (rec.verdict != 0 && rec.verdict != 1)
      row_error(origin, line_no, "verdict must be 0 or 1");
    if (rec.duration < 0.0) row_error(origin, line_no, "duration must be non-negative");
    if (rec.age < 0) row_error(origin, line_no, "age must be non-negative");

    const std::string& hist = fields[5];
    if (hist != "-") {
      if (hist.empty()) row_error(origin, line_no, "verdict_history must be 0/1 digits or '-'");
      rec.verdict_history.reserve(hist.size());
      for (char c : hist) {
        if (c != '0' && c != '1')
          row_error(origin, line_no, "verdict_history must be 0/1 digits or '-'");
        rec.verdict_history.push_back(c - '0');
      }
    }

    rec.extra.reserve(static_cast<std::size_t>(enriched_dims));
    for (int e = 0; e < enriched_dims; ++e)
      rec.extra.push_back(parse_double_field(fields[static_cast<std::size_t>(kBaseColumnCount + e)],
                                             origin, line_no,
                                             ("e" + std::to_string(e + 1)).c_str()));

    CycleRows& bucket = by_cycle[rec.cycle_id];
    bucket.cycle.cycle_id = rec.cycle_id;
    if (!bucket.seen_ids.insert(rec.test_id).second)
      row_error(origin, line_no,
                "duplicate test " + std::to_string(rec.test_id) + " in cycle " +
                    std::to_string(rec.cycle_id));
    bucket.cycle.tests.push_back(std::move(rec));
    ++rows;
  }
  if (rows == 0) throw DataError(origin + ": dataset contains no test records");

  LoadedDataset out;
  out.enriched_dims = enriched_dims;
  out.rows = rows;
  for (auto& entry : by_cycle) {
    Cycle& cycle = entry.second.cycle;
    if (static_cast<int>(cycle.tests.size()) < min_cycle_size) {
      ++out.dropped_cycles;
    } else {
      out.cycles.push_back(std::move(cycle));
    }
  }
  return out;
}

LoadedDataset load_dataset(const std::string& path, DatasetSchema schema, int min_cycle_size) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return load_dataset(in, schema, min_cycle_size, path);
}

void write_dataset(std::ostream& out, const std::vector<Cycle>& cycles, int enriched_dims) {
  std::string buf = "cycle_id,test_id,verdict,duration,age,verdict_history";
  for (int e = 1; e <= enriched_dims; ++e) {
    buf += ",e";
    buf += std::to_string(e);
  }
  buf += '\n';
  for (const Cycle& cycle : cycles) {
    for (const TestCaseRecord& rec : cycle.tests) {
      if (static_cast<int>(rec.extra.size()) != enriched_dims)
        throw std::invalid_argument("record extra-column count does not match enriched_dims");
      buf += std::to_string(rec.cycle_id);
      buf += ',';
      buf += std::to_string(rec.test_id);
      buf += ',';
      buf += std::to_string(rec.verdict);
      buf += ',';
      detail::append_double(buf, rec.duration);
      buf += ',';
      buf += std::to_string(rec.age);
      buf += ',';
      if (rec.verdict_history.empty()) {
        buf += '-';
      } else {
        for (int v : rec.verdict_history) buf += static_cast<char>('0' + v);
      }
      for (double e : rec.extra) {
        buf += ',';
        detail::append_double(buf, e);
      }
      buf += '\n';
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    buf.clear();
  }
}

void write_dataset_file(const std::string& path, const std::vector<Cycle>& cycles,
                        int enriched_dims) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path);
  write_dataset(out, cycles, enriched_dims);
  out.flush();
  if (!out) throw DataError("failed writing dataset file: " + path);
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

namespace {

constexpr double kHistoryWeight = 2.5;
constexpr double kDurationWeight = 1.5;

struct PoolTest {
  int id = 0;
  double base_duration = 0.0;
  double distractor = 0.0;  // static noise column for enriched datasets
  int first_cycle = -1;
  std::vector<int> history;
};

double recent_failure_rate(const std::vector<int>& history) {
  if (history.empty()) return 0.0;
  const std::size_t window = std::min<std::size_t>(history.size(), kHistoryWindow);
  int fails = 0;
  for (std::size_t i = history.size() - window; i < history.size(); ++i) fails += history[i];
  return static_cast<double>(fails) / static_cast<double>(window);
}

// One full deterministic pass for a given logistic bias. The RNG request
// sequence is independent of the bias, so calibration trials with the same
// seed share every structural draw (sizes, pool, durations, selections).
std::vector<Cycle> generate_with_bias(const DatasetProfile& p, std::uint64_t seed, double bias,
                                      long* failures_out) {
  Rng rng(seed);
  const int n = p.cycles;

  // Cycle sizes: even split of the log budget, then random transfers for
  // variety, never dropping below 6.
  std::vector<int> sizes(static_cast<std::size_t>(n));
  const long base = p.logs / n;
  const long rem = p.logs % n;
  for (int i = 0; i < n; ++i)
    sizes[static_cast<std::size_t>(i)] = static_cast<int>(base + (i < rem ? 1 : 0));
  for (int t = 0; t < 2 * n; ++t) {
    const auto a = static_cast<std::size_t>(rng.uniform_int(n));
    const auto b = static_cast<std::size_t>(rng.uniform_int(n));
    if (a != b && sizes[a] > 6) {
      --sizes[a];
      ++sizes[b];
    }
  }
  const int max_size = *std::max_element(sizes.begin(), sizes.end());

  // Test pool, slightly larger than the biggest cycle so membership varies.
  const int pool_size = std::max(max_size + std::max(2, max_size / 5), 6);
  std::vector<PoolTest> pool(static_cast<std::size_t>(pool_size));
  for (int i = 0; i < pool_size; ++i) {
    pool[static_cast<std::size_t>(i)].id = i + 1;
    pool[static_cast<std::size_t>(i)].base_duration = std::exp(0.5 * rng.normal());
    pool[static_cast<std::size_t>(i)].distractor = rng.uniform();
  }
  double dur_lo = pool[0].base_duration, dur_hi = pool[0].base_duration;
  for (const PoolTest& t : pool) {
    dur_lo = std::min(dur_lo, t.base_duration);
    dur_hi = std::max(dur_hi, t.base_duration);
  }
  const double dur_span = dur_hi - dur_lo;

  // Which cycles may contain failures.
  std::vector<int> cycle_idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cycle_idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < p.failed_cycles; ++i) {
    const int j = i + rng.uniform_int(n - i);
    std::swap(cycle_idx[static_cast<std::size_t>(i)], cycle_idx[static_cast<std::size_t>(j)]);
  }
  std::vector<char> may_fail(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < p.failed_cycles; ++i) may_fail[static_cast<std::size_t>(cycle_idx[i])] = 1;

  std::vector<Cycle> cycles;
  cycles.reserve(static_cast<std::size_t>(n));
  long failures = 0;
  std::vector<int> pick(static_cast<std::size_t>(pool_size));

  for (int c = 0; c < n; ++c) {
    const int k = sizes[static_cast<std::size_t>(c)];
    for (int i = 0; i < pool_size; ++i) pick[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + rng.uniform_int(pool_size - i);
      std::swap(pick[static_cast<std::size_t>(i)], pick[static_cast<std::size_t>(j)]);
    }
    std::sort(pick.begin(), pick.begin() + k);

    Cycle cycle;
    cycle.cycle_id = c + 1;
    cycle.tests.reserve(static_cast<std::size_t>(k));
    std::vector<double> fail_prob(static_cast<std::size_t>(k), 0.0);
    const bool allowed = may_fail[static_cast<std::size_t>(c)] != 0 && p.fail_rate > 0.0;

    for (int i = 0; i < k; ++i) {
      PoolTest& t = pool[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
      if (t.first_cycle < 0) t.first_cycle = c;

      TestCaseRecord rec;
      rec.cycle_id = cycle.cycle_id;
      rec.test_id = t.id;
      rec.age = c - t.first_cycle;
      rec.duration = t.base_duration * std::exp(0.1 * rng.normal());
      rec.verdict_history = t.history;

      const double dur_norm = dur_span > 0.0 ? (t.base_duration - dur_lo) / dur_span : 0.0;
      const double z =
          kHistoryWeight * recent_failure_rate(t.history) + kDurationWeight * dur_norm + bias;
      const double prob = allowed ? 1.0 / (1.0 + std::exp(-z)) : 0.0;
      fail_prob[static_cast<std::size_t>(i)] = prob;
      rec.verdict = rng.uniform() < prob ? 1 : 0;

      if (p.enriched) {
        const double signal = std::clamp(prob + 0.05 * rng.normal(), 0.0, 1.0);
        rec.extra = {signal, t.distractor, rng.uniform()};
      }
      cycle.tests.push_back(std::move(rec));
    }

    if (allowed) {
      bool any = false;
      for (const TestCaseRecord& rec : cycle.tests) any = any || rec.verdict == 1;
      if (!any) {
        // Guarantee the designated cycle actually fails: flip the likeliest.
        std::size_t best = 0;
        for (std::size_t i = 1; i < fail_prob.size(); ++i)
          if (fail_prob[i] > fail_prob[best]) best = i;
        cycle.tests[best].verdict = 1;
      }
    }

    for (int i = 0; i < k; ++i) {
      PoolTest& t = pool[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
      t.history.push_back(cycle.tests[static_cast<std::size_t>(i)].verdict);
      failures += cycle.tests[static_cast<std::size_t>(i)].verdict;
    }
    cycles.push_back(std::move(cycle));
  }

  if (failures_out != nullptr) *failures_out = failures;
  return cycles;
}

}  // namespace

std::vector<Cycle> generate_dataset(const DatasetProfile& profile, std::uint64_t seed) {
  if (profile.cycles < 1) throw ConfigError("infeasible profile: needs at least one cycle");
  if (profile.logs < 6L * profile.cycles)
    throw ConfigError("infeasible profile: needs at least 6 logs per cycle");
  if (profile.fail_rate < 0.0 || profile.fail_rate > 1.0)
    throw ConfigError("infeasible profile: fail_rate must lie in [0, 1]");
  if (profile.failed_cycles < 0 || profile.failed_cycles > profile.cycles)
    throw ConfigError("infeasible profile: failed_cycles must lie in [0, cycles]");
  if ((profile.fail_rate > 0.0) != (profile.failed_cycles > 0))
    throw ConfigError(
        "infeasible profile: fail_rate and failed_cycles must be zero or non-zero together");

  if (profile.fail_rate == 0.0) return generate_with_bias(profile, seed, 0.0, nullptr);

  // The empirical rate is monotone in the bias (same seed, same structural
  // draws), so bisect.
  double lo = -20.0, hi = 20.0;
  double best_bias = 0.0;
  double best_diff = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    long failures = 0;
    generate_with_bias(profile, seed, mid, &failures);
    const double rate = static_cast<double>(failures) / static_cast<double>(profile.logs);
    const double diff = std::abs(rate - profile.fail_rate);
    if (diff < best_diff) {
      best_diff = diff;
      best_bias = mid;
    }
    if (rate < profile.fail_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_diff > 0.02)
    throw ConfigError("infeasible profile: cannot reach fail_rate " +
                      detail::double_to_text(profile.fail_rate) +
                      " (closest achievable differs by " + detail::double_to_text(best_diff) +
                      ")");
  return generate_with_bias(profile, seed, best_bias, nullptr);
}

}  // namespace rltest
