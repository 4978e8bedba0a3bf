#include "rltest/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rltest {

bool Cycle::has_failures() const { return failure_count() > 0; }

int Cycle::failure_count() const {
  int n = 0;
  for (const auto& t : tests) n += t.verdict == 1 ? 1 : 0;
  return n;
}

Ranking optimal_ranking(const Cycle& cycle) {
  if (cycle.tests.empty()) throw std::invalid_argument("empty cycle");
  std::vector<const TestCaseRecord*> order;
  order.reserve(cycle.tests.size());
  for (const auto& t : cycle.tests) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](const TestCaseRecord* a, const TestCaseRecord* b) {
              if (a->verdict != b->verdict) return a->verdict > b->verdict;
              if (a->duration != b->duration) return a->duration < b->duration;
              return a->test_id < b->test_id;
            });
  Ranking ranking;
  ranking.reserve(order.size());
  for (const auto* t : order) ranking.push_back(t->test_id);
  return ranking;
}

long episode_budget(int n_tests) {
  if (n_tests <= 0) throw std::invalid_argument("episode budget requires a positive test count");
  if (n_tests == 1) return 200;
  const double raw = 200.0 * n_tests * std::log2(static_cast<double>(n_tests));
  return static_cast<long>(std::ceil(raw));
}

namespace {

struct ColumnRange {
  double lo = 0.0, hi = 0.0;
  double normalize(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

ColumnRange column_range(const Cycle& cycle, auto&& get) {
  ColumnRange r{get(cycle.tests.front()), get(cycle.tests.front())};
  for (const auto& t : cycle.tests) {
    r.lo = std::min(r.lo, get(t));
    r.hi = std::max(r.hi, get(t));
  }
  return r;
}

double history_failure_rate(const TestCaseRecord& t) {
  if (t.verdict_history.empty()) return 0.0;
  const int window = std::min<int>(kHistoryWindow, static_cast<int>(t.verdict_history.size()));
  int fails = 0;
  for (int i = 0; i < window; ++i)
    fails += t.verdict_history[t.verdict_history.size() - 1 - i] != 0 ? 1 : 0;
  return static_cast<double>(fails) / window;
}

FeatureVector build_features(const TestCaseRecord& t, const ColumnRange& dur,
                             const ColumnRange& age,
                             const std::vector<ColumnRange>& extra) {
  FeatureVector f;
  f.reserve(4 + extra.size());
  f.push_back(dur.normalize(t.duration));
  f.push_back(age.normalize(static_cast<double>(t.age)));
  f.push_back(history_failure_rate(t));
  f.push_back(t.verdict_history.empty() ? 0.0 : (t.verdict_history.back() != 0 ? 1.0 : 0.0));
  for (std::size_t i = 0; i < extra.size(); ++i) {
    if (i >= t.extra.size())
      throw std::invalid_argument("record has fewer enriched columns than its cycle");
    f.push_back(extra[i].normalize(t.extra[i]));
  }
  return f;
}

}  // namespace

std::vector<FeatureVector> cycle_features(const Cycle& cycle) {
  if (cycle.tests.empty()) throw std::invalid_argument("empty cycle");
  const ColumnRange dur = column_range(cycle, [](const TestCaseRecord& t) { return t.duration; });
  const ColumnRange age =
      column_range(cycle, [](const TestCaseRecord& t) { return static_cast<double>(t.age); });
  const std::size_t n_extra = cycle.tests.front().extra.size();
  std::vector<ColumnRange> extra;
  extra.reserve(n_extra);
  for (std::size_t i = 0; i < n_extra; ++i) {
    extra.push_back(column_range(cycle, [i](const TestCaseRecord& t) {
      return i < t.extra.size() ? t.extra[i] : throw std::invalid_argument(
                                                   "inconsistent enriched column count in cycle");
    }));
  }
  std::vector<FeatureVector> out;
  out.reserve(cycle.tests.size());
  for (const auto& t : cycle.tests) out.push_back(build_features(t, dur, age, extra));
  return out;
}

FeatureVector feature_vector(const TestCaseRecord& record, const Cycle& cycle) {
  for (std::size_t i = 0; i < cycle.tests.size(); ++i) {
    if (cycle.tests[i].test_id == record.test_id) return cycle_features(cycle)[i];
  }
  throw std::invalid_argument("record not in cycle");
}

int feature_size(int enriched_dims) { return 4 + enriched_dims; }

}  // namespace rltest
