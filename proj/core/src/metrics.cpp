#include "rltest/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace rltest {

std::string to_string(MetricValue::Kind kind) {
  switch (kind) {
    case MetricValue::Kind::apfd: return "apfd";
    case MetricValue::Kind::nrpa: return "nrpa";
    case MetricValue::Kind::bug_count: return "bugs";
    case MetricValue::Kind::state_coverage: return "state_coverage";
    case MetricValue::Kind::reward: return "reward";
  }
  return "unknown";
}

namespace {

// 1-based position of every id; rejects duplicates.
std::unordered_map<int, int> positions(const Ranking& r, const char* what) {
  std::unordered_map<int, int> pos;
  pos.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!pos.emplace(r[i], static_cast<int>(i) + 1).second)
      throw std::invalid_argument(std::string(what) + " contains a duplicate id");
  }
  return pos;
}

}  // namespace

double rpa(const Ranking& proposed, const Ranking& reference) {
  if (proposed.empty() || reference.empty())
    throw std::invalid_argument("rpa requires non-empty rankings");
  if (proposed.size() != reference.size())
    throw std::invalid_argument("rpa rankings must have equal length");
  const auto prop_pos = positions(proposed, "proposed ranking");
  const auto ref_pos = positions(reference, "reference ranking");
  const int k = static_cast<int>(proposed.size());
  double total = 0.0;
  for (const auto& [id, p_ref] : ref_pos) {
    const auto it = prop_pos.find(id);
    if (it == prop_pos.end())
      throw std::invalid_argument("rankings must cover the same id set");
    const int p_prop = it->second;
    // The inner accumulation from position p_prop through k contributes the
    // reference weight (k - p_ref + 1) once per remaining slot.
    total += static_cast<double>(k - p_prop + 1) * static_cast<double>(k - p_ref + 1);
  }
  const double denom = static_cast<double>(k) * k * (k + 1) / 2.0;
  return total / denom;
}

double nrpa(const Ranking& proposed, const Ranking& reference) {
  return rpa(proposed, reference) / rpa(reference, reference);
}

double apfd(const Ranking& ranking, const Cycle& cycle) {
  if (cycle.tests.empty()) throw std::invalid_argument("empty cycle");
  if (ranking.size() != cycle.tests.size())
    throw std::invalid_argument("ranking must cover the cycle's tests");
  const auto pos = positions(ranking, "ranking");
  const int k = static_cast<int>(cycle.tests.size());
  const int m = cycle.failure_count();
  if (m == 0) throw std::invalid_argument("APFD undefined without failures");
  double weighted = 0.0;
  for (const auto& t : cycle.tests) {
    const auto it = pos.find(t.test_id);
    if (it == pos.end())
      throw std::invalid_argument("ranking must cover the cycle's tests");
    weighted += static_cast<double>(it->second) * t.verdict;
  }
  return 1.0 - weighted / (static_cast<double>(k) * m) + 1.0 / (2.0 * k);
}

double cle(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("cle requires non-empty samples");
  double score = 0.0;
  for (double x : a) {
    for (double y : b) {
      if (x > y)
        score += 1.0;
      else if (x == y)
        score += 0.5;
    }
  }
  return score / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

MetricValue ranking_metric(const Ranking& ranking, const Cycle& cycle) {
  if (cycle.has_failures()) return {MetricValue::Kind::apfd, apfd(ranking, cycle)};
  return {MetricValue::Kind::nrpa, nrpa(ranking, optimal_ranking(cycle))};
}

}  // namespace rltest
