#pragma once

#include <string>
#include <vector>

namespace rltest {

using Vec = std::vector<double>;

// One execution log entry: a test case as it appeared in one CI cycle.
struct TestCaseRecord {
  int test_id = 0;
  int cycle_id = 0;
  int verdict = 0;                   // 1 = failed, 0 = passed
  double duration = 0.0;             // average execution time, seconds
  int age = 0;                       // number of cycles since first appearance
  std::vector<int> verdict_history;  // previous verdicts, most recent last
  std::vector<double> extra;         // optional enriched feature columns
};

// All test cases that ran in one CI cycle.
struct Cycle {
  int cycle_id = 0;
  std::vector<TestCaseRecord> tests;

  bool has_failures() const;
  int failure_count() const;
};

// A priority order over one cycle's tests: test ids, highest priority first.
using Ranking = std::vector<int>;

using FeatureVector = std::vector<double>;

// Number of verdict-history entries that contribute to the failure-rate
// feature.
inline constexpr int kHistoryWindow = 4;

// Reference order for a cycle: failing tests first, then ascending duration,
// ties broken by ascending test id. Throws std::invalid_argument on an empty
// cycle.
Ranking optimal_ranking(const Cycle& cycle);

// Training episode budget for a cycle with n tests: ceil(200 * n * log2(n)),
// floored at 200 so a single-test cycle still trains. Throws
// std::invalid_argument for n <= 0.
long episode_budget(int n_tests);

// Observation features for one test, normalized within its cycle:
//   [duration, age, failure rate over the last kHistoryWindow verdicts,
//    most recent verdict]
// followed by the cycle-normalized enriched columns when present. Duration,
// age and enriched columns are min-max normalized over the cycle; a
// degenerate column (max == min) maps to 0. Every component lies in [0, 1].
// Throws std::invalid_argument if the record's test id is not in the cycle.
FeatureVector feature_vector(const TestCaseRecord& record, const Cycle& cycle);

// Features for every test of the cycle, in cycle order, sharing one
// normalization pass.
std::vector<FeatureVector> cycle_features(const Cycle& cycle);

// Number of components feature vectors have for a cycle with the given
// enriched column count.
int feature_size(int enriched_dims);

}  // namespace rltest
