#pragma once

#include <string>
#include <vector>

#include "rltest/cycle.hpp"

namespace rltest {

// One scalar evaluation outcome.
struct MetricValue {
  enum class Kind { apfd, nrpa, bug_count, state_coverage, reward };
  Kind kind = Kind::nrpa;
  double value = 0.0;
};

std::string to_string(MetricValue::Kind kind);

// Ranking-position accumulation score of a proposed order against a
// reference order (higher is better; the reference scores highest).
// Both arguments must be permutations of the same non-empty id set.
double rpa(const Ranking& proposed, const Ranking& reference);

// rpa normalized by the reference order's own score; equals 1 exactly when
// proposed == reference.
double nrpa(const Ranking& proposed, const Ranking& reference);

// Average percentage of faults detected by a ranking over one cycle.
// The ranking must be a permutation of the cycle's test ids; throws
// std::invalid_argument("APFD undefined without failures") when the cycle
// has no failing test.
double apfd(const Ranking& ranking, const Cycle& cycle);

// Common-language effect size: probability that a random draw from a exceeds
// a random draw from b, counting ties as half.
double cle(const std::vector<double>& a, const std::vector<double>& b);

// APFD when the cycle has failures, NRPA against the optimal ranking
// otherwise. This is how rankings are scored during evaluation.
MetricValue ranking_metric(const Ranking& ranking, const Cycle& cycle);

}  // namespace rltest
