#pragma once

#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "rltest/cycle.hpp"
#include "rltest/rng.hpp"

namespace testutil {

// Cycle from (test_id, verdict, duration) triples, optional shared history.
inline rltest::Cycle make_cycle(int cycle_id,
                                const std::vector<std::tuple<int, int, double>>& rows) {
  rltest::Cycle c;
  c.cycle_id = cycle_id;
  for (const auto& [id, verdict, duration] : rows) {
    rltest::TestCaseRecord t;
    t.test_id = id;
    t.cycle_id = cycle_id;
    t.verdict = verdict;
    t.duration = duration;
    c.tests.push_back(t);
  }
  return c;
}

// Random cycle with k tests, each failing with probability fail_p.
inline rltest::Cycle random_cycle(int cycle_id, int k, double fail_p, rltest::Rng& rng) {
  rltest::Cycle c;
  c.cycle_id = cycle_id;
  for (int i = 0; i < k; ++i) {
    rltest::TestCaseRecord t;
    t.test_id = i + 1;
    t.cycle_id = cycle_id;
    t.verdict = rng.uniform() < fail_p ? 1 : 0;
    t.duration = rng.uniform(0.1, 9.0);
    t.age = rng.uniform_int(20);
    const int hist = rng.uniform_int(6);
    for (int h = 0; h < hist; ++h) t.verdict_history.push_back(rng.uniform_int(2));
    c.tests.push_back(t);
  }
  return c;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("rltest_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil
