#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rltest/cycle.hpp"

namespace rltest {

// Column layout of a dataset file. Both start with
//   cycle_id,test_id,verdict,duration,age,verdict_history
// and the enriched layout appends numeric columns named e1..eM (M >= 1).
// verdict_history is one character per past verdict, most recent last
// ("0110"), or "-" when the test has no prior runs.
enum class DatasetSchema { simple, enriched };

DatasetSchema dataset_schema_from_string(const std::string& name);

struct LoadedDataset {
  std::vector<Cycle> cycles;  // ascending cycle_id; rows keep file order
  int enriched_dims = 0;
  int dropped_cycles = 0;  // cycles removed for having too few tests
  long rows = 0;           // data rows parsed (before dropping)
};

// Parses a dataset file. Cycles with fewer than min_cycle_size tests are
// dropped and counted. Throws DataError with the offending line number for
// malformed rows, duplicated (cycle_id, test_id) pairs, or a header that
// does not match the schema.
LoadedDataset load_dataset(const std::string& path, DatasetSchema schema, int min_cycle_size = 6);
LoadedDataset load_dataset(std::istream& in, DatasetSchema schema, int min_cycle_size = 6,
                           const std::string& origin = "<stream>");

// Writes cycles in the same format load_dataset reads. Every record must
// carry exactly enriched_dims extra values.
void write_dataset(std::ostream& out, const std::vector<Cycle>& cycles, int enriched_dims);
void write_dataset_file(const std::string& path, const std::vector<Cycle>& cycles,
                        int enriched_dims);

// Shape of a synthetic dataset.
struct DatasetProfile {
  int cycles = 0;
  long logs = 0;            // total test records across all cycles
  double fail_rate = 0.0;   // target fraction of failing records
  int failed_cycles = 0;    // cycles allowed to contain failures
  bool enriched = false;    // emit 3 extra feature columns
};

inline constexpr int kEnrichedColumns = 3;

// Synthesizes a dataset matching the profile: every cycle has at least 6
// tests, durations are log-normal, and failures follow a logistic model in
// the test's recent failure rate and normalized duration, with the bias
// calibrated so the overall failure frequency lands within 2 percentage
// points of profile.fail_rate. Identical profile and seed give an identical
// dataset. Throws ConfigError for infeasible profiles.
std::vector<Cycle> generate_dataset(const DatasetProfile& profile, std::uint64_t seed);

}  // namespace rltest
