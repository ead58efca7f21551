#pragma once

// Experiment harness: seeded verification sweeps that write one CSV row per
// sample and a summary JSON computed from the CSV read back from disk.
//
// Output layout under config.out:
//   <kind>.csv, <kind>_summary.json
//   diameter_doubling.csv           (second batch of the doubling check)
//   maxprinciple_violation_<id>.json (offending instances, if any)

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "s1mk/random_data.hpp"
#include "s1mk/serialization.hpp"

namespace s1mk {

enum class SweepKind { sandwich, diameter, uniqueness, maxprinciple, variational };

const char* to_string(SweepKind kind);
SweepKind sweep_kind_from_string(const std::string& name);

struct ExperimentConfig {
  SweepKind kind = SweepKind::sandwich;
  double p = 0.5;
  double q = 2.0;
  double lambda = 1.0;
  int n_samples = 1;
  std::uint64_t seed = 0;
  int grid = 256;
  std::filesystem::path out = "out";
  FKind f_kind = FKind::trig;

  // sandwich: extra (p, q) pairs evaluated on the same bodies, and whether
  // the eccentric-ellipse battery is appended.
  std::vector<std::pair<double, double>> pairs;
  bool battery = false;

  // diameter: also solve a second batch of n_samples and compare maxima.
  bool doubling = true;

  // uniqueness
  std::vector<double> eps_grid{0.01, 0.05, 0.1, 0.2, 0.4};
  int starts = 20;

  /// Throws Error(invalid_argument) when the parameters fall outside the
  /// range of the sweep kind.
  void validate() const;

  /// (p, q) plus `pairs`, without duplicates.
  std::vector<std::pair<double, double>> all_pairs() const;

  /// Missing keys keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;
};

/// Worker threads for sweeps: S1MK_THREADS if set and positive, otherwise
/// the hardware concurrency.
int worker_count();

/// Calls body(i) for i in [0, n) on worker_count() threads. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& body);

struct SweepResult {
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
  Json summary;
  bool passed = false;
};

SweepResult run_sweep(const ExperimentConfig& config);

SweepResult run_sandwich(const ExperimentConfig& config);
SweepResult run_diameter(const ExperimentConfig& config);
SweepResult run_uniqueness(const ExperimentConfig& config);
SweepResult run_maxprinciple(const ExperimentConfig& config);
SweepResult run_variational(const ExperimentConfig& config);

// Summaries from a CSV on disk. The sweeps call these on the files they
// just wrote.
Json summarize_sandwich(const CsvTable& table);
Json summarize_diameter(const CsvTable& first, const CsvTable& second, double baseline_max_h);
Json summarize_uniqueness(const CsvTable& table);
Json summarize_maxprinciple(const CsvTable& table);
Json summarize_variational(const CsvTable& table, double tolerance);

}  // namespace s1mk
