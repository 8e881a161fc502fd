// Copyright 2026 The alignmon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ALIGNMON_HARNESS_HPP_
#define ALIGNMON_HARNESS_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "alignmon/markov.hpp"
#include "alignmon/monitors.hpp"

namespace alignmon {

enum class Scenario { kAverage, kDifferential, kWeighted, kCoverage, kSweep, kBench, kTable };
enum class ReferenceKind { kEnvironment, kExpert, kGray, kBlack, kNone };
enum class WeightsKind { kAuto, kUnit, kFairness, kSafety };
enum class OutputFormat { kCsv, kJsonl };

std::string_view scenario_name(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;
std::string_view reference_name(ReferenceKind r) noexcept;
std::optional<ReferenceKind> parse_reference(std::string_view name) noexcept;

struct SweepConfig {
  std::string parameter = "mean";  // "mean" or "sd"
  double from = 30.0;
  double to = 70.0;
  double step = 1.0;
  double env_mean = 50.0;
  double env_sd = 5.0;
  double model_mean = 50.0;  // held fixed while sweeping sd
  double model_sd = 5.0;     // held fixed while sweeping mean
  std::size_t bins = 100;
};

struct BenchConfig {
  std::vector<std::size_t> sizes = {10, 100, 1000, 10000, 100000, 1000000};
  std::size_t trace = 10000;
  std::size_t block = 100;        // iterations per timed block
  std::size_t core_repeats = 50;  // fresh-core repetitions for the early/late split
};

struct TableConfig {
  std::vector<std::string> benchmarks;  // empty: every bundled chain
  std::vector<CorruptionKind> corruptions = {CorruptionKind::kAdditiveNoise,
                                             CorruptionKind::kInvert};
  std::vector<ReferenceKind> references = {ReferenceKind::kEnvironment, ReferenceKind::kExpert,
                                           ReferenceKind::kGray, ReferenceKind::kBlack};
  bool records = false;  // emit per-run records instead of per-cell summaries
};

/// Everything an experiment needs. Environments are bundled chain names, the
/// toys "fairness", "safety" and "bernoulli", or chain file paths.
struct ExperimentConfig {
  Scenario scenario = Scenario::kAverage;
  std::string environment = "die";
  std::optional<std::string> model;  // "environment", a bundled name or a path
  std::optional<CorruptionKind> corruption;
  CorruptionParams corruption_params;
  ReferenceKind reference = ReferenceKind::kNone;
  RuleKind rule = RuleKind::kBrier;
  DegeneratePenalty penalty = DegeneratePenalty::kUpperBound;
  WeightsKind weights = WeightsKind::kAuto;
  Scenario coverage_monitor = Scenario::kAverage;
  double delta = 0.05;
  std::size_t steps = 1000;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  double bscc_rho = 0.01;  // applied to bundled and file environments
  double bernoulli_env = 0.35;
  double bernoulli_model = 0.6;
  std::optional<std::vector<double>> safety_s6;
  OutputFormat format = OutputFormat::kCsv;
  std::string output;  // empty: the caller's sink
  unsigned threads = 0;
  SweepConfig sweep;
  BenchConfig bench;
  TableConfig table;

  /// Throws InvalidParams for out-of-range values and IoError for missing
  /// chain files.
  void validate() const;
};

/// Overlays the fields present in a JSON object onto `config`. Unknown keys
/// and ill-typed values throw InvalidParams; unparsable text throws
/// SyntaxError.
void merge_config_json(ExperimentConfig& config, std::string_view json_text);
std::string config_to_json(const ExperimentConfig& config);

/// Resolved chains for one experiment.
struct Setup {
  MarkovChain env;
  MarkovChain model;
  std::optional<MarkovChain> reference;
  std::shared_ptr<const WeightFunctions> weights;
};

Setup build_setup(const ExperimentConfig& config);
MarkovChain reference_chain(const MarkovChain& env, ReferenceKind kind);
MarkovChain load_environment(std::string_view source, double bscc_rho);

/// Per-run seeds: trajectories use stream 1, corruptions stream 2.
std::uint64_t run_seed(std::uint64_t seed, std::string_view benchmark, std::size_t run);
std::uint64_t corruption_seed(std::uint64_t seed, std::string_view benchmark,
                              CorruptionKind kind);

/// Density at 0..bins-1, truncated and renormalized.
Distribution discretized_gaussian(double mean, double sd, std::size_t bins);

struct SweepRow {
  double parameter;
  double expected_brier;
  double expected_spherical;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

struct MonitorRecord {
  std::size_t run = 0;
  Verdict verdict;
  std::optional<double> truth;
  std::optional<double> ref_environment;
  std::optional<double> ref_gray;
  std::optional<double> ref_black;
  std::optional<DecisionValue> decision;
};

/// One record per run and step, ordered by run then step.
std::vector<MonitorRecord> run_monitoring(const ExperimentConfig& config);

struct DecisionRecord {
  std::string benchmark;
  CorruptionKind corruption;
  ReferenceKind reference;
  std::size_t run;
  DecisionValue decision;
  std::optional<std::size_t> at_step;
};

struct DecisionCell {
  std::string benchmark;
  CorruptionKind corruption;
  ReferenceKind reference;
  DecisionValue decision;  // majority; ties are undecided
  double mean_at_step;     // undecided runs count as `steps`
  double sd_at_step;
  std::size_t top = 0;
  std::size_t bot = 0;
  std::size_t undecided = 0;
};

struct DecisionTable {
  std::vector<DecisionRecord> records;
  std::vector<DecisionCell> cells;
};

DecisionTable run_decision_table(const ExperimentConfig& config);

struct CoverageReport {
  Scenario monitor;
  std::size_t runs;
  std::size_t violations;
  double rate;
  double ci_lo;
  double ci_hi;
  double delta;
};

/// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

CoverageReport run_coverage(const ExperimentConfig& config);

// Per-iteration nanoseconds: mean and sd across timed blocks.
struct BenchRow {
  std::size_t support;
  double total_ns;
  double total_sd_ns;
  double scoring_ns;
  double scoring_sd_ns;
  double core_ns;
  double core_sd_ns;
  double early_core_ns;  // median first block
  double late_core_ns;   // median last block
};

std::vector<BenchRow> run_bench(const ExperimentConfig& config);

using LineSink = std::function<void(std::string_view)>;

/// Runs the configured scenario and writes CSV or JSON lines (header first
/// for CSV). Column sets are listed in docs/formats.md.
void run_experiment(const ExperimentConfig& config, const LineSink& sink);

/// Line-at-a-time monitor for the stdin/stdout protocol. Records look like
/// {"p": [...] or {"idx": prob}, "x": k, "pref": ...}.
class StreamMonitor {
 public:
  enum class Mode { kAverage, kDifferential };

  StreamMonitor(Mode mode, RuleKind rule, double delta);

  /// Returns the output record for one input line. Throws MalformedRecord,
  /// DimensionMismatch or InvalidProbability; a failed line leaves the
  /// monitor unchanged.
  std::string push(std::string_view line);

  std::size_t lines() const noexcept { return lines_; }

 private:
  Mode mode_;
  std::optional<AverageMonitor> average_;
  std::optional<DifferentialMonitor> differential_;
  std::optional<std::size_t> width_;
  std::size_t lines_ = 0;
};

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0: hardware
/// concurrency). The first exception is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= n || failure) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace alignmon

#endif  // ALIGNMON_HARNESS_HPP_
