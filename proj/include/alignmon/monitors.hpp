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

#ifndef ALIGNMON_MONITORS_HPP_
#define ALIGNMON_MONITORS_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "alignmon/confseq.hpp"
#include "alignmon/dist.hpp"
#include "alignmon/scoring.hpp"
#include "alignmon/weights.hpp"

namespace alignmon {

/// Per-step monitor output. A verdict without information (weighted monitor
/// before the first positive prediction weight) has an infinite interval.
struct Verdict {
  std::size_t step = 0;
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool informative = true;

  bool contains(double value) const noexcept { return lo <= value && value <= hi; }
};

enum class DecisionValue { kUndecided, kModelBetter, kReferenceBetter };

/// "top" (model better), "bot" (reference better) or "undecided".
std::string_view decision_name(DecisionValue value) noexcept;

struct Decision {
  DecisionValue value = DecisionValue::kUndecided;
  std::optional<std::size_t> at_step;
};

/// First crossing of zero by a differential interval; sticky once made.
class DecisionTracker {
 public:
  void observe(const Verdict& v) noexcept;
  const Decision& decision() const noexcept { return decision_; }

 private:
  Decision decision_;
};

Decision diff_decision(std::span<const Verdict> verdicts);

/// Average alignment monitor: O(1) state, one score evaluation per step.
class AverageMonitor {
 public:
  AverageMonitor(ScoringRule rule, double delta);

  Verdict next(const Distribution& prediction, Outcome observed);

  const MonitorCore& core() const noexcept { return core_; }
  const ScoringRule& rule() const noexcept { return rule_; }
  std::size_t steps() const noexcept { return steps_; }
  double last_score() const noexcept { return last_score_; }

 private:
  ScoringRule rule_;
  MonitorCore core_;
  std::size_t steps_ = 0;
  double last_score_ = 0.0;
};

/// Differential alignment monitor: interval estimate of the average expected
/// score of the model minus that of the reference. sigma = 2 (b - a).
class DifferentialMonitor {
 public:
  DifferentialMonitor(ScoringRule rule, double delta);

  Verdict next(const Distribution& prediction, const Distribution& reference, Outcome observed);

  const MonitorCore& core() const noexcept { return core_; }
  const Decision& decision() const noexcept { return tracker_.decision(); }
  std::size_t steps() const noexcept { return steps_; }
  double last_score() const noexcept { return last_score_; }

 private:
  ScoringRule rule_;
  MonitorCore core_;
  DecisionTracker tracker_;
  std::size_t steps_ = 0;
  double last_score_ = 0.0;
};

/// Weighted alignment monitor. Each step scores alpha(z) * l_{beta(z)}(y, x)
/// and advances the weighted time by alpha(z), where z is the observed
/// history. With Markovian weights only the last state is retained.
class WeightedMonitor {
 public:
  WeightedMonitor(RuleKind base, double delta, std::shared_ptr<const WeightFunctions> weights,
                  DegeneratePenalty penalty = DegeneratePenalty::kUpperBound);

  Verdict next(const Distribution& prediction, Outcome observed);

  const MonitorCore& core() const noexcept { return core_; }
  std::size_t steps() const noexcept { return steps_; }
  double last_score() const noexcept { return last_score_; }
  double last_alpha() const noexcept { return last_alpha_; }

  /// Number of states retained for the weight functions.
  std::size_t history_size() const noexcept;
  std::size_t history_capacity() const noexcept { return history_.capacity(); }

 protected:
  WeightedMonitor(RuleKind base, double delta, std::shared_ptr<const WeightFunctions> weights,
                  DegeneratePenalty penalty, double sigma_scale);

  std::span<const Outcome> history_view() const noexcept;
  void remember(Outcome observed);

  RuleKind base_;
  std::shared_ptr<const WeightFunctions> weights_;
  DegeneratePenalty penalty_;
  MonitorCore core_;
  std::vector<Outcome> history_;
  std::optional<Outcome> last_state_;
  std::size_t steps_ = 0;
  double last_score_ = 0.0;
  double last_alpha_ = 0.0;
};

/// Weighted score difference between a model and a reference under the same
/// weights; sigma = 2 alpha_cap beta_cap (b - a).
class WeightedDifferentialMonitor : private WeightedMonitor {
 public:
  WeightedDifferentialMonitor(RuleKind base, double delta,
                              std::shared_ptr<const WeightFunctions> weights,
                              DegeneratePenalty penalty = DegeneratePenalty::kUpperBound);

  Verdict next(const Distribution& prediction, const Distribution& reference, Outcome observed);

  using WeightedMonitor::core;
  using WeightedMonitor::history_size;
  using WeightedMonitor::last_alpha;
  using WeightedMonitor::last_score;
  using WeightedMonitor::steps;
  const Decision& decision() const noexcept { return tracker_.decision(); }

 private:
  DecisionTracker tracker_;
};

}  // namespace alignmon

#endif  // ALIGNMON_MONITORS_HPP_
