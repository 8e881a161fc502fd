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

#include "alignmon/monitors.hpp"

#include <limits>

namespace alignmon {

std::string_view decision_name(DecisionValue value) noexcept {
  switch (value) {
    case DecisionValue::kModelBetter: return "top";
    case DecisionValue::kReferenceBetter: return "bot";
    case DecisionValue::kUndecided: break;
  }
  return "undecided";
}

void DecisionTracker::observe(const Verdict& v) noexcept {
  if (decision_.value != DecisionValue::kUndecided || !v.informative) return;
  if (v.hi < 0.0) {
    decision_ = {DecisionValue::kModelBetter, v.step};
  } else if (v.lo > 0.0) {
    decision_ = {DecisionValue::kReferenceBetter, v.step};
  }
}

Decision diff_decision(std::span<const Verdict> verdicts) {
  DecisionTracker tracker;
  for (const auto& v : verdicts) tracker.observe(v);
  return tracker.decision();
}

namespace {

Verdict make_verdict(std::size_t step, const MonitorCore& core) {
  if (!core.has_observations()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {step, 0.0, -inf, inf, false};
  }
  const auto [lo, hi] = core.interval();
  return {step, core.estimate(), lo, hi, true};
}

void check_same_space(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::kDimensionMismatch, "model and reference predict over different spaces");
}

}  // namespace

AverageMonitor::AverageMonitor(ScoringRule rule, double delta)
    : rule_(std::move(rule)), core_(rule_.bounds().range(), delta) {}

Verdict AverageMonitor::next(const Distribution& prediction, Outcome observed) {
  last_score_ = rule_(prediction, observed);
  core_.update(last_score_);
  return make_verdict(++steps_, core_);
}

DifferentialMonitor::DifferentialMonitor(ScoringRule rule, double delta)
    : rule_(std::move(rule)), core_(2.0 * rule_.bounds().range(), delta) {}

Verdict DifferentialMonitor::next(const Distribution& prediction, const Distribution& reference,
                                  Outcome observed) {
  check_same_space(prediction, reference);
  last_score_ = rule_(prediction, observed) - rule_(reference, observed);
  core_.update(last_score_);
  auto v = make_verdict(++steps_, core_);
  tracker_.observe(v);
  return v;
}

WeightedMonitor::WeightedMonitor(RuleKind base, double delta,
                                 std::shared_ptr<const WeightFunctions> weights,
                                 DegeneratePenalty penalty)
    : WeightedMonitor(base, delta, std::move(weights), penalty, 1.0) {}

WeightedMonitor::WeightedMonitor(RuleKind base, double delta,
                                 std::shared_ptr<const WeightFunctions> weights,
                                 DegeneratePenalty penalty, double sigma_scale)
    : base_(base),
      weights_(weights ? std::move(weights)
                       : throw Error(ErrorCode::kInvalidArgument, "weight functions required")),
      penalty_(penalty),
      core_(sigma_scale * weights_->alpha_cap() * weights_->beta_cap() * rule_bounds(base).range(),
            delta) {}

std::size_t WeightedMonitor::history_size() const noexcept {
  return weights_->markovian() ? (last_state_ ? 1 : 0) : history_.size();
}

std::span<const Outcome> WeightedMonitor::history_view() const noexcept {
  if (weights_->markovian()) {
    if (!last_state_) return {};
    return {&*last_state_, 1};
  }
  return history_;
}

void WeightedMonitor::remember(Outcome observed) {
  if (weights_->markovian()) {
    last_state_ = observed;
  } else {
    history_.push_back(observed);
  }
}

Verdict WeightedMonitor::next(const Distribution& prediction, Outcome observed) {
  const auto z = history_view();
  last_alpha_ = weights_->alpha(z);
  last_score_ = last_alpha_ == 0.0
                    ? 0.0
                    : last_alpha_ * weighted_score(base_, weights_->beta(z), prediction, observed,
                                                   penalty_);
  core_.update(last_score_, last_alpha_);
  remember(observed);
  return make_verdict(++steps_, core_);
}

WeightedDifferentialMonitor::WeightedDifferentialMonitor(
    RuleKind base, double delta, std::shared_ptr<const WeightFunctions> weights,
    DegeneratePenalty penalty)
    : WeightedMonitor(base, delta, std::move(weights), penalty, 2.0) {}

Verdict WeightedDifferentialMonitor::next(const Distribution& prediction,
                                          const Distribution& reference, Outcome observed) {
  check_same_space(prediction, reference);
  const auto z = history_view();
  last_alpha_ = weights_->alpha(z);
  if (last_alpha_ == 0.0) {
    last_score_ = 0.0;
  } else {
    const auto& beta = weights_->beta(z);
    last_score_ = last_alpha_ * (weighted_score(base_, beta, prediction, observed, penalty_) -
                                 weighted_score(base_, beta, reference, observed, penalty_));
  }
  core_.update(last_score_, last_alpha_);
  remember(observed);
  auto v = make_verdict(++steps_, core_);
  tracker_.observe(v);
  return v;
}

}  // namespace alignmon
