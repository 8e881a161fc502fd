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

#ifndef ALIGNMON_SCORING_HPP_
#define ALIGNMON_SCORING_HPP_

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "alignmon/dist.hpp"

namespace alignmon {

/// Closed range [a, b] of a bounded scoring rule. Lower scores are better.
struct ScoreBounds {
  double a;
  double b;

  double range() const noexcept { return b - a; }
  bool contains(double s) const noexcept { return a <= s && s <= b; }
};

enum class RuleKind { kBrier, kSpherical };

std::string_view rule_name(RuleKind kind) noexcept;
std::optional<RuleKind> parse_rule(std::string_view name) noexcept;
ScoreBounds rule_bounds(RuleKind kind) noexcept;

/// Outcome weight function omega: X -> [0, cap].
class WeightVector {
 public:
  /// omega(x) = weight for every x. cap defaults to max(weight, 1) when
  /// weight is zero so that the cap stays positive.
  static WeightVector constant(double weight, std::optional<double> cap = std::nullopt);

  /// Dense weights; throws InvalidParams unless 0 <= w[i] <= cap and cap > 0.
  WeightVector(std::vector<double> weights, double cap);

  double operator()(Outcome x) const noexcept {
    return weights_.empty() ? constant_ : (x < weights_.size() ? weights_[x] : 0.0);
  }
  double cap() const noexcept { return cap_; }
  bool is_constant() const noexcept { return weights_.empty(); }

 private:
  WeightVector() = default;

  std::vector<double> weights_;
  double constant_ = 0.0;
  double cap_ = 1.0;
};

/// What a weighted rule scores when the forecast puts no mass on any
/// positively weighted outcome but a positively weighted outcome occurs.
enum class DegeneratePenalty { kUpperBound, kLowerBound };

/// Bounded score function: Brier, spherical, or the outcome-weighted
/// transform of either.
class ScoringRule {
 public:
  static ScoringRule brier() { return ScoringRule(RuleKind::kBrier); }
  static ScoringRule spherical() { return ScoringRule(RuleKind::kSpherical); }
  static ScoringRule of(RuleKind kind) { return ScoringRule(kind); }
  static ScoringRule weighted(RuleKind base, WeightVector omega,
                              DegeneratePenalty penalty = DegeneratePenalty::kUpperBound);

  RuleKind base_kind() const noexcept { return kind_; }
  bool is_weighted() const noexcept { return weights_ != nullptr; }
  const WeightVector* weights() const noexcept { return weights_.get(); }
  DegeneratePenalty penalty() const noexcept { return penalty_; }

  /// [a, b] for plain rules; [c*a, c*b] for weighted rules with cap c.
  ScoreBounds bounds() const noexcept;

  double operator()(const Distribution& y, Outcome x) const;

 private:
  explicit ScoringRule(RuleKind kind) : kind_(kind) {}

  RuleKind kind_;
  std::shared_ptr<const WeightVector> weights_;
  DegeneratePenalty penalty_ = DegeneratePenalty::kUpperBound;
};

/// sum_{x'} (y(x') - [x' = x])^2, in [0, 2]. One pass over supp(y).
double brier(const Distribution& y, Outcome x);

/// -y(x) / ||y||_2, in [-1, 0]. Throws ZeroNorm on an all-zero vector.
double spherical(const Distribution& y, Outcome x);

double score(RuleKind kind, const Distribution& y, Outcome x);

/// y_omega(x) = omega(x) y(x) / sum omega y; nullopt when the normalizer
/// vanishes.
std::optional<Distribution> reweight(const Distribution& y, const WeightVector& omega);

/// omega(x) * rule(y_omega, x), computed in two passes over supp(y) without
/// materializing y_omega. Zero when omega(x) = 0; omega(x) times the
/// penalty bound when y_omega is undefined.
double weighted_score(RuleKind base, const WeightVector& omega, const Distribution& y,
                      Outcome x, DegeneratePenalty penalty = DegeneratePenalty::kUpperBound);

/// Exact expectation sum_x truth(x) * rule(predicted, x).
double expected_score(const ScoringRule& rule, const Distribution& predicted,
                      const Distribution& truth);
double expected_score(RuleKind base, const WeightVector* omega, const Distribution& predicted,
                      const Distribution& truth,
                      DegeneratePenalty penalty = DegeneratePenalty::kUpperBound);

}  // namespace alignmon

#endif  // ALIGNMON_SCORING_HPP_
