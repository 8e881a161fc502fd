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

#include "alignmon/scoring.hpp"

#include <cmath>
#include <string>

namespace alignmon {

std::string_view rule_name(RuleKind kind) noexcept {
  return kind == RuleKind::kBrier ? "brier" : "spherical";
}

std::optional<RuleKind> parse_rule(std::string_view name) noexcept {
  if (name == "brier") return RuleKind::kBrier;
  if (name == "spherical") return RuleKind::kSpherical;
  return std::nullopt;
}

ScoreBounds rule_bounds(RuleKind kind) noexcept {
  return kind == RuleKind::kBrier ? ScoreBounds{0.0, 2.0} : ScoreBounds{-1.0, 0.0};
}

WeightVector WeightVector::constant(double weight, std::optional<double> cap) {
  const double c = cap.value_or(weight > 0.0 ? weight : 1.0);
  if (!(c > 0.0) || !(weight >= 0.0) || weight > c)
    throw Error(ErrorCode::kInvalidParams, "constant weight must lie in [0, cap] with cap > 0");
  WeightVector w;
  w.constant_ = weight;
  w.cap_ = c;
  return w;
}

WeightVector::WeightVector(std::vector<double> weights, double cap)
    : weights_(std::move(weights)), cap_(cap) {
  if (!(cap_ > 0.0) || !std::isfinite(cap_))
    throw Error(ErrorCode::kInvalidParams, "weight cap must be positive");
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (!(weights_[i] >= 0.0) || weights_[i] > cap_)
      throw Error(ErrorCode::kInvalidParams,
                  "weight " + std::to_string(weights_[i]) + " outside [0, cap]", i);
}

ScoringRule ScoringRule::weighted(RuleKind base, WeightVector omega, DegeneratePenalty penalty) {
  ScoringRule r(base);
  r.weights_ = std::make_shared<const WeightVector>(std::move(omega));
  r.penalty_ = penalty;
  return r;
}

ScoreBounds ScoringRule::bounds() const noexcept {
  const auto base = rule_bounds(kind_);
  if (!weights_) return base;
  return {weights_->cap() * base.a, weights_->cap() * base.b};
}

double ScoringRule::operator()(const Distribution& y, Outcome x) const {
  if (weights_) return weighted_score(kind_, *weights_, y, x, penalty_);
  return score(kind_, y, x);
}

namespace {

void check_outcome(const Distribution& y, Outcome x) {
  if (x >= y.size())
    throw Error(ErrorCode::kIndexOutOfRange,
                "outcome " + std::to_string(x) + " outside space of size " + std::to_string(y.size()),
                x);
}

}  // namespace

double brier(const Distribution& y, Outcome x) {
  check_outcome(y, x);
  double sum = 0.0;
  bool observed_in_support = false;
  y.for_each([&](Outcome i, double p) {
    if (i == x) {
      observed_in_support = true;
      sum += (p - 1.0) * (p - 1.0);
    } else {
      sum += p * p;
    }
  });
  if (!observed_in_support) sum += 1.0;
  return sum;
}

double spherical(const Distribution& y, Outcome x) {
  check_outcome(y, x);
  double sumsq = 0.0;
  double px = 0.0;
  y.for_each([&](Outcome i, double p) {
    sumsq += p * p;
    if (i == x) px = p;
  });
  if (!(sumsq > 0.0)) throw Error(ErrorCode::kZeroNorm, "spherical score of an all-zero vector");
  return -px / std::sqrt(sumsq);
}

double score(RuleKind kind, const Distribution& y, Outcome x) {
  return kind == RuleKind::kBrier ? brier(y, x) : spherical(y, x);
}

std::optional<Distribution> reweight(const Distribution& y, const WeightVector& omega) {
  if (omega.is_constant()) {
    if (omega(0) > 0.0) return y;
    return std::nullopt;
  }
  std::vector<SparseEntry> entries;
  double total = 0.0;
  y.for_each([&](Outcome i, double p) {
    const double w = omega(i) * p;
    if (w > 0.0) {
      entries.emplace_back(i, w);
      total += w;
    }
  });
  if (!(total > 0.0)) return std::nullopt;
  return Distribution::normalized(y.size(), std::move(entries));
}

double weighted_score(RuleKind base, const WeightVector& omega, const Distribution& y, Outcome x,
                      DegeneratePenalty penalty) {
  check_outcome(y, x);
  const double wx = omega(x);
  if (wx == 0.0) return 0.0;
  // Constant weights cancel in the normalization.
  if (omega.is_constant()) return wx * score(base, y, x);

  double z = 0.0;
  y.for_each([&](Outcome i, double p) { z += omega(i) * p; });
  if (!(z > 0.0)) {
    const auto b = rule_bounds(base);
    return wx * (penalty == DegeneratePenalty::kUpperBound ? b.b : b.a);
  }

  double s = 0.0;
  if (base == RuleKind::kBrier) {
    bool observed_in_support = false;
    y.for_each([&](Outcome i, double p) {
      const double q = omega(i) * p / z;
      if (i == x) {
        observed_in_support = true;
        s += (q - 1.0) * (q - 1.0);
      } else {
        s += q * q;
      }
    });
    if (!observed_in_support) s += 1.0;
  } else {
    double sumsq = 0.0;
    double qx = 0.0;
    y.for_each([&](Outcome i, double p) {
      const double q = omega(i) * p / z;
      sumsq += q * q;
      if (i == x) qx = q;
    });
    s = -qx / std::sqrt(sumsq);
  }
  return wx * s;
}

double expected_score(const ScoringRule& rule, const Distribution& predicted,
                      const Distribution& truth) {
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::kDimensionMismatch, "prediction and truth live on different spaces");
  double e = 0.0;
  truth.for_each([&](Outcome x, double p) { e += p * rule(predicted, x); });
  return e;
}

double expected_score(RuleKind base, const WeightVector* omega, const Distribution& predicted,
                      const Distribution& truth, DegeneratePenalty penalty) {
  if (omega == nullptr) return expected_score(ScoringRule::of(base), predicted, truth);
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::kDimensionMismatch, "prediction and truth live on different spaces");
  double e = 0.0;
  truth.for_each([&](Outcome x, double p) { e += p * weighted_score(base, *omega, predicted, x, penalty); });
  return e;
}

}  // namespace alignmon
