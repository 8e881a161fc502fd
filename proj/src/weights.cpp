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

#include "alignmon/weights.hpp"

#include <algorithm>
#include <string>

namespace alignmon {

namespace {

void check_alpha(double a, double cap) {
  if (!(a >= 0.0) || a > cap)
    throw Error(ErrorCode::kInvalidParams, "prediction weight " + std::to_string(a) +
                                               " outside [0, " + std::to_string(cap) + "]");
}

}  // namespace

ConstantWeights::ConstantWeights(double alpha, double beta)
    : alpha_(alpha), alpha_cap_(alpha > 0.0 ? alpha : 1.0), beta_(WeightVector::constant(beta)) {
  check_alpha(alpha, alpha_cap_);
}

StateWeights::StateWeights(std::vector<double> alpha, std::vector<WeightVector> beta,
                           double initial_alpha, WeightVector initial_beta)
    : alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      initial_alpha_(initial_alpha),
      initial_beta_(std::move(initial_beta)) {
  if (alpha_.size() != beta_.size())
    throw Error(ErrorCode::kDimensionMismatch, "alpha and beta tables differ in length");
  alpha_cap_ = initial_alpha_;
  for (double a : alpha_) alpha_cap_ = std::max(alpha_cap_, a);
  if (!(alpha_cap_ > 0.0)) alpha_cap_ = 1.0;
  for (double a : alpha_) check_alpha(a, alpha_cap_);
  check_alpha(initial_alpha_, alpha_cap_);
  beta_cap_ = initial_beta_.cap();
  for (const auto& b : beta_) beta_cap_ = std::max(beta_cap_, b.cap());
}

double StateWeights::alpha(std::span<const Outcome> history) const {
  return history.empty() ? initial_alpha_ : alpha_.at(history.back());
}

const WeightVector& StateWeights::beta(std::span<const Outcome> history) const {
  return history.empty() ? initial_beta_ : beta_.at(history.back());
}

HistoryWeights::HistoryWeights(AlphaFn alpha, BetaFn beta, double alpha_cap, double beta_cap)
    : alpha_fn_(std::move(alpha)),
      beta_fn_(std::move(beta)),
      alpha_cap_(alpha_cap),
      beta_cap_(beta_cap) {
  if (!(alpha_cap_ > 0.0) || !(beta_cap_ > 0.0))
    throw Error(ErrorCode::kInvalidParams, "weight caps must be positive");
}

double HistoryWeights::alpha(std::span<const Outcome> history) const {
  const double a = alpha_fn_(history);
  check_alpha(a, alpha_cap_);
  return a;
}

const WeightVector& HistoryWeights::beta(std::span<const Outcome> history) const {
  auto w = beta_fn_(history);
  if (w.cap() > beta_cap_)
    throw Error(ErrorCode::kInvalidParams, "outcome weights exceed the declared cap");
  last_beta_ = std::make_unique<WeightVector>(std::move(w));
  return *last_beta_;
}

}  // namespace alignmon
