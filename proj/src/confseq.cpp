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

#include "alignmon/confseq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "alignmon/error.hpp"

namespace alignmon {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorCode::kDomainError, "error probability must lie in (0, 1), got " +
                                             std::to_string(delta));
}

}  // namespace

double boundary(double n, double delta, double clamp) {
  check_delta(delta);
  if (!(n >= 1.0)) throw Error(ErrorCode::kDomainError, "boundary needs n >= 1");
  const double ln = std::log(std::max(n, clamp));
  return 2.0 * std::log(std::numbers::pi * ln / std::sqrt(6.0)) + std::log(2.0 / delta);
}

double radius(double t, double variance, double delta, double sigma, double clamp) {
  if (!(t > 0.0)) throw Error(ErrorCode::kDomainError, "radius needs positive time");
  using C = StitchingConstants;
  const double g = boundary(variance, delta, clamp);
  return (std::sqrt(C::kVariance * variance * g + C::kRangeSquared * sigma * sigma * g * g) +
          C::kRange * sigma * g) /
         t;
}

MonitorCore::MonitorCore(double sigma, double delta, double clamp)
    : sigma_(sigma), delta_(delta), clamp_(clamp) {
  check_delta(delta);
  if (!(sigma > 0.0)) throw Error(ErrorCode::kDomainError, "score range must be positive");
}

void MonitorCore::update(double score, double weight) noexcept {
  if (weight == 0.0) return;
  const double dev = score - mean_;
  variance_ = std::max(1.0, variance_ + dev * dev);
  const double t_old = t_;
  t_ += weight;
  mean_ = (t_old * mean_ + score) / t_;
}

double MonitorCore::radius() const {
  if (t_ == 0.0) throw Error(ErrorCode::kNoObservations, "monitor has no weighted observations");
  return alignmon::radius(t_, variance_, delta_, sigma_, clamp_);
}

std::pair<double, double> MonitorCore::interval() const {
  const double eps = radius();
  return {mean_ - eps, mean_ + eps};
}

}  // namespace alignmon
