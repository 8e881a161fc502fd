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

#ifndef ALIGNMON_CONFSEQ_HPP_
#define ALIGNMON_CONFSEQ_HPP_

#include <utility>

namespace alignmon {

/// Constants of the stitched time-uniform boundary (eta = e, m = 1).
struct StitchingConstants {
  static constexpr double kVariance = 2.13;
  static constexpr double kRangeSquared = 1.76;
  static constexpr double kRange = 1.33;
};

/// Lower clamp applied to n inside log(log(n)); e makes log(n) >= 1.
inline constexpr double kBoundaryClamp = 2.718281828459045;

/// g(n, delta) = 2 log(pi log(max(n, clamp)) / sqrt 6) + log(2 / delta).
/// Throws DomainError unless 0 < delta < 1 and n >= 1.
double boundary(double n, double delta, double clamp = kBoundaryClamp);

/// Radius (sqrt(2.13 N g + 1.76 sigma^2 g^2) + 1.33 sigma g) / t with
/// g = boundary(N, delta). Throws DomainError unless t > 0.
double radius(double t, double variance, double delta, double sigma,
              double clamp = kBoundaryClamp);

/// Running state shared by every monitor: effective time, running mean,
/// clamped empirical variance process, and the score range sigma.
class MonitorCore {
 public:
  MonitorCore(double sigma, double delta, double clamp = kBoundaryClamp);

  /// N <- max(1, N + (s - E)^2) with the pre-update mean, then
  /// t <- t + weight and E <- (t_old E + s) / t. A zero weight is a no-op
  /// (the caller's score is necessarily zero in that case).
  void update(double score, double weight = 1.0) noexcept;

  double time() const noexcept { return t_; }
  double estimate() const noexcept { return mean_; }
  double variance_process() const noexcept { return variance_; }
  double sigma() const noexcept { return sigma_; }
  double delta() const noexcept { return delta_; }
  bool has_observations() const noexcept { return t_ > 0.0; }

  double radius() const;

  /// (E - eps, E + eps). Throws NoObservations while t == 0.
  std::pair<double, double> interval() const;

 private:
  double t_ = 0.0;
  double mean_ = 0.0;
  double variance_ = 1.0;
  double sigma_;
  double delta_;
  double clamp_;
};

}  // namespace alignmon

#endif  // ALIGNMON_CONFSEQ_HPP_
