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

#ifndef ALIGNMON_DIST_HPP_
#define ALIGNMON_DIST_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alignmon/error.hpp"
#include "alignmon/rng.hpp"

namespace alignmon {

/// Index into a finite outcome space. Names, if any, live at the ingestion
/// boundary.
using Outcome = std::size_t;

using SparseEntry = std::pair<Outcome, double>;

/// Tolerance on |sum(mass) - 1| accepted by validation.
inline constexpr double kMassTolerance = 1e-9;

struct Violation {
  ErrorCode code;
  std::size_t index;  // offending outcome; 0 for sum mismatches
  double value;       // offending mass, or the sum for kMassSumMismatch

  std::string describe() const;
};

std::optional<Violation> validate(std::span<const double> mass);
std::optional<Violation> validate(std::size_t n, std::span<const SparseEntry> entries);

/// Immutable probability vector over {0, ..., n-1}.
///
/// Storage is dense when the support covers at least a quarter of the
/// outcome space and sparse (sorted indices) otherwise; the choice is made
/// once at construction and is not observable through the interface except
/// for the cost of prob().
class Distribution {
 public:
  /// Validating constructors. Throw Error carrying the violated invariant.
  static Distribution dense(std::vector<double> mass);
  static Distribution sparse(std::size_t n, std::vector<SparseEntry> entries);

  /// Explicit renormalization: entries must be finite and non-negative with a
  /// positive total; the result sums to one up to rounding.
  static Distribution normalized(std::vector<double> weights);
  static Distribution normalized(std::size_t n, std::vector<SparseEntry> entries);

  std::size_t size() const noexcept { return n_; }
  std::size_t support_size() const noexcept { return support_; }
  bool stored_dense() const noexcept { return !dense_.empty(); }

  /// Probability of outcome x; 0 outside the support. x must be < size().
  double prob(Outcome x) const;
  double operator[](Outcome x) const { return prob(x); }

  /// Visits every outcome with positive mass in increasing index order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    if (!dense_.empty()) {
      for (std::size_t i = 0; i < dense_.size(); ++i)
        if (dense_[i] > 0.0) fn(static_cast<Outcome>(i), dense_[i]);
    } else {
      for (std::size_t k = 0; k < idx_.size(); ++k) fn(idx_[k], val_[k]);
    }
  }

  std::vector<double> to_dense() const;
  std::vector<SparseEntry> entries() const;
  std::vector<Outcome> support() const;

  /// Index of the largest mass; ties resolve to the smallest index.
  Outcome argmax() const;

  friend bool operator==(const Distribution& a, const Distribution& b);

 private:
  Distribution() = default;
  static Distribution build(std::size_t n, std::vector<SparseEntry> sorted_entries);

  std::size_t n_ = 0;
  std::size_t support_ = 0;
  std::vector<double> dense_;
  std::vector<Outcome> idx_;
  std::vector<double> val_;
};

Distribution point_mass(std::size_t n, Outcome i);
Distribution uniform(std::size_t n);
Distribution uniform_over(std::size_t n, std::span<const Outcome> support);

/// Draws one outcome by inverse-CDF over the support; zero-mass outcomes are
/// never returned. O(|support|) per draw.
Outcome sample(const Distribution& d, Rng& rng);

/// Precomputed inverse-CDF table for repeated draws from one distribution.
/// O(log |support|) per draw; yields the same outcome as sample() for the
/// same uniform variate up to rounding at bucket edges.
class CdfSampler {
 public:
  explicit CdfSampler(const Distribution& d);
  Outcome operator()(Rng& rng) const;

 private:
  std::vector<Outcome> outcomes_;
  std::vector<double> cumulative_;
};

}  // namespace alignmon

#endif  // ALIGNMON_DIST_HPP_
