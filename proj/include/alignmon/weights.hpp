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

#ifndef ALIGNMON_WEIGHTS_HPP_
#define ALIGNMON_WEIGHTS_HPP_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "alignmon/dist.hpp"
#include "alignmon/scoring.hpp"

namespace alignmon {

/// History-dependent weights for the weighted monitor: a prediction weight
/// alpha(z) in [0, alpha_cap] and an outcome weight function beta(z) with
/// values in [0, beta_cap], where z is the sequence of observed states.
///
/// Markovian implementations only ever look at the last state of z, and the
/// monitor then passes a history of length at most one.
class WeightFunctions {
 public:
  virtual ~WeightFunctions() = default;

  virtual double alpha(std::span<const Outcome> history) const = 0;
  virtual const WeightVector& beta(std::span<const Outcome> history) const = 0;

  virtual double alpha_cap() const = 0;
  virtual double beta_cap() const = 0;
  virtual bool markovian() const = 0;
};

/// alpha = a and beta = b everywhere.
class ConstantWeights final : public WeightFunctions {
 public:
  ConstantWeights(double alpha, double beta);

  double alpha(std::span<const Outcome>) const override { return alpha_; }
  const WeightVector& beta(std::span<const Outcome>) const override { return beta_; }
  double alpha_cap() const override { return alpha_cap_; }
  double beta_cap() const override { return beta_.cap(); }
  bool markovian() const override { return true; }

 private:
  double alpha_;
  double alpha_cap_;
  WeightVector beta_;
};

/// Weights that depend only on the current state. The empty history (the
/// prediction of the initial state) has its own entries.
class StateWeights final : public WeightFunctions {
 public:
  StateWeights(std::vector<double> alpha, std::vector<WeightVector> beta, double initial_alpha,
               WeightVector initial_beta);

  double alpha(std::span<const Outcome> history) const override;
  const WeightVector& beta(std::span<const Outcome> history) const override;
  double alpha_cap() const override { return alpha_cap_; }
  double beta_cap() const override { return beta_cap_; }
  bool markovian() const override { return true; }

  std::size_t states() const noexcept { return alpha_.size(); }
  double alpha_of(Outcome s) const { return alpha_.at(s); }
  const WeightVector& beta_of(Outcome s) const { return beta_.at(s); }
  double initial_alpha() const noexcept { return initial_alpha_; }
  const WeightVector& initial_beta() const noexcept { return initial_beta_; }

 private:
  std::vector<double> alpha_;
  std::vector<WeightVector> beta_;
  double initial_alpha_;
  WeightVector initial_beta_;
  double alpha_cap_ = 0.0;
  double beta_cap_ = 0.0;
};

/// Arbitrary functions of the full history. The beta callback's result is
/// cached per call, so an instance must not be shared between monitors that
/// run on different threads.
class HistoryWeights final : public WeightFunctions {
 public:
  using AlphaFn = std::function<double(std::span<const Outcome>)>;
  using BetaFn = std::function<WeightVector(std::span<const Outcome>)>;

  HistoryWeights(AlphaFn alpha, BetaFn beta, double alpha_cap, double beta_cap);

  double alpha(std::span<const Outcome> history) const override;
  const WeightVector& beta(std::span<const Outcome> history) const override;
  double alpha_cap() const override { return alpha_cap_; }
  double beta_cap() const override { return beta_cap_; }
  bool markovian() const override { return false; }

 private:
  AlphaFn alpha_fn_;
  BetaFn beta_fn_;
  double alpha_cap_;
  double beta_cap_;
  mutable std::unique_ptr<WeightVector> last_beta_;
};

}  // namespace alignmon

#endif  // ALIGNMON_WEIGHTS_HPP_
