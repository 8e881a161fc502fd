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

#ifndef ALIGNMON_MARKOV_HPP_
#define ALIGNMON_MARKOV_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alignmon/dist.hpp"
#include "alignmon/monitors.hpp"
#include "alignmon/scoring.hpp"
#include "alignmon/weights.hpp"

namespace alignmon {

/// Row-stochastic transition matrix plus initial distribution. Environments,
/// models, references and corruptions are all values of this type.
class MarkovChain {
 public:
  MarkovChain(std::vector<Distribution> rows, Distribution init,
              std::vector<std::string> names = {});

  std::size_t size() const noexcept { return rows_.size(); }
  const Distribution& row(Outcome s) const { return rows_.at(s); }
  std::span<const Distribution> rows() const noexcept { return rows_; }
  const Distribution& init() const noexcept { return init_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// Argmax of the initial distribution.
  Outcome initial_state() const { return init_.argmax(); }

  /// Prediction issued after observing `prev`; the initial distribution
  /// when nothing has been observed yet.
  const Distribution& predict(std::optional<Outcome> prev) const {
    return prev ? rows_.at(*prev) : init_;
  }

  MarkovChain with_init(Distribution init) const;

  friend bool operator==(const MarkovChain&, const MarkovChain&) = default;

 private:
  std::vector<Distribution> rows_;
  Distribution init_;
  std::vector<std::string> names_;
};

struct Trajectory {
  std::vector<Outcome> states;  // states[0] ~ init
  std::uint64_t seed = 0;
};

/// Samples steps + 1 states (initial state included). Deterministic in seed.
Trajectory simulate(const MarkovChain& env, std::size_t steps, std::uint64_t seed);

/// Monitor-step view of a trajectory: step 1 observes states[0] (predicted
/// from the initial distribution), step k > 1 observes states[k-1] after
/// states[k-2]. `steps` monitor steps consume simulate(env, steps - 1, seed).
template <class Fn>
void for_each_step(const Trajectory& path, Fn&& fn) {
  std::optional<Outcome> prev;
  for (Outcome next : path.states) {
    fn(prev, next);
    prev = next;
  }
}

Trajectory monitor_trajectory(const MarkovChain& env, std::size_t steps, std::uint64_t seed);

std::vector<Verdict> drive_monitor(const MarkovChain& env, const MarkovChain& model,
                                   AverageMonitor& monitor, std::size_t steps, std::uint64_t seed);
std::vector<Verdict> drive_monitor(const MarkovChain& env, const MarkovChain& model,
                                   const MarkovChain& reference, DifferentialMonitor& monitor,
                                   std::size_t steps, std::uint64_t seed);
std::vector<Verdict> drive_monitor(const MarkovChain& env, const MarkovChain& model,
                                   WeightedMonitor& monitor, std::size_t steps,
                                   std::uint64_t seed);

enum class BsccAvoidance { kMixture, kRenormalize };

/// Adds a return edge of mass rho to `return_state` (default: the initial
/// state) on every row. kMixture: (1 - rho) row + rho delta; kRenormalize:
/// row + rho delta, then normalized.
MarkovChain avoid_bscc(const MarkovChain& chain, double rho = 0.01,
                       BsccAvoidance mode = BsccAvoidance::kMixture,
                       std::optional<Outcome> return_state = std::nullopt);

/// Uniform over all states, with a uniform initial distribution.
MarkovChain ref_black_box(std::size_t n);
/// Uniform over each row's successors.
MarkovChain ref_gray_box(const MarkovChain& env);
/// mix * env + (1 - mix) * gray box, rowwise.
MarkovChain ref_expert(const MarkovChain& env, double mix = 0.5);

enum class CorruptionKind {
  kAdditiveNoise,
  kInvert,
  kSharpen,
  kSupportResample,
  kDropout,
  kSwap,
  kCollapse,
  kBias,
  kFlip,
};

std::string_view corruption_name(CorruptionKind kind) noexcept;
std::optional<CorruptionKind> parse_corruption(std::string_view name) noexcept;
std::span<const CorruptionKind> all_corruptions() noexcept;

struct CorruptionParams {
  double noise_scale = 0.1;         // additive: scale * Uniform[-0.5, 0.5]
  bool noise_on_support = false;    // additive: perturb only non-zero entries
  double sharpen_power = 4.0;
  double keep_probability = 0.3;    // support_resample
  double drop_probability = 0.4;    // dropout
  double collapse_spread = 1e-6;    // collapse: mass left on the original support
  double bias_strength = 0.55;
  Outcome bias_target = 0;

  /// Throws InvalidParams when a value is outside its documented range.
  void validate() const;
};

/// Applies `kind` to every row. Randomized kinds are deterministic in seed.
MarkovChain corrupt(const MarkovChain& chain, CorruptionKind kind,
                    const CorruptionParams& params = {}, std::uint64_t seed = 0);

/// Adds dense noise (length n) to a row, clips at zero and renormalizes;
/// falls back to the row itself if everything clips away. Entries outside
/// the support are left at zero when `on_support` holds.
Distribution add_noise(const Distribution& row, std::span<const double> noise, bool on_support);

/// Per-state expected scores e(i) = E_{X ~ env(i)} rule(model(i), X), plus the
/// same for the initial distributions.
struct StateScores {
  std::vector<double> per_state;
  double initial = 0.0;
};

StateScores exact_state_scores(const MarkovChain& env, const MarkovChain& model,
                               const ScoringRule& rule);

/// Running true average expected score along a monitored trajectory.
class AesOracle {
 public:
  AesOracle(const MarkovChain& env, const MarkovChain& model, const ScoringRule& rule);

  /// Adds the step that predicts from `prev`; returns the running average.
  double push(std::optional<Outcome> prev);
  double value() const noexcept { return steps_ ? sum_ / static_cast<double>(steps_) : 0.0; }

 private:
  StateScores scores_;
  double sum_ = 0.0;
  std::size_t steps_ = 0;
};

/// Running true weighted average expected score: sum of alpha(z) times the
/// expected weighted score under beta(z), over the weighted time.
class WeightedAesOracle {
 public:
  WeightedAesOracle(const MarkovChain& env, const MarkovChain& model, RuleKind base,
                    std::shared_ptr<const WeightFunctions> weights,
                    DegeneratePenalty penalty = DegeneratePenalty::kUpperBound);

  /// Adds the step predicting from the current history, then appends
  /// `observed` to it. Returns the running value (nullopt while t_alpha = 0).
  std::optional<double> push(Outcome observed);
  std::optional<double> value() const noexcept;

 private:
  MarkovChain env_;
  MarkovChain model_;
  RuleKind base_;
  std::shared_ptr<const WeightFunctions> weights_;
  DegeneratePenalty penalty_;
  std::vector<Outcome> history_;
  double weighted_sum_ = 0.0;
  double time_ = 0.0;
};

struct ToyScenario {
  MarkovChain env;
  MarkovChain model;
  std::shared_ptr<const StateWeights> weights;
};

/// Loan-granting chain over S, A, B, G_A, R_A, D_A, G_B, R_B, D_B. The model
/// flips the rows of S and of both G states; alpha = 1 on A and B, 0
/// elsewhere (and for the initial prediction); beta = 1.
ToyScenario fairness_chain();

/// Six-state chain s1..s6 with the bottom component {s3, s5, s6}. The model
/// predicts s6 -> (s3 0.8, s5 0.1, s2 0.1); the environment's s6 row is
/// `env_s6` (support within {s2, s3, s5}), default (s3 0.6, s5 0.2, s2 0.2).
/// alpha = 1 on the component and 0.1 elsewhere; beta(s)(s') = 1 when s is
/// in the component and s' is not, 0.05 otherwise. The initial prediction
/// uses the "elsewhere" weights.
ToyScenario safety_chain(std::optional<Distribution> env_s6 = std::nullopt);

/// Two-state coin chains whose rows and initial distribution are all
/// Bernoulli(p). Returns (environment, model).
std::pair<MarkovChain, MarkovChain> bernoulli_pair(double p_env, double p_model);

}  // namespace alignmon

#endif  // ALIGNMON_MARKOV_HPP_
