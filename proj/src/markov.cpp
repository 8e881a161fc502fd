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

#include "alignmon/markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace alignmon {

MarkovChain::MarkovChain(std::vector<Distribution> rows, Distribution init,
                         std::vector<std::string> names)
    : rows_(std::move(rows)), init_(std::move(init)), names_(std::move(names)) {
  if (rows_.empty()) throw Error(ErrorCode::kInvalidArgument, "chain has no states");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != rows_.size())
      throw Error(ErrorCode::kDimensionMismatch,
                  "row " + std::to_string(i) + " has " + std::to_string(rows_[i].size()) +
                      " entries, expected " + std::to_string(rows_.size()),
                  i);
  }
  if (init_.size() != rows_.size())
    throw Error(ErrorCode::kDimensionMismatch, "initial distribution size differs from state count");
  if (!names_.empty() && names_.size() != rows_.size())
    throw Error(ErrorCode::kDimensionMismatch, "state name count differs from state count");
}

MarkovChain MarkovChain::with_init(Distribution init) const {
  return MarkovChain(rows_, std::move(init), names_);
}

Trajectory simulate(const MarkovChain& env, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed, {0x7261'6a65ULL});
  Trajectory path;
  path.seed = seed;
  path.states.reserve(steps + 1);
  Outcome s = sample(env.init(), rng);
  path.states.push_back(s);
  for (std::size_t k = 0; k < steps; ++k) {
    s = sample(env.row(s), rng);
    path.states.push_back(s);
  }
  return path;
}

Trajectory monitor_trajectory(const MarkovChain& env, std::size_t steps, std::uint64_t seed) {
  if (steps == 0) throw Error(ErrorCode::kInvalidArgument, "steps must be positive");
  return simulate(env, steps - 1, seed);
}

namespace {

void check_same_size(const MarkovChain& a, const MarkovChain& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::kDimensionMismatch,
                "chains have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                    " states");
}

}  // namespace

std::vector<Verdict> drive_monitor(const MarkovChain& env, const MarkovChain& model,
                                   AverageMonitor& monitor, std::size_t steps,
                                   std::uint64_t seed) {
  check_same_size(env, model);
  std::vector<Verdict> out;
  out.reserve(steps);
  for_each_step(monitor_trajectory(env, steps, seed), [&](std::optional<Outcome> prev, Outcome x) {
    out.push_back(monitor.next(model.predict(prev), x));
  });
  return out;
}

std::vector<Verdict> drive_monitor(const MarkovChain& env, const MarkovChain& model,
                                   const MarkovChain& reference, DifferentialMonitor& monitor,
                                   std::size_t steps, std::uint64_t seed) {
  check_same_size(env, model);
  check_same_size(env, reference);
  std::vector<Verdict> out;
  out.reserve(steps);
  for_each_step(monitor_trajectory(env, steps, seed), [&](std::optional<Outcome> prev, Outcome x) {
    out.push_back(monitor.next(model.predict(prev), reference.predict(prev), x));
  });
  return out;
}

std::vector<Verdict> drive_monitor(const MarkovChain& env, const MarkovChain& model,
                                   WeightedMonitor& monitor, std::size_t steps,
                                   std::uint64_t seed) {
  check_same_size(env, model);
  std::vector<Verdict> out;
  out.reserve(steps);
  for_each_step(monitor_trajectory(env, steps, seed), [&](std::optional<Outcome> prev, Outcome x) {
    out.push_back(monitor.next(model.predict(prev), x));
  });
  return out;
}

MarkovChain avoid_bscc(const MarkovChain& chain, double rho, BsccAvoidance mode,
                       std::optional<Outcome> return_state) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw Error(ErrorCode::kInvalidParams, "return probability must lie in [0, 1)");
  const Outcome home = return_state.value_or(chain.initial_state());
  if (home >= chain.size()) throw Error(ErrorCode::kIndexOutOfRange, "return state", home);
  if (rho == 0.0) return chain;

  const std::size_t n = chain.size();
  std::vector<Distribution> rows;
  rows.reserve(n);
  for (const auto& row : chain.rows()) {
    std::vector<SparseEntry> e;
    e.reserve(row.support_size() + 1);
    bool hit = false;
    if (mode == BsccAvoidance::kMixture) {
      row.for_each([&](Outcome j, double p) {
        const double q = (1.0 - rho) * p + (j == home ? rho : 0.0);
        hit = hit || j == home;
        e.emplace_back(j, q);
      });
      if (!hit) e.emplace_back(home, rho);
      std::sort(e.begin(), e.end());
      rows.push_back(Distribution::sparse(n, std::move(e)));
    } else {
      row.for_each([&](Outcome j, double p) {
        hit = hit || j == home;
        e.emplace_back(j, p + (j == home ? rho : 0.0));
      });
      if (!hit) e.emplace_back(home, rho);
      std::sort(e.begin(), e.end());
      rows.push_back(Distribution::normalized(n, std::move(e)));
    }
  }
  return MarkovChain(std::move(rows), chain.init(), chain.names());
}

MarkovChain ref_black_box(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kEmptySupport, "black box over zero states");
  std::vector<Distribution> rows(n, uniform(n));
  return MarkovChain(std::move(rows), uniform(n));
}

namespace {

Distribution gray_row(const Distribution& row) {
  const auto s = row.support();
  return uniform_over(row.size(), s);
}

Distribution mix_rows(const Distribution& a, const Distribution& b, double w) {
  std::vector<SparseEntry> e;
  e.reserve(a.support_size() + b.support_size());
  a.for_each([&](Outcome j, double p) { e.emplace_back(j, w * p); });
  b.for_each([&](Outcome j, double p) { e.emplace_back(j, (1.0 - w) * p); });
  std::sort(e.begin(), e.end());
  std::vector<SparseEntry> merged;
  merged.reserve(e.size());
  for (const auto& [j, p] : e) {
    if (!merged.empty() && merged.back().first == j) {
      merged.back().second += p;
    } else {
      merged.emplace_back(j, p);
    }
  }
  return Distribution::normalized(a.size(), std::move(merged));
}

}  // namespace

MarkovChain ref_gray_box(const MarkovChain& env) {
  std::vector<Distribution> rows;
  rows.reserve(env.size());
  for (const auto& row : env.rows()) rows.push_back(gray_row(row));
  return MarkovChain(std::move(rows), gray_row(env.init()), env.names());
}

MarkovChain ref_expert(const MarkovChain& env, double mix) {
  if (!(mix >= 0.0 && mix <= 1.0))
    throw Error(ErrorCode::kInvalidParams, "expert mixing weight must lie in [0, 1]");
  std::vector<Distribution> rows;
  rows.reserve(env.size());
  for (const auto& row : env.rows()) rows.push_back(mix_rows(row, gray_row(row), mix));
  return MarkovChain(std::move(rows), mix_rows(env.init(), gray_row(env.init()), mix),
                     env.names());
}

namespace {

constexpr std::array<CorruptionKind, 9> kAllCorruptions = {
    CorruptionKind::kAdditiveNoise, CorruptionKind::kInvert,   CorruptionKind::kSharpen,
    CorruptionKind::kSupportResample, CorruptionKind::kDropout, CorruptionKind::kSwap,
    CorruptionKind::kCollapse,      CorruptionKind::kBias,     CorruptionKind::kFlip,
};

}  // namespace

std::string_view corruption_name(CorruptionKind kind) noexcept {
  switch (kind) {
    case CorruptionKind::kAdditiveNoise: return "additive";
    case CorruptionKind::kInvert: return "invert";
    case CorruptionKind::kSharpen: return "sharpen";
    case CorruptionKind::kSupportResample: return "support_resample";
    case CorruptionKind::kDropout: return "dropout";
    case CorruptionKind::kSwap: return "swap";
    case CorruptionKind::kCollapse: return "collapse";
    case CorruptionKind::kBias: return "bias";
    case CorruptionKind::kFlip: return "flip";
  }
  return "unknown";
}

std::optional<CorruptionKind> parse_corruption(std::string_view name) noexcept {
  if (name == "additive_noise" || name == "noisy") return CorruptionKind::kAdditiveNoise;
  if (name == "inv") return CorruptionKind::kInvert;
  if (name == "sharp") return CorruptionKind::kSharpen;
  if (name == "supp" || name == "resample") return CorruptionKind::kSupportResample;
  if (name == "drop") return CorruptionKind::kDropout;
  for (auto k : kAllCorruptions)
    if (corruption_name(k) == name) return k;
  return std::nullopt;
}

std::span<const CorruptionKind> all_corruptions() noexcept { return kAllCorruptions; }

void CorruptionParams::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorCode::kInvalidParams, what); };
  if (!(noise_scale >= 0.0 && std::isfinite(noise_scale))) bad("noise scale must be >= 0");
  if (!(sharpen_power > 0.0 && std::isfinite(sharpen_power))) bad("sharpen power must be > 0");
  if (!(keep_probability >= 0.0 && keep_probability <= 1.0)) bad("keep probability outside [0, 1]");
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) bad("drop probability outside [0, 1]");
  if (!(collapse_spread >= 0.0 && collapse_spread < 1.0)) bad("collapse spread outside [0, 1)");
  if (!(bias_strength >= 0.0 && bias_strength <= 1.0)) bad("bias strength outside [0, 1]");
}

Distribution add_noise(const Distribution& row, std::span<const double> noise, bool on_support) {
  const std::size_t n = row.size();
  if (noise.size() != n) throw Error(ErrorCode::kDimensionMismatch, "noise length differs from row");
  std::vector<double> w = row.to_dense();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (on_support && w[j] == 0.0) continue;
    w[j] = std::max(0.0, w[j] + noise[j]);
    total += w[j];
  }
  if (!(total > 0.0)) return row;
  return Distribution::normalized(std::move(w));
}

namespace {

// Applies f to each support entry and renormalizes; nullopt if nothing is left.
template <class F>
std::optional<Distribution> map_support(const Distribution& row, F&& f) {
  std::vector<SparseEntry> e;
  e.reserve(row.support_size());
  double total = 0.0;
  row.for_each([&](Outcome j, double p) {
    const double q = f(j, p);
    if (q > 0.0) {
      e.emplace_back(j, q);
      total += q;
    }
  });
  if (!(total > 0.0) || !std::isfinite(total)) return std::nullopt;
  return Distribution::normalized(row.size(), std::move(e));
}

Distribution corrupt_row(const Distribution& row, CorruptionKind kind, const CorruptionParams& p,
                         Rng& rng) {
  const std::size_t n = row.size();
  switch (kind) {
    case CorruptionKind::kAdditiveNoise: {
      std::vector<double> noise(n, 0.0);
      if (p.noise_on_support) {
        row.for_each([&](Outcome j, double) { noise[j] = p.noise_scale * rng.uniform(-0.5, 0.5); });
      } else {
        for (auto& v : noise) v = p.noise_scale * rng.uniform(-0.5, 0.5);
      }
      return add_noise(row, noise, p.noise_on_support);
    }
    case CorruptionKind::kInvert:
      return map_support(row, [](Outcome, double q) { return 1.0 / q; }).value_or(row);
    case CorruptionKind::kSharpen:
      return map_support(row, [&](Outcome, double q) { return std::pow(q, p.sharpen_power); })
          .value_or(row);
    case CorruptionKind::kFlip:
      return map_support(row, [](Outcome, double q) { return 1.0 - q; }).value_or(row);
    case CorruptionKind::kSupportResample: {
      const auto orig = row.support();
      const Outcome kept = orig[rng.index(orig.size())];
      std::vector<Outcome> chosen;
      for (Outcome j = 0; j < n; ++j)
        if (j == kept || rng.bernoulli(p.keep_probability)) chosen.push_back(j);
      return uniform_over(n, chosen);
    }
    case CorruptionKind::kDropout: {
      const auto orig = row.support();
      const Outcome rescue = orig[rng.index(orig.size())];
      std::vector<bool> keep(orig.size());
      bool any = false;
      for (std::size_t k = 0; k < orig.size(); ++k) {
        keep[k] = !rng.bernoulli(p.drop_probability);
        any = any || keep[k];
      }
      return map_support(row, [&](Outcome j, double q) {
               const auto k = static_cast<std::size_t>(
                   std::lower_bound(orig.begin(), orig.end(), j) - orig.begin());
               return (keep[k] || (!any && j == rescue)) ? q : 0.0;
             })
          .value_or(row);
    }
    case CorruptionKind::kSwap: {
      auto e = row.entries();
      auto [lo, hi] = std::minmax_element(
          e.begin(), e.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
      std::swap(lo->second, hi->second);
      return Distribution::normalized(n, std::move(e));
    }
    case CorruptionKind::kCollapse: {
      const Outcome target = rng.index(n);
      std::vector<SparseEntry> e;
      const double share = p.collapse_spread / static_cast<double>(row.support_size());
      bool hit = false;
      row.for_each([&](Outcome j, double) {
        const double q = share + (j == target ? 1.0 - p.collapse_spread : 0.0);
        hit = hit || j == target;
        if (q > 0.0) e.emplace_back(j, q);
      });
      if (!hit) e.emplace_back(target, 1.0 - p.collapse_spread);
      std::sort(e.begin(), e.end());
      return Distribution::normalized(n, std::move(e));
    }
    case CorruptionKind::kBias: {
      if (p.bias_target >= n) throw Error(ErrorCode::kIndexOutOfRange, "bias target", p.bias_target);
      std::vector<double> w = row.to_dense();
      for (auto& v : w) v *= 1.0 - p.bias_strength;
      w[p.bias_target] += p.bias_strength;
      return Distribution::normalized(std::move(w));
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown corruption");
}

}  // namespace

MarkovChain corrupt(const MarkovChain& chain, CorruptionKind kind, const CorruptionParams& params,
                    std::uint64_t seed) {
  params.validate();
  std::vector<Distribution> rows;
  rows.reserve(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    Rng rng(seed, {static_cast<std::uint64_t>(kind), i});
    rows.push_back(corrupt_row(chain.row(i), kind, params, rng));
  }
  return MarkovChain(std::move(rows), chain.init(), chain.names());
}

StateScores exact_state_scores(const MarkovChain& env, const MarkovChain& model,
                               const ScoringRule& rule) {
  check_same_size(env, model);
  StateScores out;
  out.per_state.reserve(env.size());
  for (std::size_t i = 0; i < env.size(); ++i)
    out.per_state.push_back(expected_score(rule, model.row(i), env.row(i)));
  out.initial = expected_score(rule, model.init(), env.init());
  return out;
}

AesOracle::AesOracle(const MarkovChain& env, const MarkovChain& model, const ScoringRule& rule)
    : scores_(exact_state_scores(env, model, rule)) {}

double AesOracle::push(std::optional<Outcome> prev) {
  sum_ += prev ? scores_.per_state.at(*prev) : scores_.initial;
  ++steps_;
  return value();
}

WeightedAesOracle::WeightedAesOracle(const MarkovChain& env, const MarkovChain& model,
                                     RuleKind base, std::shared_ptr<const WeightFunctions> weights,
                                     DegeneratePenalty penalty)
    : env_(env), model_(model), base_(base), weights_(std::move(weights)), penalty_(penalty) {
  check_same_size(env, model);
  if (!weights_) throw Error(ErrorCode::kInvalidArgument, "weight functions required");
}

std::optional<double> WeightedAesOracle::push(Outcome observed) {
  std::span<const Outcome> z = history_;
  if (weights_->markovian() && z.size() > 1) z = z.last(1);
  const double a = weights_->alpha(z);
  if (a > 0.0) {
    std::optional<Outcome> prev;
    if (!z.empty()) prev = z.back();
    weighted_sum_ += a * expected_score(base_, &weights_->beta(z), model_.predict(prev),
                                        env_.predict(prev), penalty_);
    time_ += a;
  }
  if (weights_->markovian()) {
    history_.assign(1, observed);
  } else {
    history_.push_back(observed);
  }
  return value();
}

std::optional<double> WeightedAesOracle::value() const noexcept {
  if (!(time_ > 0.0)) return std::nullopt;
  return weighted_sum_ / time_;
}

namespace {

Distribution row_of(std::size_t n, std::initializer_list<SparseEntry> e) {
  return Distribution::sparse(n, std::vector<SparseEntry>(e));
}

}  // namespace

ToyScenario fairness_chain() {
  enum : Outcome { S, A, B, GA, RA, DA, GB, RB, DB, kN };
  std::vector<Distribution> env(kN, point_mass(kN, S));
  env[S] = row_of(kN, {{A, 0.8}, {B, 0.2}});
  env[A] = row_of(kN, {{S, 0.3}, {GA, 0.7}});
  env[B] = row_of(kN, {{S, 0.6}, {GB, 0.4}});
  env[GA] = row_of(kN, {{RA, 0.3}, {DA, 0.7}});
  env[GB] = row_of(kN, {{RB, 0.9}, {DB, 0.1}});

  std::vector<Distribution> model = env;
  model[S] = row_of(kN, {{A, 0.2}, {B, 0.8}});
  model[GA] = row_of(kN, {{RA, 0.7}, {DA, 0.3}});
  model[GB] = row_of(kN, {{RB, 0.1}, {DB, 0.9}});

  std::vector<std::string> names = {"S", "A", "B", "G_A", "R_A", "D_A", "G_B", "R_B", "D_B"};
  std::vector<double> alpha(kN, 0.0);
  alpha[A] = alpha[B] = 1.0;
  std::vector<WeightVector> beta(kN, WeightVector::constant(1.0));
  auto weights = std::make_shared<StateWeights>(std::move(alpha), std::move(beta), 0.0,
                                                WeightVector::constant(1.0));
  return {MarkovChain(std::move(env), point_mass(kN, S), names),
          MarkovChain(std::move(model), point_mass(kN, S), names), std::move(weights)};
}

ToyScenario safety_chain(std::optional<Distribution> env_s6) {
  enum : Outcome { s1, s2, s3, s4, s5, s6, kN };
  const Distribution s6_env =
      env_s6 ? std::move(*env_s6) : row_of(kN, {{s2, 0.2}, {s3, 0.6}, {s5, 0.2}});
  if (s6_env.size() != kN)
    throw Error(ErrorCode::kInvalidParams, "s6 row must be over the six states");
  s6_env.for_each([](Outcome j, double) {
    if (j != s2 && j != s3 && j != s5)
      throw Error(ErrorCode::kInvalidParams, "s6 row may only reach s2, s3 and s5", j);
  });

  std::vector<Distribution> env = {
      point_mass(kN, s2),
      row_of(kN, {{s3, 0.9}, {s4, 0.1}}),
      point_mass(kN, s5),
      point_mass(kN, s1),
      point_mass(kN, s6),
      s6_env,
  };
  std::vector<Distribution> model = env;
  model[s6] = row_of(kN, {{s2, 0.1}, {s3, 0.8}, {s5, 0.1}});

  auto in_c = [](Outcome s) { return s == s3 || s == s5 || s == s6; };
  std::vector<double> alpha(kN);
  std::vector<WeightVector> beta;
  for (Outcome s = 0; s < kN; ++s) {
    alpha[s] = in_c(s) ? 1.0 : 0.1;
    std::vector<double> b(kN, 0.05);
    if (in_c(s))
      for (Outcome t = 0; t < kN; ++t)
        if (!in_c(t)) b[t] = 1.0;
    beta.emplace_back(std::move(b), 1.0);
  }
  auto weights = std::make_shared<StateWeights>(std::move(alpha), std::move(beta), 0.1,
                                                WeightVector::constant(0.05, 1.0));
  std::vector<std::string> names = {"s1", "s2", "s3", "s4", "s5", "s6"};
  return {MarkovChain(std::move(env), point_mass(kN, s1), names),
          MarkovChain(std::move(model), point_mass(kN, s1), names), std::move(weights)};
}

std::pair<MarkovChain, MarkovChain> bernoulli_pair(double p_env, double p_model) {
  auto coin = [](double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::kInvalidParams, "coin probability outside [0, 1]");
    const auto d = Distribution::dense({1.0 - p, p});
    return MarkovChain({d, d}, d, {"0", "1"});
  };
  return {coin(p_env), coin(p_model)};
}

}  // namespace alignmon
