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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace alignmon {
namespace {

Distribution random_dist(Rng& rng, std::size_t n, double zero_prob = 0.0) {
  std::vector<double> w(n);
  for (auto& v : w) v = rng.bernoulli(zero_prob) ? 0.0 : rng.uniform() + 1e-3;
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[rng.index(n)] = 1.0;
  return Distribution::normalized(std::move(w));
}

// Dense reference implementations straight from the definitions.
double brier_ref(const std::vector<double>& y, Outcome x) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - (i == x ? 1.0 : 0.0);
    s += d * d;
  }
  return s;
}

double spherical_ref(const std::vector<double>& y, Outcome x) {
  double ss = 0.0;
  for (double v : y) ss += v * v;
  return -y[x] / std::sqrt(ss);
}

TEST(Brier, Examples) {
  EXPECT_EQ(brier(point_mass(3, 1), 1), 0.0);
  EXPECT_EQ(brier(point_mass(3, 1), 2), 2.0);
  EXPECT_DOUBLE_EQ(brier(Distribution::dense({0.5, 0.5}), 0), 0.5);
}

TEST(Spherical, Examples) {
  EXPECT_EQ(spherical(point_mass(3, 1), 1), -1.0);
  EXPECT_EQ(spherical(Distribution::dense({0.5, 0.5, 0.0}), 2), 0.0);
  EXPECT_DOUBLE_EQ(spherical(uniform(4), 3), -0.5);
  EXPECT_NEAR(spherical(uniform(9), 0), -1.0 / 3.0, 1e-15);
}

TEST(Rules, MatchDenseReference) {
  Rng rng(41);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 1 + rng.index(64);
    const auto y = random_dist(rng, n, 0.5);
    const auto dense = y.to_dense();
    const Outcome x = rng.index(n);
    EXPECT_NEAR(brier(y, x), brier_ref(dense, x), 1e-12);
    EXPECT_NEAR(spherical(y, x), spherical_ref(dense, x), 1e-12);
  }
}

TEST(Rules, ScoresWithinBounds) {
  Rng rng(42);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t n = 1 + rng.index(64);
    const auto y = random_dist(rng, n, 0.3);
    const Outcome x = rng.index(n);
    for (auto kind : {RuleKind::kBrier, RuleKind::kSpherical}) {
      const double s = score(kind, y, x);
      EXPECT_TRUE(rule_bounds(kind).contains(s)) << rule_name(kind) << " " << s;
    }
  }
}

TEST(Rules, NamesRoundTrip) {
  for (auto kind : {RuleKind::kBrier, RuleKind::kSpherical})
    EXPECT_EQ(parse_rule(rule_name(kind)), kind);
  EXPECT_FALSE(parse_rule("log").has_value());
  EXPECT_EQ(rule_bounds(RuleKind::kBrier).a, 0.0);
  EXPECT_EQ(rule_bounds(RuleKind::kBrier).b, 2.0);
  EXPECT_EQ(rule_bounds(RuleKind::kSpherical).a, -1.0);
  EXPECT_EQ(rule_bounds(RuleKind::kSpherical).b, 0.0);
}

TEST(WeightVectorTest, RejectsOutOfCap) {
  EXPECT_THROW(WeightVector({0.5, 1.5}, 1.0), Error);
  EXPECT_THROW(WeightVector({-0.1, 0.5}, 1.0), Error);
  EXPECT_NO_THROW(WeightVector({0.0, 2.0}, 2.0));
}

TEST(Reweight, Examples) {
  const auto y = Distribution::dense({0.5, 0.5});
  auto r = reweight(y, WeightVector({1.0, 0.0}, 1.0));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->to_dense(), (std::vector<double>{1.0, 0.0}));
  auto same = reweight(Distribution::dense({0.2, 0.8}), WeightVector({0.3, 0.3}, 1.0));
  ASSERT_TRUE(same);
  EXPECT_NEAR(same->prob(0), 0.2, 1e-15);
  EXPECT_FALSE(reweight(Distribution::dense({1.0, 0.0}), WeightVector({0.0, 1.0}, 1.0)));
}

TEST(WeightedScore, Examples) {
  const auto y = Distribution::dense({0.5, 0.5});
  const WeightVector w10({1.0, 0.0}, 1.0);
  EXPECT_EQ(weighted_score(RuleKind::kBrier, w10, y, 1), 0.0);
  EXPECT_EQ(weighted_score(RuleKind::kBrier, w10, y, 0), 0.0);
  EXPECT_EQ(weighted_score(RuleKind::kBrier, WeightVector({0.0, 1.0}, 1.0),
                           Distribution::dense({1.0, 0.0}), 1),
            2.0);
  EXPECT_EQ(weighted_score(RuleKind::kBrier, WeightVector({0.0, 1.0}, 1.0),
                           Distribution::dense({1.0, 0.0}), 1, DegeneratePenalty::kLowerBound),
            0.0);
}

// Two independent routes: streaming two-pass score vs. materialized reweight.
TEST(WeightedScore, AgreesWithReweightThenScore) {
  Rng rng(43);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t n = 1 + rng.index(32);
    const auto y = random_dist(rng, n, 0.4);
    std::vector<double> w(n);
    const double cap = 0.5 + 2.0 * rng.uniform();
    for (auto& v : w) v = rng.bernoulli(0.3) ? 0.0 : cap * rng.uniform();
    const WeightVector omega(w, cap);
    const Outcome x = rng.index(n);
    for (auto kind : {RuleKind::kBrier, RuleKind::kSpherical}) {
      const double got = weighted_score(kind, omega, y, x);
      double want;
      if (omega(x) == 0.0) {
        want = 0.0;
      } else if (auto r = reweight(y, omega)) {
        want = omega(x) * score(kind, *r, x);
      } else {
        want = omega(x) * rule_bounds(kind).b;
      }
      EXPECT_NEAR(got, want, 1e-12);
      const auto rule = ScoringRule::weighted(kind, omega);
      EXPECT_GE(got, rule.bounds().a - 1e-12);
      EXPECT_LE(got, rule.bounds().b + 1e-12);
    }
  }
}

TEST(WeightedScore, UnitWeightsAreBitExact) {
  Rng rng(44);
  const auto one = WeightVector::constant(1.0);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 1 + rng.index(20);
    const auto y = random_dist(rng, n, 0.2);
    const Outcome x = rng.index(n);
    EXPECT_EQ(weighted_score(RuleKind::kBrier, one, y, x), brier(y, x));
    EXPECT_EQ(weighted_score(RuleKind::kSpherical, one, y, x), spherical(y, x));
  }
}

TEST(WeightedRule, Bounds) {
  const auto r = ScoringRule::weighted(RuleKind::kSpherical, WeightVector({0.0, 3.0}, 3.0));
  EXPECT_EQ(r.bounds().a, -3.0);
  EXPECT_EQ(r.bounds().b, 0.0);
  EXPECT_TRUE(r.is_weighted());
}

TEST(ExpectedScore, Examples) {
  EXPECT_EQ(expected_score(ScoringRule::brier(), point_mass(3, 0), point_mass(3, 0)), 0.0);
  EXPECT_DOUBLE_EQ(expected_score(ScoringRule::brier(), Distribution::dense({0.5, 0.5}),
                                  Distribution::dense({1.0, 0.0})),
                   0.5);
  try {
    expected_score(ScoringRule::brier(), uniform(2), uniform(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(ExpectedScore, MatchedBernoulliClosedForm) {
  const auto p = Distribution::dense({0.65, 0.35});
  EXPECT_NEAR(expected_score(ScoringRule::brier(), p, p), 2 * 0.35 * 0.65, 1e-15);
}

TEST(ExpectedScore, Propriety) {
  Rng rng(45);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + rng.index(15);
    const auto truth = random_dist(rng, n, 0.3);
    const auto pred = random_dist(rng, n, 0.3);
    for (auto kind : {RuleKind::kBrier, RuleKind::kSpherical}) {
      const auto rule = ScoringRule::of(kind);
      EXPECT_LE(expected_score(rule, truth, truth), expected_score(rule, pred, truth) + 1e-12);
    }
  }
}

// Predictions that agree with the truth on {omega > 0} up to scaling score
// identically; disagreeing ones never score better.
TEST(ExpectedScore, WeightedProprietyOnPositiveWeights) {
  Rng rng(46);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 3 + rng.index(10);
    std::vector<double> w(n);
    for (auto& v : w) v = rng.bernoulli(0.3) ? 0.0 : 0.1 + rng.uniform();
    w[0] = 0.5;
    const WeightVector omega(w, 1.1);
    std::vector<double> t(n), same(n), other(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = 0.05 + rng.uniform();
      other[i] = 0.05 + rng.uniform();
      same[i] = w[i] > 0.0 ? 3.0 * t[i] : 0.05 + rng.uniform();
    }
    const auto truth = Distribution::normalized(t);
    const auto pred_same = Distribution::normalized(same);
    const auto pred_other = Distribution::normalized(other);
    for (auto kind : {RuleKind::kBrier, RuleKind::kSpherical}) {
      const double e_truth = expected_score(kind, &omega, truth, truth);
      EXPECT_NEAR(expected_score(kind, &omega, pred_same, truth), e_truth, 1e-12);
      EXPECT_LE(e_truth, expected_score(kind, &omega, pred_other, truth) + 1e-12);
    }
  }
}

TEST(ExpectedScore, AgreesWithMonteCarlo) {
  Rng rng(47);
  for (int k = 0; k < 5; ++k) {
    const std::size_t n = 2 + rng.index(10);
    const auto truth = random_dist(rng, n);
    const auto pred = random_dist(rng, n);
    for (auto kind : {RuleKind::kBrier, RuleKind::kSpherical}) {
      const auto rule = ScoringRule::of(kind);
      double sum = 0.0, sq = 0.0;
      const int m = 100000;
      for (int i = 0; i < m; ++i) {
        const double s = rule(pred, sample(truth, rng));
        sum += s;
        sq += s * s;
      }
      const double mean = sum / m;
      const double se = std::sqrt((sq / m - mean * mean) / m);
      EXPECT_NEAR(mean, expected_score(rule, pred, truth), 3 * se + 1e-12);
    }
  }
}

}  // namespace
}  // namespace alignmon
