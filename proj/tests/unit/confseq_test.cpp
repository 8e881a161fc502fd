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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "alignmon/error.hpp"
#include "alignmon/rng.hpp"

namespace alignmon {
namespace {

// Values computed independently in extended precision.
constexpr double kG_e_05 = 4.186579756584681;
constexpr double kEps_1_1 = 22.63893938454025;
constexpr double kEps_1_125 = 22.735440784842613;
constexpr double kEps_2_125 = 11.367720392421306;

TEST(Boundary, ClampedValue) {
  EXPECT_NEAR(boundary(std::numbers::e, 0.05), kG_e_05, 1e-12);
  EXPECT_NEAR(boundary(std::numbers::e, 0.05), 4.18638, 1e-3);
  EXPECT_NEAR(boundary(std::numbers::e, 0.05),
              2 * std::log(std::numbers::pi / std::sqrt(6.0)) + std::log(40.0), 1e-14);
  EXPECT_EQ(boundary(1.0, 0.05), boundary(std::numbers::e, 0.05));
  EXPECT_TRUE(std::isfinite(boundary(1.0, 0.3)));
}

TEST(Boundary, MonotoneOnGrid) {
  for (double d : {0.01, 0.05, 0.1, 0.5, 0.9}) {
    double prev = -1e300;
    for (double n = 1.0; n < 1e7; n *= 1.7) {
      const double g = boundary(n, d);
      EXPECT_GE(g, prev);
      prev = g;
    }
  }
  for (double n : {1.0, 10.0, 1e4}) {
    double prev = -1e300;
    for (double d = 0.95; d > 1e-6; d /= 2) {
      const double g = boundary(n, d);
      EXPECT_GE(g, prev);
      prev = g;
    }
  }
}

TEST(Boundary, DomainErrors) {
  for (double d : {0.0, 1.0, -0.1, 1.5}) {
    try {
      boundary(2.0, d);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDomainError);
    }
  }
}

TEST(Radius, Values) {
  EXPECT_NEAR(radius(1, 1, 0.05, 2), kEps_1_1, 1e-11);
  EXPECT_NEAR(radius(1, 1.25, 0.05, 2), kEps_1_125, 1e-11);
  EXPECT_NEAR(radius(2, 1.25, 0.05, 2), kEps_2_125, 1e-11);
}

TEST(Radius, Scaling) {
  EXPECT_DOUBLE_EQ(radius(8, 3, 0.1, 1) / radius(16, 3, 0.1, 1), 2.0);
  EXPECT_GT(radius(5, 3, 0.1, 2), radius(5, 3, 0.1, 1));
  EXPECT_GT(radius(0.25, 1, 0.1, 1), radius(1, 1, 0.1, 1));
  EXPECT_THROW(radius(0, 1, 0.1, 1), Error);
  EXPECT_THROW(radius(-1, 1, 0.1, 1), Error);
}

TEST(Core, HandTrace) {
  MonitorCore c(2.0, 0.05);
  EXPECT_FALSE(c.has_observations());
  c.update(0.5);
  EXPECT_EQ(c.time(), 1.0);
  EXPECT_EQ(c.estimate(), 0.5);
  EXPECT_EQ(c.variance_process(), 1.25);
  EXPECT_NEAR(c.radius(), kEps_1_125, 1e-11);
  c.update(0.5);
  EXPECT_EQ(c.time(), 2.0);
  EXPECT_EQ(c.estimate(), 0.5);
  EXPECT_EQ(c.variance_process(), 1.25);
  const auto [lo, hi] = c.interval();
  EXPECT_DOUBLE_EQ(hi - c.estimate(), c.estimate() - lo);
  EXPECT_NEAR(hi - lo, 2 * kEps_2_125, 1e-10);
}

TEST(Core, ZeroWeightIsNoOp) {
  MonitorCore c(1.0, 0.1);
  c.update(0.3);
  c.update(0.7, 0.5);
  const auto t = c.time();
  const auto e = c.estimate();
  const auto n = c.variance_process();
  c.update(0.0, 0.0);
  EXPECT_EQ(c.time(), t);
  EXPECT_EQ(c.estimate(), e);
  EXPECT_EQ(c.variance_process(), n);
}

TEST(Core, NoObservations) {
  MonitorCore c(1.0, 0.1);
  c.update(0.0, 0.0);
  try {
    c.interval();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoObservations);
  }
}

TEST(Core, InvalidConstruction) {
  EXPECT_THROW(MonitorCore(0.0, 0.1), Error);
  EXPECT_THROW(MonitorCore(1.0, 1.0), Error);
}

TEST(Core, VarianceMonotoneAndEstimateBounded) {
  Rng rng(9);
  for (int run = 0; run < 50; ++run) {
    MonitorCore c(2.0, 0.1);
    double prev_n = 1.0, prev_t = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double w = rng.bernoulli(0.2) ? 0.0 : rng.uniform();
      const double s = w * 2.0 * rng.uniform();
      c.update(s, w);
      ASSERT_GE(c.variance_process(), 1.0);
      ASSERT_GE(c.variance_process(), prev_n);
      ASSERT_GE(c.time(), prev_t);
      prev_n = c.variance_process();
      prev_t = c.time();
    }
  }
  for (int run = 0; run < 50; ++run) {
    MonitorCore c(2.0, 0.1);
    for (int i = 0; i < 1000; ++i) {
      c.update(2.0 * rng.uniform());
      ASSERT_GE(c.estimate(), 0.0);
      ASSERT_LE(c.estimate(), 2.0);
    }
  }
}

TEST(Core, PermutationKeepsTimeAndEstimate) {
  Rng rng(10);
  std::vector<std::pair<double, double>> obs;
  for (int i = 0; i < 200; ++i) obs.emplace_back(rng.uniform(), 1.0);
  MonitorCore a(1.0, 0.1), b(1.0, 0.1);
  for (auto [s, w] : obs) a.update(s, w);
  std::reverse(obs.begin(), obs.end());
  for (auto [s, w] : obs) b.update(s, w);
  EXPECT_EQ(a.time(), b.time());
  EXPECT_NEAR(a.estimate(), b.estimate(), 1e-12);
}

TEST(Core, RadiusShrinksAlongRun) {
  Rng rng(12);
  MonitorCore c(2.0, 0.05);
  double eps100 = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    c.update(2.0 * rng.uniform());
    if (i == 100) eps100 = c.radius();
  }
  EXPECT_LT(c.radius(), eps100);
}

}  // namespace
}  // namespace alignmon
