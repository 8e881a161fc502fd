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

#include "alignmon/dist.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <vector>

namespace alignmon {
namespace {

TEST(Validate, AcceptsFairCoin) {
  const std::vector<double> m = {0.5, 0.5};
  EXPECT_FALSE(validate(m).has_value());
}

TEST(Validate, ReportsSumMismatch) {
  const std::vector<double> m = {1.0, 1e-7};
  auto v = validate(m);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->code, ErrorCode::kMassSumMismatch);
}

TEST(Validate, ReportsNegativeMassWithIndex) {
  const std::vector<double> m = {0.6, -0.1, 0.5};
  auto v = validate(m);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->code, ErrorCode::kNegativeMass);
  EXPECT_EQ(v->index, 1u);
}

TEST(Validate, SparseIndexOutOfRange) {
  const std::vector<SparseEntry> e = {{0, 0.5}, {3, 0.5}};
  auto v = validate(3, e);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->code, ErrorCode::kIndexOutOfRange);
  EXPECT_EQ(v->index, 3u);
}

TEST(Validate, NonFiniteMass) {
  const std::vector<double> m = {std::numeric_limits<double>::quiet_NaN(), 1.0};
  auto v = validate(m);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->code, ErrorCode::kInvalidProbability);
}

TEST(Distribution, DenseThrowsCarryingCode) {
  try {
    Distribution::dense({0.6, -0.1, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeMass);
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Distribution, SparseRejectsDuplicates) {
  try {
    Distribution::sparse(4, {{1, 0.5}, {1, 0.5}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Distribution, RepresentationIsInvisible) {
  auto sparse = Distribution::sparse(100, {{3, 0.25}, {70, 0.75}});
  auto dense = Distribution::dense(sparse.to_dense());
  EXPECT_FALSE(sparse.stored_dense());
  EXPECT_TRUE(Distribution::dense({0.5, 0.5}).stored_dense());
  EXPECT_EQ(sparse, dense);
  for (Outcome i = 0; i < 100; ++i) EXPECT_EQ(sparse.prob(i), dense.prob(i));
  EXPECT_EQ(sparse.argmax(), 70u);
  EXPECT_EQ(sparse.support(), (std::vector<Outcome>{3, 70}));
}

TEST(Distribution, NormalizedRenormalizes) {
  auto d = Distribution::normalized({1.0, 3.0});
  EXPECT_DOUBLE_EQ(d[0], 0.25);
  EXPECT_DOUBLE_EQ(d[1], 0.75);
  EXPECT_THROW(Distribution::normalized({0.0, 0.0}), Error);
}

TEST(Constructors, Definitions) {
  EXPECT_EQ(uniform_over(3, std::vector<Outcome>{0, 1}).to_dense(),
            (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(point_mass(4, 2).to_dense(), (std::vector<double>{0, 0, 1, 0}));
  for (double p : uniform(5).to_dense()) EXPECT_DOUBLE_EQ(p, 0.2);
}

TEST(Constructors, Errors) {
  try {
    uniform_over(3, std::vector<Outcome>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySupport);
  }
  try {
    point_mass(3, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
  try {
    uniform_over(3, std::vector<Outcome>{0, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
}

TEST(Constructors, OutputsValidate) {
  Rng rng(7);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng.index(40);
    std::vector<Outcome> s;
    for (Outcome i = 0; i < n; ++i)
      if (rng.bernoulli(0.5)) s.push_back(i);
    if (s.empty()) s.push_back(rng.index(n));
    for (const auto& d : {uniform(n), point_mass(n, rng.index(n)), uniform_over(n, s)}) {
      const auto m = d.to_dense();
      EXPECT_FALSE(validate(m).has_value());
    }
  }
}

TEST(Sample, PointMass) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(sample(point_mass(5, 3), rng), 3u);
  }
}

TEST(Sample, ZeroMassNeverDrawn) {
  Rng rng(11);
  const auto d = Distribution::dense({0.0, 1.0});
  for (int i = 0; i < 100000; ++i) ASSERT_EQ(sample(d, rng), 1u);
  const auto s = Distribution::dense({0.2, 0.0, 0.3, 0.0, 0.5});
  CdfSampler cdf(s);
  for (int i = 0; i < 100000; ++i) {
    ASSERT_NE(sample(s, rng), 1u);
    const auto x = cdf(rng);
    ASSERT_TRUE(x == 0 || x == 2 || x == 4);
  }
}

TEST(Sample, FairCoinFrequency) {
  Rng rng(2024);
  const auto d = Distribution::dense({0.5, 0.5});
  int zeros = 0;
  for (int i = 0; i < 100000; ++i) zeros += sample(d, rng) == 0;
  EXPECT_NEAR(zeros / 1e5, 0.5, 0.01);
}

TEST(Sample, SeededDeterminism) {
  const auto d = Distribution::normalized({1, 2, 3, 4, 5});
  Rng a(99), b(99), c(100);
  std::vector<Outcome> xa, xb, xc;
  for (int i = 0; i < 1000; ++i) {
    xa.push_back(sample(d, a));
    xb.push_back(sample(d, b));
    xc.push_back(sample(d, c));
  }
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
}

TEST(Sample, CdfSamplerMatchesFrequencies) {
  const auto d = Distribution::dense({0.1, 0.2, 0.7});
  CdfSampler cdf(d);
  Rng rng(5);
  std::vector<int> counts(3);
  for (int i = 0; i < 100000; ++i) ++counts[cdf(rng)];
  EXPECT_NEAR(counts[0] / 1e5, 0.1, 0.01);
  EXPECT_NEAR(counts[2] / 1e5, 0.7, 0.01);
}

TEST(Rng, StreamsAreIndependentOfEachOther) {
  Rng a(1, {0}), b(1, {1});
  EXPECT_NE(a.next_u64(), b.next_u64());
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {1}));
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
}

TEST(Rng, UniformRange) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.index(7), 7u);
  }
}

}  // namespace
}  // namespace alignmon
