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

#include "alignmon/harness.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "alignmon/ingest.hpp"

namespace alignmon {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

TEST(Config, LaterMergesWin) {
  ExperimentConfig c;
  merge_config_json(c, R"({"steps": 200, "delta": 0.1, "rule": "spherical"})");
  merge_config_json(c, R"({"steps": 50})");
  EXPECT_EQ(c.steps, 50u);
  EXPECT_DOUBLE_EQ(c.delta, 0.1);
  EXPECT_EQ(c.rule, RuleKind::kSpherical);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "table", "corruption": "invert", "reference": "gray",
                          "table": {"benchmarks": ["die"], "references": ["black"]},
                          "bench": {"sizes": [10, 20]}, "safety_s6": [0, 0.5, 0.5, 0, 0, 0]})");
  ExperimentConfig d;
  merge_config_json(d, config_to_json(c));
  EXPECT_EQ(config_to_json(c), config_to_json(d));
  EXPECT_EQ(d.table.references, std::vector<ReferenceKind>{ReferenceKind::kBlack});
  EXPECT_EQ(d.corruption, CorruptionKind::kInvert);
}

TEST(Config, Errors) {
  ExperimentConfig c;
  EXPECT_EQ(code_of([&] { merge_config_json(c, "{steps: 3"); }), ErrorCode::kSyntaxError);
  EXPECT_EQ(code_of([&] { merge_config_json(c, R"({"stepz": 3})"); }), ErrorCode::kInvalidParams);
  EXPECT_EQ(code_of([&] { merge_config_json(c, R"({"steps": -3})"); }), ErrorCode::kInvalidParams);
  EXPECT_EQ(code_of([&] { merge_config_json(c, R"({"rule": "log"})"); }), ErrorCode::kInvalidParams);
  EXPECT_EQ(code_of([&] { merge_config_json(c, R"([1, 2])"); }), ErrorCode::kInvalidParams);

  auto invalid = [](const char* patch) {
    ExperimentConfig c;
    merge_config_json(c, patch);
    return code_of([&] { c.validate(); });
  };
  EXPECT_EQ(invalid(R"({"delta": 0})"), ErrorCode::kInvalidParams);
  EXPECT_EQ(invalid(R"({"delta": 1})"), ErrorCode::kInvalidParams);
  EXPECT_EQ(invalid(R"({"steps": 0})"), ErrorCode::kInvalidParams);
  EXPECT_EQ(invalid(R"({"runs": 0})"), ErrorCode::kInvalidParams);
  EXPECT_EQ(invalid(R"({"environment": "/nonexistent/chain.tra"})"), ErrorCode::kIoError);
  EXPECT_EQ(invalid(R"({"scenario": "differential"})"), ErrorCode::kInvalidParams);
  EXPECT_EQ(invalid(R"({"scenario": "differential", "reference": "gray"})"), ErrorCode::kOk);
}

TEST(Setup, ResolvesSources) {
  ExperimentConfig c;
  c.environment = "die";
  auto s = build_setup(c);
  EXPECT_EQ(s.env.size(), 13u);
  EXPECT_EQ(s.env, s.model);
  EXPECT_FALSE(s.reference);
  // BSCC avoidance puts 0.01 back on the initial state from an absorbing outcome.
  EXPECT_NEAR(s.env.row(7).prob(0), 0.01, 1e-15);

  c.corruption = CorruptionKind::kInvert;
  c.reference = ReferenceKind::kGray;
  s = build_setup(c);
  EXPECT_EQ(s.model, corrupt(s.env, CorruptionKind::kInvert));
  EXPECT_EQ(*s.reference, ref_gray_box(s.env));

  c = {};
  c.environment = "fairness";
  s = build_setup(c);
  EXPECT_EQ(s.model, fairness_chain().model);
  EXPECT_EQ(s.weights->alpha(std::vector<Outcome>{1}), 1.0);

  c.weights = WeightsKind::kSafety;
  EXPECT_EQ(code_of([&] { build_setup(c); }), ErrorCode::kDimensionMismatch);
}

TEST(Seeds, StableAndDistinct) {
  EXPECT_EQ(run_seed(7, "die", 3), run_seed(7, "die", 3));
  EXPECT_NE(run_seed(7, "die", 3), run_seed(7, "die", 4));
  EXPECT_NE(run_seed(7, "die", 3), run_seed(7, "brp-16-2", 3));
  EXPECT_NE(corruption_seed(7, "die", CorruptionKind::kInvert),
            corruption_seed(7, "die", CorruptionKind::kAdditiveNoise));
}

TEST(Gaussian, PointwiseDensityRenormalized) {
  const auto g = discretized_gaussian(50, 5, 100);
  double z = 0.0;
  for (int i = 0; i < 100; ++i) z += std::exp(-0.5 * ((i - 50) / 5.0) * ((i - 50) / 5.0));
  for (int i : {0, 30, 49, 50, 51, 99})
    EXPECT_NEAR(g.prob(i), std::exp(-0.5 * ((i - 50) / 5.0) * ((i - 50) / 5.0)) / z, 1e-15);
  EXPECT_EQ(g.argmax(), 50u);
  EXPECT_EQ(code_of([] { discretized_gaussian(50, 0, 100); }), ErrorCode::kInvalidParams);
}

TEST(Sweep, MinimumAtMatchedMeanAndSymmetric) {
  ExperimentConfig c;
  c.scenario = Scenario::kSweep;
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 41u);
  std::size_t best_b = 0, best_s = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].expected_brier, 0.0);
    EXPECT_LE(rows[i].expected_brier, 2.0);
    EXPECT_GE(rows[i].expected_spherical, -1.0);
    EXPECT_LE(rows[i].expected_spherical, 0.0);
    if (rows[i].expected_brier < rows[best_b].expected_brier) best_b = i;
    if (rows[i].expected_spherical < rows[best_s].expected_spherical) best_s = i;
  }
  EXPECT_EQ(rows[best_b].parameter, 50.0);
  EXPECT_EQ(rows[best_s].parameter, 50.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    EXPECT_NEAR(rows[i].expected_brier, rows[rows.size() - 1 - i].expected_brier, 1e-9);

  // Matched point: E Brier = 1 - sum y^2 and E spherical = -||y||.
  const auto y = discretized_gaussian(50, 5, 100).to_dense();
  double sq = 0.0;
  for (double p : y) sq += p * p;
  EXPECT_NEAR(rows[20].expected_brier, 1.0 - sq, 1e-12);
  EXPECT_NEAR(rows[20].expected_spherical, -std::sqrt(sq), 1e-12);
}

TEST(Sweep, OverStddev) {
  ExperimentConfig c;
  c.scenario = Scenario::kSweep;
  merge_config_json(c, R"({"sweep": {"parameter": "sd", "from": 1, "to": 12, "step": 0.5}})");
  const auto rows = run_sweep(c);
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].expected_brier < rows[best].expected_brier) best = i;
  EXPECT_EQ(rows[best].parameter, 5.0);
}

TEST(Monitoring, DeterministicMatchedModelScoresZero) {
  const auto path = temp_file("alignmon_cycle.tra", "3 3\n0 1 1\n1 2 1\n2 0 1\n");
  ExperimentConfig c;
  c.environment = path.string();
  c.bscc_rho = 0.0;
  c.steps = 50;
  c.runs = 2;
  for (const auto& r : run_monitoring(c)) {
    EXPECT_EQ(r.verdict.estimate, 0.0);
    EXPECT_EQ(*r.truth, 0.0);
    EXPECT_TRUE(r.verdict.contains(0.0));
  }
}

TEST(Monitoring, MatchedModelTruthInsideInterval) {
  ExperimentConfig c;
  c.environment = "die";
  c.steps = 300;
  c.runs = 20;
  c.delta = 0.1;
  std::size_t violated_runs = 0, last_run = SIZE_MAX;
  for (const auto& r : run_monitoring(c))
    if (!r.verdict.contains(*r.truth) && r.run != last_run) {
      ++violated_runs;
      last_run = r.run;
    }
  EXPECT_LE(violated_runs, 2u);
}

TEST(Monitoring, InvertedCrowdsScoresWorse) {
  ExperimentConfig c;
  c.environment = "crowds-4-3";
  c.steps = 1000;
  const double aligned = run_monitoring(c).back().verdict.estimate;
  c.corruption = CorruptionKind::kInvert;
  const auto rec = run_monitoring(c).back();
  EXPECT_GT(rec.verdict.estimate, aligned);
  EXPECT_GT(rec.verdict.estimate, *rec.ref_gray);
  EXPECT_EQ(rec.verdict.step, 1000u);
}

TEST(Monitoring, DeterministicAcrossThreadCounts) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "differential", "environment": "brp-16-2",
                          "corruption": "additive", "reference": "gray", "runs": 4,
                          "steps": 200, "seed": 11, "format": "jsonl"})");
  std::vector<std::string> a, b;
  c.threads = 1;
  run_experiment(c, [&](std::string_view l) { a.emplace_back(l); });
  c.threads = 4;
  run_experiment(c, [&](std::string_view l) { b.emplace_back(l); });
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 800u);
  EXPECT_NE(a[0].find("\"decision\""), std::string::npos);
}

TEST(Monitoring, WeightedRecordsAndCsvShape) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "weighted", "environment": "fairness", "steps": 5})");
  std::vector<std::string> lines;
  run_experiment(c, [&](std::string_view l) { lines.emplace_back(l); });
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "run,t,est,lo,hi,true_aes,ref_environment,ref_gray,ref_black");
  // Step 1 predicts from the initial distribution, where alpha is zero.
  EXPECT_EQ(lines[1].substr(0, 7), "0,1,,,,");
}

TEST(Table, DieAndBrpDirectionsAndTimes) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "table", "runs": 5, "steps": 1000,
                          "table": {"benchmarks": ["die"], "corruptions": ["invert"],
                                    "references": ["environment"]}})");
  auto t = run_decision_table(c);
  ASSERT_EQ(t.cells.size(), 1u);
  EXPECT_EQ(t.cells[0].decision, DecisionValue::kReferenceBetter);
  EXPECT_EQ(t.cells[0].bot, 5u);
  EXPECT_LE(t.cells[0].mean_at_step, 150.0);
  ASSERT_EQ(t.records.size(), 5u);
  for (const auto& r : t.records) EXPECT_LE(*r.at_step, 1000u);

  merge_config_json(c, R"({"table": {"benchmarks": ["brp-16-2"], "corruptions": ["additive"],
                                    "references": ["gray", "black"]}})");
  t = run_decision_table(c);
  ASSERT_EQ(t.cells.size(), 2u);
  EXPECT_EQ(t.cells[0].decision, DecisionValue::kModelBetter);
  EXPECT_LE(t.cells[0].mean_at_step, 600.0);
  EXPECT_EQ(t.cells[1].decision, DecisionValue::kModelBetter);
}

TEST(Table, DirectionsMatchPublishedTable) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "table", "runs": 5, "steps": 1000})");
  const auto t = run_decision_table(c);
  // environment, expert, gray, black
  const std::map<std::string, std::string> additive = {
      {"die", "?TTT"}, {"brp-16-2", "BBTT"}, {"nand-5-2", "BBBT"}};
  auto letter = [](DecisionValue d) {
    return d == DecisionValue::kModelBetter ? 'T' : d == DecisionValue::kReferenceBetter ? 'B' : '?';
  };
  std::map<std::string, std::string> got;
  for (const auto& cell : t.cells) {
    if (cell.corruption == CorruptionKind::kInvert)
      EXPECT_EQ(cell.decision, DecisionValue::kReferenceBetter) << cell.benchmark;
    else
      got[cell.benchmark] += letter(cell.decision);
  }
  for (const auto& [name, want] : additive) EXPECT_EQ(got[name], want) << name;
  // Beating the gray box implies beating the black box.
  for (const auto& [name, row] : got)
    if (row[2] == 'T') EXPECT_EQ(row[3], 'T') << name;
}

TEST(Table, UndecidedRunsCountAsHorizon) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "table", "runs": 3, "steps": 5,
                          "table": {"benchmarks": ["leader-3-5"], "corruptions": ["additive"],
                                    "references": ["environment"], "records": true}})");
  const auto t = run_decision_table(c);
  EXPECT_EQ(t.cells[0].decision, DecisionValue::kUndecided);
  EXPECT_EQ(t.cells[0].mean_at_step, 5.0);
  EXPECT_EQ(t.cells[0].sd_at_step, 0.0);
  std::vector<std::string> lines;
  run_experiment(c, [&](std::string_view l) { lines.emplace_back(l); });
  EXPECT_EQ(lines[0], "benchmark,corruption,reference,run,decision,at_step");
  EXPECT_EQ(lines[1], "leader-3-5,additive,environment,0,?,");
}

TEST(Coverage, WilsonInterval) {
  // 0 of n: upper end z^2 / (n + z^2).
  const double z2 = 1.959963984540054 * 1.959963984540054;
  auto [lo, hi] = wilson_interval(0, 10);
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(wilson_interval(0, 300).first, 0.0);
  EXPECT_NEAR(hi, z2 / (10 + z2), 1e-15);
  std::tie(lo, hi) = wilson_interval(5, 10);
  EXPECT_NEAR(0.5 - lo, hi - 0.5, 1e-15);
  std::tie(lo, hi) = wilson_interval(10, 10);
  EXPECT_NEAR(lo, 10 / (10 + z2), 1e-15);
  EXPECT_EQ(hi, 1.0);
}

TEST(Coverage, LooseDeltaStaysBelowDelta) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "coverage", "environment": "bernoulli",
                          "bernoulli_model": 0.6, "delta": 0.5, "runs": 60, "steps": 300})");
  const auto r = run_coverage(c);
  EXPECT_EQ(r.runs, 60u);
  EXPECT_LE(r.rate, 0.5);
  EXPECT_LE(r.ci_lo, r.rate);
  EXPECT_GE(r.ci_hi, r.rate);
}

TEST(Coverage, WeightedAndDifferential) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "coverage", "environment": "fairness",
                          "coverage_monitor": "weighted", "delta": 0.1, "runs": 40, "steps": 300})");
  EXPECT_LE(run_coverage(c).rate, 0.1);
  merge_config_json(c, R"({"coverage_monitor": "differential", "reference": "gray"})");
  EXPECT_LE(run_coverage(c).rate, 0.1);
}

TEST(Bench, RowsPerSize) {
  ExperimentConfig c;
  merge_config_json(c, R"({"scenario": "bench", "bench": {"sizes": [10, 1000], "trace": 1000,
                          "core_repeats": 3}})");
  const auto rows = run_bench(c);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_GT(r.total_ns, 0.0);
    EXPECT_GT(r.scoring_ns, 0.0);
    EXPECT_GT(r.core_ns, 0.0);
  }
  EXPECT_GT(rows[1].scoring_ns, rows[0].scoring_ns);
  std::vector<std::string> lines;
  run_experiment(c, [&](std::string_view l) { lines.emplace_back(l); });
  EXPECT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1].substr(0, 3), "10,");
}

TEST(Stream, RepeatedCertainPrediction) {
  StreamMonitor m(StreamMonitor::Mode::kAverage, RuleKind::kBrier, 0.05);
  double last_width = INFINITY;
  for (int i = 0; i < 20; ++i) {
    auto out = nlohmann::json::parse(m.push(R"({"p":[1,0],"x":0})"));
    EXPECT_EQ(out["t"], i + 1);
    EXPECT_EQ(out["est"], 0.0);
    const double width = out["hi"].get<double>() - out["lo"].get<double>();
    EXPECT_LT(width, last_width);
    last_width = width;
  }
}

TEST(Stream, DifferentialWithEqualReferenceNeverDecides) {
  StreamMonitor m(StreamMonitor::Mode::kDifferential, RuleKind::kSpherical, 0.05);
  for (int i = 0; i < 200; ++i) {
    auto out = nlohmann::json::parse(
        m.push(R"({"p":{"0":0.25,"2":0.75},"pref":{"0":0.25,"2":0.75},"x":2})"));
    EXPECT_EQ(out["decision"], "undecided");
    EXPECT_EQ(out["est"], 0.0);
  }
}

TEST(Stream, Errors) {
  StreamMonitor m(StreamMonitor::Mode::kAverage, RuleKind::kBrier, 0.05);
  auto code = [&](const char* line) { return code_of([&] { m.push(line); }); };
  EXPECT_EQ(code(R"({"p":[0.5,0.6],"x":0})"), ErrorCode::kInvalidProbability);
  EXPECT_EQ(code(R"({"p":[1.5,-0.5],"x":0})"), ErrorCode::kInvalidProbability);
  EXPECT_EQ(code("not json"), ErrorCode::kMalformedRecord);
  EXPECT_EQ(code(R"({"p":[1,0]})"), ErrorCode::kMalformedRecord);
  EXPECT_EQ(code(R"({"p":[1,0],"x":-1})"), ErrorCode::kMalformedRecord);
  EXPECT_EQ(code(R"({"p":"x","x":0})"), ErrorCode::kMalformedRecord);
  EXPECT_EQ(code(R"({"p":[1,0],"x":2})"), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code(R"({"p":[0.5,0.5],"x":1})"), ErrorCode::kOk);
  EXPECT_EQ(code(R"({"p":[0.5,0.25,0.25],"x":1})"), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code(R"({"p":{"5":1},"x":0})"), ErrorCode::kDimensionMismatch);
  // Failed lines are counted but do not touch the monitor.
  auto out = nlohmann::json::parse(m.push(R"({"p":[0.5,0.5],"x":0})"));
  EXPECT_EQ(out["t"], 2);
  EXPECT_EQ(m.lines(), 11u);

  try {
    m.push(R"({"p":[0.5,0.6],"x":0})");
  } catch (const Error& e) {
    EXPECT_EQ(e.line(), 12u);
  }
}

TEST(Stream, DifferentialNeedsReference) {
  StreamMonitor m(StreamMonitor::Mode::kDifferential, RuleKind::kBrier, 0.05);
  EXPECT_EQ(code_of([&] { m.push(R"({"p":[1,0],"x":0})"); }), ErrorCode::kMalformedRecord);
  EXPECT_EQ(code_of([&] { m.push(R"({"p":[1,0],"pref":[0.5,0.25,0.25],"x":0})"); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Parallel, VisitsEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(50, 3,
                            [](std::size_t i) {
                              if (i == 17) throw Error(ErrorCode::kRuntime, "boom");
                            }),
               Error);
}

}  // namespace
}  // namespace alignmon
