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

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <json.hpp>

#include "alignmon/ingest.hpp"

namespace alignmon {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;  // output records keep documented field order

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorCode::kInvalidParams, msg); }

bool is_toy(std::string_view name) {
  return name == "fairness" || name == "safety" || name == "bernoulli";
}

bool is_bundled(std::string_view name) {
  const auto names = bundled_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

// FNV-1a, so that seeds do not depend on the standard library's hash.
std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string_view table_symbol(DecisionValue d) {
  switch (d) {
    case DecisionValue::kModelBetter: return "top";
    case DecisionValue::kReferenceBetter: return "bot";
    case DecisionValue::kUndecided: break;
  }
  return "?";
}

std::string_view weights_name(WeightsKind w) {
  switch (w) {
    case WeightsKind::kUnit: return "unit";
    case WeightsKind::kFairness: return "fairness";
    case WeightsKind::kSafety: return "safety";
    case WeightsKind::kAuto: break;
  }
  return "auto";
}

template <class T>
T get_as(const json& v, const std::string& key) {
  if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t> ||
                std::is_same_v<T, unsigned>) {
    if (!v.is_number_unsigned()) bad_config("config key '" + key + "' must be a non-negative integer");
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) bad_config("config key '" + key + "' must be a number");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) bad_config("config key '" + key + "' must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) bad_config("config key '" + key + "' must be a string");
  }
  return v.get<T>();
}

template <class T, class Parse>
T parse_named(const json& v, const std::string& key, Parse parse) {
  auto name = get_as<std::string>(v, key);
  auto parsed = parse(name);
  if (!parsed) bad_config("config key '" + key + "' has unknown value '" + name + "'");
  return *parsed;
}

std::optional<DegeneratePenalty> parse_penalty(std::string_view s) {
  if (s == "upper") return DegeneratePenalty::kUpperBound;
  if (s == "lower") return DegeneratePenalty::kLowerBound;
  return std::nullopt;
}

std::optional<WeightsKind> parse_weights(std::string_view s) {
  for (auto w : {WeightsKind::kAuto, WeightsKind::kUnit, WeightsKind::kFairness, WeightsKind::kSafety})
    if (weights_name(w) == s) return w;
  return std::nullopt;
}

std::optional<OutputFormat> parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "jsonl") return OutputFormat::kJsonl;
  return std::nullopt;
}

void merge_params(CorruptionParams& p, const json& j) {
  if (!j.is_object()) bad_config("config key 'corruption_params' must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "noise_scale") p.noise_scale = get_as<double>(v, key);
    else if (key == "noise_on_support") p.noise_on_support = get_as<bool>(v, key);
    else if (key == "sharpen_power") p.sharpen_power = get_as<double>(v, key);
    else if (key == "keep_probability") p.keep_probability = get_as<double>(v, key);
    else if (key == "drop_probability") p.drop_probability = get_as<double>(v, key);
    else if (key == "collapse_spread") p.collapse_spread = get_as<double>(v, key);
    else if (key == "bias_strength") p.bias_strength = get_as<double>(v, key);
    else if (key == "bias_target") p.bias_target = get_as<std::size_t>(v, key);
    else bad_config("unknown config key 'corruption_params." + key + "'");
  }
}

void merge_sweep(SweepConfig& s, const json& j) {
  if (!j.is_object()) bad_config("config key 'sweep' must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "parameter") s.parameter = get_as<std::string>(v, key);
    else if (key == "from") s.from = get_as<double>(v, key);
    else if (key == "to") s.to = get_as<double>(v, key);
    else if (key == "step") s.step = get_as<double>(v, key);
    else if (key == "env_mean") s.env_mean = get_as<double>(v, key);
    else if (key == "env_sd") s.env_sd = get_as<double>(v, key);
    else if (key == "model_mean") s.model_mean = get_as<double>(v, key);
    else if (key == "model_sd") s.model_sd = get_as<double>(v, key);
    else if (key == "bins") s.bins = get_as<std::size_t>(v, key);
    else bad_config("unknown config key 'sweep." + key + "'");
  }
}

void merge_bench(BenchConfig& b, const json& j) {
  if (!j.is_object()) bad_config("config key 'bench' must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "sizes") {
      if (!v.is_array()) bad_config("config key 'bench.sizes' must be an array");
      b.sizes.clear();
      for (const auto& e : v) b.sizes.push_back(get_as<std::size_t>(e, "bench.sizes"));
    } else if (key == "trace") {
      b.trace = get_as<std::size_t>(v, key);
    } else if (key == "block") {
      b.block = get_as<std::size_t>(v, key);
    } else if (key == "core_repeats") {
      b.core_repeats = get_as<std::size_t>(v, key);
    } else {
      bad_config("unknown config key 'bench." + key + "'");
    }
  }
}

void merge_table(TableConfig& t, const json& j) {
  if (!j.is_object()) bad_config("config key 'table' must be an object");
  auto list = [](const json& v, const std::string& key) {
    if (!v.is_array()) bad_config("config key 'table." + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(get_as<std::string>(e, "table." + key));
    return out;
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "benchmarks") {
      t.benchmarks = list(v, key);
    } else if (key == "corruptions") {
      t.corruptions.clear();
      for (const auto& name : list(v, key)) {
        auto k = parse_corruption(name);
        if (!k) bad_config("unknown corruption '" + name + "'");
        t.corruptions.push_back(*k);
      }
    } else if (key == "references") {
      t.references.clear();
      for (const auto& name : list(v, key)) {
        auto r = parse_reference(name);
        if (!r || *r == ReferenceKind::kNone) bad_config("unknown reference '" + name + "'");
        t.references.push_back(*r);
      }
    } else if (key == "records") {
      t.records = get_as<bool>(v, key);
    } else {
      bad_config("unknown config key 'table." + key + "'");
    }
  }
}

// Chain sources other than the toys: bundled names first, then paths.
MarkovChain load_source(std::string_view source) {
  if (is_bundled(source)) return bundled_chain(source);
  return load_chain(std::filesystem::path(std::string(source)));
}

void check_source(std::string_view source, std::string_view what) {
  if (is_bundled(source) || is_toy(source)) return;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(std::filesystem::path(std::string(source)), ec))
    throw Error(ErrorCode::kIoError, std::string(what) + " '" + std::string(source) +
                                         "' is neither a bundled chain nor a readable file");
}

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

Stats stats(const std::vector<double>& v) {
  if (v.empty()) return {};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::shared_ptr<const WeightFunctions> unit_weights() {
  return std::make_shared<ConstantWeights>(1.0, 1.0);
}

// Per-run monitoring; shared by run_monitoring and run_coverage.
class RunContext {
 public:
  RunContext(const ExperimentConfig& config, const Setup& setup)
      : config_(config),
        setup_(setup),
        gray_(ref_gray_box(setup.env)),
        black_(ref_black_box(setup.env.size())) {}

  std::vector<MonitorRecord> run(Scenario kind, std::size_t run, bool reference_lines) const {
    std::vector<MonitorRecord> out;
    out.reserve(config_.steps);
    const auto path = monitor_trajectory(setup_.env, config_.steps,
                                         run_seed(config_.seed, config_.environment, run));
    const ScoringRule rule = ScoringRule::of(config_.rule);
    const MarkovChain& env = setup_.env;
    const MarkovChain& model = setup_.model;

    if (kind == Scenario::kAverage) {
      AverageMonitor m(rule, config_.delta);
      AesOracle truth(env, model, rule);
      std::optional<AesOracle> r_env, r_gray, r_black;
      if (reference_lines) {
        r_env.emplace(env, env, rule);
        r_gray.emplace(env, gray_, rule);
        r_black.emplace(env, black_, rule);
      }
      for_each_step(path, [&](std::optional<Outcome> prev, Outcome x) {
        MonitorRecord rec;
        rec.run = run;
        rec.verdict = m.next(model.predict(prev), x);
        rec.truth = truth.push(prev);
        if (reference_lines) {
          rec.ref_environment = r_env->push(prev);
          rec.ref_gray = r_gray->push(prev);
          rec.ref_black = r_black->push(prev);
        }
        out.push_back(rec);
      });
    } else if (kind == Scenario::kDifferential) {
      if (!setup_.reference) bad_config("differential monitoring needs a reference");
      const MarkovChain& ref = *setup_.reference;
      DifferentialMonitor m(rule, config_.delta);
      AesOracle truth_model(env, model, rule);
      AesOracle truth_ref(env, ref, rule);
      std::optional<AesOracle> r_env, r_gray, r_black;
      if (reference_lines) {
        r_env.emplace(env, env, rule);
        r_gray.emplace(env, gray_, rule);
        r_black.emplace(env, black_, rule);
      }
      for_each_step(path, [&](std::optional<Outcome> prev, Outcome x) {
        MonitorRecord rec;
        rec.run = run;
        rec.verdict = m.next(model.predict(prev), ref.predict(prev), x);
        rec.truth = truth_model.push(prev) - truth_ref.push(prev);
        rec.decision = m.decision().value;
        if (reference_lines) {
          rec.ref_environment = r_env->push(prev);
          rec.ref_gray = r_gray->push(prev);
          rec.ref_black = r_black->push(prev);
        }
        out.push_back(rec);
      });
    } else {
      WeightedMonitor m(config_.rule, config_.delta, setup_.weights, config_.penalty);
      WeightedAesOracle truth(env, model, config_.rule, setup_.weights, config_.penalty);
      std::optional<WeightedAesOracle> r_env, r_gray, r_black;
      if (reference_lines) {
        r_env.emplace(env, env, config_.rule, setup_.weights, config_.penalty);
        r_gray.emplace(env, gray_, config_.rule, setup_.weights, config_.penalty);
        r_black.emplace(env, black_, config_.rule, setup_.weights, config_.penalty);
      }
      for_each_step(path, [&](std::optional<Outcome> prev, Outcome x) {
        MonitorRecord rec;
        rec.run = run;
        rec.verdict = m.next(model.predict(prev), x);
        rec.truth = truth.push(x);
        if (reference_lines) {
          rec.ref_environment = r_env->push(x);
          rec.ref_gray = r_gray->push(x);
          rec.ref_black = r_black->push(x);
        }
        out.push_back(rec);
      });
    }
    return out;
  }

 private:
  const ExperimentConfig& config_;
  const Setup& setup_;
  MarkovChain gray_;
  MarkovChain black_;
};

template <class T>
using Rows = std::vector<std::vector<T>>;

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::kAverage: return "average";
    case Scenario::kDifferential: return "differential";
    case Scenario::kWeighted: return "weighted";
    case Scenario::kCoverage: return "coverage";
    case Scenario::kSweep: return "sweep";
    case Scenario::kBench: return "bench";
    case Scenario::kTable: return "table";
  }
  return "average";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
  for (auto s : {Scenario::kAverage, Scenario::kDifferential, Scenario::kWeighted,
                 Scenario::kCoverage, Scenario::kSweep, Scenario::kBench, Scenario::kTable})
    if (scenario_name(s) == name) return s;
  return std::nullopt;
}

std::string_view reference_name(ReferenceKind r) noexcept {
  switch (r) {
    case ReferenceKind::kEnvironment: return "environment";
    case ReferenceKind::kExpert: return "expert";
    case ReferenceKind::kGray: return "gray";
    case ReferenceKind::kBlack: return "black";
    case ReferenceKind::kNone: break;
  }
  return "none";
}

std::optional<ReferenceKind> parse_reference(std::string_view name) noexcept {
  for (auto r : {ReferenceKind::kEnvironment, ReferenceKind::kExpert, ReferenceKind::kGray,
                 ReferenceKind::kBlack, ReferenceKind::kNone})
    if (reference_name(r) == name) return r;
  if (name == "env") return ReferenceKind::kEnvironment;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) bad_config("delta must lie in (0, 1)");
  if (steps < 1) bad_config("steps must be at least 1");
  if (runs < 1) bad_config("runs must be at least 1");
  if (!(bscc_rho >= 0.0 && bscc_rho < 1.0)) bad_config("bscc_rho must lie in [0, 1)");
  if (!(bernoulli_env >= 0.0 && bernoulli_env <= 1.0) ||
      !(bernoulli_model >= 0.0 && bernoulli_model <= 1.0))
    bad_config("Bernoulli parameters must lie in [0, 1]");
  if (safety_s6 && safety_s6->size() != 6) bad_config("safety_s6 needs six entries");
  corruption_params.validate();
  if (coverage_monitor != Scenario::kAverage && coverage_monitor != Scenario::kDifferential &&
      coverage_monitor != Scenario::kWeighted)
    bad_config("coverage_monitor must be average, differential or weighted");

  switch (scenario) {
    case Scenario::kSweep:
      if (sweep.parameter != "mean" && sweep.parameter != "sd")
        bad_config("sweep.parameter must be 'mean' or 'sd'");
      if (!(sweep.step > 0.0) || !(sweep.from <= sweep.to)) bad_config("sweep range is empty");
      if (sweep.bins < 1) bad_config("sweep.bins must be at least 1");
      if (!(sweep.env_sd > 0.0) || !(sweep.model_sd > 0.0) ||
          (sweep.parameter == "sd" && !(sweep.from > 0.0)))
        bad_config("standard deviations must be positive");
      return;
    case Scenario::kBench:
      if (bench.sizes.empty()) bad_config("bench.sizes is empty");
      for (auto n : bench.sizes)
        if (n < 2) bad_config("bench sizes must be at least 2");
      if (bench.block < 1 || bench.trace < bench.block) bad_config("bench.trace must cover one block");
      if (bench.core_repeats < 1) bad_config("bench.core_repeats must be at least 1");
      return;
    case Scenario::kTable:
      for (const auto& b : table.benchmarks) check_source(b, "benchmark");
      if (table.corruptions.empty() || table.references.empty())
        bad_config("table needs at least one corruption and one reference");
      return;
    default:
      break;
  }
  check_source(environment, "environment");
  if (model && *model != "environment") check_source(*model, "model");
  const bool needs_reference =
      scenario == Scenario::kDifferential ||
      (scenario == Scenario::kCoverage && coverage_monitor == Scenario::kDifferential);
  if (needs_reference && reference == ReferenceKind::kNone)
    bad_config("differential monitoring needs a reference");
}

void merge_config_json(ExperimentConfig& c, std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSyntaxError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_config("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "scenario") c.scenario = parse_named<Scenario>(v, key, parse_scenario);
    else if (key == "environment") c.environment = get_as<std::string>(v, key);
    else if (key == "model") c.model = v.is_null() ? std::nullopt : std::optional(get_as<std::string>(v, key));
    else if (key == "corruption") {
      auto name = get_as<std::string>(v, key);
      if (name == "none") {
        c.corruption.reset();
      } else {
        auto k = parse_corruption(name);
        if (!k) bad_config("unknown corruption '" + name + "'");
        c.corruption = k;
      }
    }
    else if (key == "corruption_params") merge_params(c.corruption_params, v);
    else if (key == "reference") c.reference = parse_named<ReferenceKind>(v, key, parse_reference);
    else if (key == "rule") c.rule = parse_named<RuleKind>(v, key, parse_rule);
    else if (key == "penalty") c.penalty = parse_named<DegeneratePenalty>(v, key, parse_penalty);
    else if (key == "weights") c.weights = parse_named<WeightsKind>(v, key, parse_weights);
    else if (key == "coverage_monitor") c.coverage_monitor = parse_named<Scenario>(v, key, parse_scenario);
    else if (key == "delta") c.delta = get_as<double>(v, key);
    else if (key == "steps") c.steps = get_as<std::size_t>(v, key);
    else if (key == "runs") c.runs = get_as<std::size_t>(v, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "bscc_rho") c.bscc_rho = get_as<double>(v, key);
    else if (key == "bernoulli_env") c.bernoulli_env = get_as<double>(v, key);
    else if (key == "bernoulli_model") c.bernoulli_model = get_as<double>(v, key);
    else if (key == "safety_s6") {
      if (v.is_null()) {
        c.safety_s6.reset();
      } else {
        if (!v.is_array()) bad_config("config key 'safety_s6' must be an array");
        std::vector<double> row;
        for (const auto& e : v) row.push_back(get_as<double>(e, key));
        c.safety_s6 = std::move(row);
      }
    }
    else if (key == "format") c.format = parse_named<OutputFormat>(v, key, parse_format);
    else if (key == "output") c.output = get_as<std::string>(v, key);
    else if (key == "threads") c.threads = get_as<unsigned>(v, key);
    else if (key == "sweep") merge_sweep(c.sweep, v);
    else if (key == "bench") merge_bench(c.bench, v);
    else if (key == "table") merge_table(c.table, v);
    else bad_config("unknown config key '" + key + "'");
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  const auto& p = c.corruption_params;
  json j = {
      {"scenario", scenario_name(c.scenario)},
      {"environment", c.environment},
      {"model", c.model ? json(*c.model) : json(nullptr)},
      {"corruption", c.corruption ? corruption_name(*c.corruption) : std::string_view("none")},
      {"corruption_params",
       {{"noise_scale", p.noise_scale},
        {"noise_on_support", p.noise_on_support},
        {"sharpen_power", p.sharpen_power},
        {"keep_probability", p.keep_probability},
        {"drop_probability", p.drop_probability},
        {"collapse_spread", p.collapse_spread},
        {"bias_strength", p.bias_strength},
        {"bias_target", p.bias_target}}},
      {"reference", reference_name(c.reference)},
      {"rule", rule_name(c.rule)},
      {"penalty", c.penalty == DegeneratePenalty::kUpperBound ? "upper" : "lower"},
      {"weights", weights_name(c.weights)},
      {"coverage_monitor", scenario_name(c.coverage_monitor)},
      {"delta", c.delta},
      {"steps", c.steps},
      {"runs", c.runs},
      {"seed", c.seed},
      {"bscc_rho", c.bscc_rho},
      {"bernoulli_env", c.bernoulli_env},
      {"bernoulli_model", c.bernoulli_model},
      {"safety_s6", c.safety_s6 ? json(*c.safety_s6) : json(nullptr)},
      {"format", c.format == OutputFormat::kCsv ? "csv" : "jsonl"},
      {"output", c.output},
      {"threads", c.threads},
      {"sweep",
       {{"parameter", c.sweep.parameter},
        {"from", c.sweep.from},
        {"to", c.sweep.to},
        {"step", c.sweep.step},
        {"env_mean", c.sweep.env_mean},
        {"env_sd", c.sweep.env_sd},
        {"model_mean", c.sweep.model_mean},
        {"model_sd", c.sweep.model_sd},
        {"bins", c.sweep.bins}}},
      {"bench",
       {{"sizes", c.bench.sizes},
        {"trace", c.bench.trace},
        {"block", c.bench.block},
        {"core_repeats", c.bench.core_repeats}}},
  };
  json corruptions = json::array(), references = json::array();
  for (auto k : c.table.corruptions) corruptions.push_back(corruption_name(k));
  for (auto r : c.table.references) references.push_back(reference_name(r));
  j["table"] = {{"benchmarks", c.table.benchmarks},
                {"corruptions", corruptions},
                {"references", references},
                {"records", c.table.records}};
  return j.dump(2);
}

std::uint64_t run_seed(std::uint64_t seed, std::string_view benchmark, std::size_t run) {
  return derive_seed(seed, {1, name_hash(benchmark), run});
}

std::uint64_t corruption_seed(std::uint64_t seed, std::string_view benchmark,
                              CorruptionKind kind) {
  return derive_seed(seed, {2, name_hash(benchmark), static_cast<std::uint64_t>(kind)});
}

MarkovChain load_environment(std::string_view source, double bscc_rho) {
  auto chain = load_source(source);
  return bscc_rho > 0.0 ? avoid_bscc(chain, bscc_rho) : chain;
}

MarkovChain reference_chain(const MarkovChain& env, ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::kEnvironment: return env;
    case ReferenceKind::kExpert: return ref_expert(env);
    case ReferenceKind::kGray: return ref_gray_box(env);
    case ReferenceKind::kBlack: return ref_black_box(env.size());
    case ReferenceKind::kNone: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "no reference chain requested");
}

Setup build_setup(const ExperimentConfig& c) {
  std::optional<ToyScenario> toy;
  std::optional<std::pair<MarkovChain, MarkovChain>> coin;
  if (c.environment == "fairness") {
    toy = fairness_chain();
  } else if (c.environment == "safety") {
    toy = c.safety_s6 ? safety_chain(Distribution::dense(*c.safety_s6)) : safety_chain();
  } else if (c.environment == "bernoulli") {
    coin = bernoulli_pair(c.bernoulli_env, c.bernoulli_model);
  }

  MarkovChain env = toy    ? toy->env
                    : coin ? coin->first
                           : load_environment(c.environment, c.bscc_rho);

  auto model = [&]() -> MarkovChain {
    if (c.model) {
      if (*c.model == "environment") return env;
      auto m = load_source(*c.model);
      if (m.size() != env.size())
        throw Error(ErrorCode::kDimensionMismatch, "model and environment differ in size");
      return m;
    }
    if (c.corruption)
      return corrupt(env, *c.corruption, c.corruption_params,
                     corruption_seed(c.seed, c.environment, *c.corruption));
    if (toy) return toy->model;
    if (coin) return coin->second;
    return env;
  }();

  std::shared_ptr<const WeightFunctions> weights;
  switch (c.weights) {
    case WeightsKind::kAuto:
      weights = toy ? std::shared_ptr<const WeightFunctions>(toy->weights) : unit_weights();
      break;
    case WeightsKind::kUnit:
      weights = unit_weights();
      break;
    case WeightsKind::kFairness:
      if (env.size() != 9) throw Error(ErrorCode::kDimensionMismatch, "fairness weights need 9 states");
      weights = fairness_chain().weights;
      break;
    case WeightsKind::kSafety:
      if (env.size() != 6) throw Error(ErrorCode::kDimensionMismatch, "safety weights need 6 states");
      weights = safety_chain().weights;
      break;
  }

  std::optional<MarkovChain> reference;
  if (c.reference != ReferenceKind::kNone) reference = reference_chain(env, c.reference);
  return {std::move(env), std::move(model), std::move(reference), std::move(weights)};
}

Distribution discretized_gaussian(double mean, double sd, std::size_t bins) {
  if (!(sd > 0.0) || bins == 0) throw Error(ErrorCode::kInvalidParams, "need sd > 0 and bins > 0");
  std::vector<double> w(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double z = (static_cast<double>(i) - mean) / sd;
    w[i] = std::exp(-0.5 * z * z);
  }
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; }))
    throw Error(ErrorCode::kInvalidParams, "Gaussian has no mass on the bins");
  return Distribution::normalized(std::move(w));
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& c) {
  c.validate();
  const auto& s = c.sweep;
  const auto env = discretized_gaussian(s.env_mean, s.env_sd, s.bins);
  const auto count = static_cast<std::size_t>(std::floor((s.to - s.from) / s.step + 1e-9)) + 1;
  std::vector<SweepRow> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double p = s.from + static_cast<double>(i) * s.step;
    const auto model = s.parameter == "mean" ? discretized_gaussian(p, s.model_sd, s.bins)
                                             : discretized_gaussian(s.model_mean, p, s.bins);
    rows.push_back({p, expected_score(ScoringRule::brier(), model, env),
                    expected_score(ScoringRule::spherical(), model, env)});
  }
  return rows;
}

std::vector<MonitorRecord> run_monitoring(const ExperimentConfig& c) {
  c.validate();
  if (c.scenario != Scenario::kAverage && c.scenario != Scenario::kDifferential &&
      c.scenario != Scenario::kWeighted)
    bad_config("monitoring needs the average, differential or weighted scenario");
  const Setup setup = build_setup(c);
  const RunContext ctx(c, setup);
  Rows<MonitorRecord> per_run(c.runs);
  parallel_for(c.runs, c.threads, [&](std::size_t r) { per_run[r] = ctx.run(c.scenario, r, true); });
  std::vector<MonitorRecord> out;
  out.reserve(c.runs * c.steps);
  for (auto& rows : per_run) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

DecisionTable run_decision_table(const ExperimentConfig& c) {
  c.validate();
  const auto benchmarks = c.table.benchmarks.empty() ? bundled_names() : c.table.benchmarks;
  struct Cell {
    std::string benchmark;
    CorruptionKind corruption;
    ReferenceKind reference;
    std::shared_ptr<const MarkovChain> env, model, ref;
  };
  std::vector<Cell> cells;
  for (const auto& b : benchmarks) {
    auto env = std::make_shared<const MarkovChain>(load_environment(b, c.bscc_rho));
    for (auto kind : c.table.corruptions) {
      auto model = std::make_shared<const MarkovChain>(
          corrupt(*env, kind, c.corruption_params, corruption_seed(c.seed, b, kind)));
      for (auto r : c.table.references)
        cells.push_back({b, kind, r, env, model,
                         std::make_shared<const MarkovChain>(reference_chain(*env, r))});
    }
  }

  std::vector<DecisionRecord> records(cells.size() * c.runs);
  const ScoringRule rule = ScoringRule::of(c.rule);
  parallel_for(records.size(), c.threads, [&](std::size_t i) {
    const Cell& cell = cells[i / c.runs];
    const std::size_t run = i % c.runs;
    DifferentialMonitor m(rule, c.delta);
    const auto path = monitor_trajectory(*cell.env, c.steps, run_seed(c.seed, cell.benchmark, run));
    for_each_step(path, [&](std::optional<Outcome> prev, Outcome x) {
      if (m.decision().value == DecisionValue::kUndecided)
        m.next(cell.model->predict(prev), cell.ref->predict(prev), x);
    });
    records[i] = {cell.benchmark, cell.corruption, cell.reference, run, m.decision().value,
                  m.decision().at_step};
  });

  DecisionTable table{records, {}};
  for (std::size_t k = 0; k < cells.size(); ++k) {
    DecisionCell out{cells[k].benchmark, cells[k].corruption, cells[k].reference,
                     DecisionValue::kUndecided, 0.0, 0.0};
    std::vector<double> at;
    for (std::size_t r = 0; r < c.runs; ++r) {
      const auto& rec = records[k * c.runs + r];
      at.push_back(rec.at_step ? static_cast<double>(*rec.at_step) : static_cast<double>(c.steps));
      switch (rec.decision) {
        case DecisionValue::kModelBetter: ++out.top; break;
        case DecisionValue::kReferenceBetter: ++out.bot; break;
        case DecisionValue::kUndecided: ++out.undecided; break;
      }
    }
    if (out.top > out.bot && out.top > out.undecided) out.decision = DecisionValue::kModelBetter;
    if (out.bot > out.top && out.bot > out.undecided) out.decision = DecisionValue::kReferenceBetter;
    const auto s = stats(at);
    out.mean_at_step = s.mean;
    out.sd_at_step = s.sd;
    table.cells.push_back(out);
  }
  return table;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // The exact endpoints at 0 and n; the formula only reaches them up to rounding.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

CoverageReport run_coverage(const ExperimentConfig& c) {
  c.validate();
  const Setup setup = build_setup(c);
  if (c.coverage_monitor == Scenario::kDifferential && !setup.reference)
    bad_config("differential coverage needs a reference");
  const RunContext ctx(c, setup);
  std::vector<char> violated(c.runs, 0);
  parallel_for(c.runs, c.threads, [&](std::size_t r) {
    for (const auto& rec : ctx.run(c.coverage_monitor, r, false)) {
      if (rec.verdict.informative && rec.truth && !rec.verdict.contains(*rec.truth)) {
        violated[r] = 1;
        break;
      }
    }
  });
  const auto v = static_cast<std::size_t>(std::count(violated.begin(), violated.end(), 1));
  const auto [lo, hi] = wilson_interval(v, c.runs);
  return {c.coverage_monitor, c.runs, v, static_cast<double>(v) / static_cast<double>(c.runs), lo, hi,
          c.delta};
}

std::vector<BenchRow> run_bench(const ExperimentConfig& c) {
  c.validate();
  using clock = std::chrono::steady_clock;
  const auto& b = c.bench;
  const std::size_t blocks = b.trace / b.block;
  const std::size_t len = blocks * b.block;
  const ScoringRule rule = ScoringRule::of(c.rule);
  const double sigma = rule.bounds().range();
  auto per_iter = [&](clock::time_point t0, clock::time_point t1) {
    return std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(b.block);
  };
  volatile double sink = 0.0;

  std::vector<BenchRow> rows;
  for (std::size_t n : b.sizes) {
    const double sd = std::max(1.0, static_cast<double>(n) / 10.0);
    const double mean = static_cast<double>(n - 1) / 2.0;
    const auto env = discretized_gaussian(mean, sd, n);
    const auto model = discretized_gaussian(mean + sd / 2.0, sd, n);
    const CdfSampler draw(env);
    Rng rng(c.seed, {3, n});
    std::vector<Outcome> trace(len);
    for (auto& x : trace) x = draw(rng);

    std::vector<double> scores(len), scoring_t, core_t, total_t;
    for (std::size_t k = 0; k < blocks; ++k) {
      const auto t0 = clock::now();
      for (std::size_t i = k * b.block; i < (k + 1) * b.block; ++i) scores[i] = rule(model, trace[i]);
      scoring_t.push_back(per_iter(t0, clock::now()));
    }

    {
      MonitorCore warm(sigma, c.delta);  // untimed
      for (double s : scores) {
        warm.update(s);
        sink = sink + warm.interval().first;
      }
    }
    std::vector<double> early, late;
    for (std::size_t rep = 0; rep < b.core_repeats; ++rep) {
      MonitorCore core(sigma, c.delta);
      for (std::size_t k = 0; k < blocks; ++k) {
        const auto t0 = clock::now();
        for (std::size_t i = k * b.block; i < (k + 1) * b.block; ++i) {
          core.update(scores[i]);
          sink = sink + core.interval().first;
        }
        const double t = per_iter(t0, clock::now());
        core_t.push_back(t);
        if (k == 0) early.push_back(t);
        if (k + 1 == blocks) late.push_back(t);
      }
    }

    AverageMonitor monitor(rule, c.delta);
    for (std::size_t k = 0; k < blocks; ++k) {
      const auto t0 = clock::now();
      for (std::size_t i = k * b.block; i < (k + 1) * b.block; ++i)
        sink = sink + monitor.next(model, trace[i]).hi;
      total_t.push_back(per_iter(t0, clock::now()));
    }

    const auto st = stats(total_t), ss = stats(scoring_t), sc = stats(core_t);
    rows.push_back(
        {n, st.mean, st.sd, ss.mean, ss.sd, sc.mean, sc.sd, median(early), median(late)});
  }
  return rows;
}

void run_experiment(const ExperimentConfig& c, const LineSink& sink) {
  const bool csv = c.format == OutputFormat::kCsv;
  switch (c.scenario) {
    case Scenario::kSweep: {
      const auto rows = run_sweep(c);
      if (csv) sink("parameter,expected_brier,expected_spherical");
      for (const auto& r : rows) {
        if (csv) {
          sink(num(r.parameter) + "," + num(r.expected_brier) + "," + num(r.expected_spherical));
        } else {
          sink(ordered{{"parameter", r.parameter},
                    {"expected_brier", r.expected_brier},
                    {"expected_spherical", r.expected_spherical}}
                   .dump());
        }
      }
      return;
    }
    case Scenario::kAverage:
    case Scenario::kDifferential:
    case Scenario::kWeighted: {
      const auto records = run_monitoring(c);
      const bool diff = c.scenario == Scenario::kDifferential;
      if (csv)
        sink(std::string("run,t,est,lo,hi,true_aes,ref_environment,ref_gray,ref_black") +
             (diff ? ",decision" : ""));
      for (const auto& r : records) {
        const auto& v = r.verdict;
        if (csv) {
          std::string line = std::to_string(r.run) + "," + std::to_string(v.step) + ",";
          if (v.informative) line += num(v.estimate) + "," + num(v.lo) + "," + num(v.hi);
          else line += ",,";
          line += "," + opt_num(r.truth) + "," + opt_num(r.ref_environment) + "," +
                  opt_num(r.ref_gray) + "," + opt_num(r.ref_black);
          if (diff) line += "," + std::string(decision_name(*r.decision));
          sink(line);
        } else {
          auto opt = [](const std::optional<double>& x) { return x ? ordered(*x) : ordered(nullptr); };
          ordered j = {{"run", r.run}, {"t", v.step}};
          j["est"] = v.informative ? ordered(v.estimate) : ordered(nullptr);
          j["lo"] = v.informative ? ordered(v.lo) : ordered(nullptr);
          j["hi"] = v.informative ? ordered(v.hi) : ordered(nullptr);
          j["true_aes"] = opt(r.truth);
          j["ref_environment"] = opt(r.ref_environment);
          j["ref_gray"] = opt(r.ref_gray);
          j["ref_black"] = opt(r.ref_black);
          if (diff) j["decision"] = decision_name(*r.decision);
          sink(j.dump());
        }
      }
      return;
    }
    case Scenario::kTable: {
      const auto table = run_decision_table(c);
      if (c.table.records) {
        if (csv) sink("benchmark,corruption,reference,run,decision,at_step");
        for (const auto& r : table.records) {
          if (csv) {
            sink(r.benchmark + "," + std::string(corruption_name(r.corruption)) + "," +
                 std::string(reference_name(r.reference)) + "," + std::to_string(r.run) + "," +
                 std::string(table_symbol(r.decision)) + "," +
                 (r.at_step ? std::to_string(*r.at_step) : std::string()));
          } else {
            sink(ordered{{"benchmark", r.benchmark},
                      {"corruption", corruption_name(r.corruption)},
                      {"reference", reference_name(r.reference)},
                      {"run", r.run},
                      {"decision", table_symbol(r.decision)},
                      {"at_step", r.at_step ? ordered(*r.at_step) : ordered(nullptr)}}
                     .dump());
          }
        }
        return;
      }
      if (csv) sink("benchmark,corruption,reference,decision,mean_at_step,sd_at_step,top,bot,undecided");
      for (const auto& r : table.cells) {
        if (csv) {
          sink(r.benchmark + "," + std::string(corruption_name(r.corruption)) + "," +
               std::string(reference_name(r.reference)) + "," +
               std::string(table_symbol(r.decision)) + "," + num(r.mean_at_step) + "," +
               num(r.sd_at_step) + "," + std::to_string(r.top) + "," + std::to_string(r.bot) + "," +
               std::to_string(r.undecided));
        } else {
          sink(ordered{{"benchmark", r.benchmark},
                    {"corruption", corruption_name(r.corruption)},
                    {"reference", reference_name(r.reference)},
                    {"decision", table_symbol(r.decision)},
                    {"mean_at_step", r.mean_at_step},
                    {"sd_at_step", r.sd_at_step},
                    {"top", r.top},
                    {"bot", r.bot},
                    {"undecided", r.undecided}}
                   .dump());
        }
      }
      return;
    }
    case Scenario::kCoverage: {
      const auto r = run_coverage(c);
      if (csv) {
        sink("monitor,runs,violations,rate,ci_lo,ci_hi,delta");
        sink(std::string(scenario_name(r.monitor)) + "," + std::to_string(r.runs) + "," +
             std::to_string(r.violations) + "," + num(r.rate) + "," + num(r.ci_lo) + "," +
             num(r.ci_hi) + "," + num(r.delta));
      } else {
        sink(ordered{{"monitor", scenario_name(r.monitor)},
                  {"runs", r.runs},
                  {"violations", r.violations},
                  {"rate", r.rate},
                  {"ci_lo", r.ci_lo},
                  {"ci_hi", r.ci_hi},
                  {"delta", r.delta}}
                 .dump());
      }
      return;
    }
    case Scenario::kBench: {
      const auto rows = run_bench(c);
      auto ns = [](double x) { return static_cast<long long>(std::llround(x)); };
      if (csv)
        sink("support,total_ns,total_sd_ns,scoring_ns,scoring_sd_ns,core_ns,core_sd_ns,"
             "early_core_ns,late_core_ns");
      for (const auto& r : rows) {
        if (csv) {
          std::string line = std::to_string(r.support);
          for (double x : {r.total_ns, r.total_sd_ns, r.scoring_ns, r.scoring_sd_ns, r.core_ns,
                           r.core_sd_ns, r.early_core_ns, r.late_core_ns})
            line += "," + std::to_string(ns(x));
          sink(line);
        } else {
          sink(ordered{{"support", r.support},
                    {"total_ns", ns(r.total_ns)},
                    {"total_sd_ns", ns(r.total_sd_ns)},
                    {"scoring_ns", ns(r.scoring_ns)},
                    {"scoring_sd_ns", ns(r.scoring_sd_ns)},
                    {"core_ns", ns(r.core_ns)},
                    {"core_sd_ns", ns(r.core_sd_ns)},
                    {"early_core_ns", ns(r.early_core_ns)},
                    {"late_core_ns", ns(r.late_core_ns)}}
                   .dump());
        }
      }
      return;
    }
  }
}

StreamMonitor::StreamMonitor(Mode mode, RuleKind rule, double delta) : mode_(mode) {
  if (mode == Mode::kAverage) average_.emplace(ScoringRule::of(rule), delta);
  else differential_.emplace(ScoringRule::of(rule), delta);
}

namespace {

struct ParsedDist {
  std::vector<SparseEntry> entries;
  std::optional<std::size_t> width;  // arrays fix the outcome space
  std::size_t max_index = 0;
};

ParsedDist parse_prediction(const json& v, std::string_view field, std::size_t line) {
  auto malformed = [&](const std::string& msg) -> Error {
    return Error(ErrorCode::kMalformedRecord, std::string(field) + ": " + msg, std::nullopt, line);
  };
  auto prob = [&](const json& e, std::size_t idx) {
    if (!e.is_number()) throw malformed("probabilities must be numbers");
    const double p = e.get<double>();
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw Error(ErrorCode::kInvalidProbability,
                  std::string(field) + "[" + std::to_string(idx) + "] = " + num(p) +
                      " is not a probability",
                  idx, line);
    return p;
  };
  ParsedDist out;
  if (v.is_array()) {
    if (v.empty()) throw malformed("empty prediction");
    out.width = v.size();
    out.max_index = v.size() - 1;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (double q = prob(v[i], i); q > 0.0) out.entries.emplace_back(i, q);
  } else if (v.is_object()) {
    if (v.empty()) throw malformed("empty prediction");
    for (const auto& [key, e] : v.items()) {
      std::size_t idx = 0;
      auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
      if (ec != std::errc() || end != key.data() + key.size())
        throw malformed("keys must be outcome indices");
      if (double q = prob(e, idx); q > 0.0) out.entries.emplace_back(idx, q);
      out.max_index = std::max(out.max_index, idx);
    }
    std::sort(out.entries.begin(), out.entries.end());
  } else {
    throw malformed("prediction must be an array or an object");
  }
  double sum = 0.0;
  for (const auto& [i, p] : out.entries) sum += p;
  if (std::abs(sum - 1.0) > kMassTolerance)
    throw Error(ErrorCode::kInvalidProbability,
                std::string(field) + " sums to " + num(sum) + ", not 1", std::nullopt, line);
  return out;
}

}  // namespace

std::string StreamMonitor::push(std::string_view text) {
  const std::size_t line = ++lines_;
  json rec;
  try {
    rec = json::parse(text.begin(), text.end());
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kMalformedRecord, "not a JSON value", std::nullopt, line);
  }
  if (!rec.is_object() || !rec.contains("p") || !rec.contains("x"))
    throw Error(ErrorCode::kMalformedRecord, "record needs fields \"p\" and \"x\"", std::nullopt, line);
  if (!rec["x"].is_number_unsigned())
    throw Error(ErrorCode::kMalformedRecord, "\"x\" must be a non-negative integer", std::nullopt, line);
  const auto x = rec["x"].get<std::size_t>();
  const bool diff = mode_ == Mode::kDifferential;
  if (diff && !rec.contains("pref"))
    throw Error(ErrorCode::kMalformedRecord, "differential records need \"pref\"", std::nullopt, line);

  auto p = parse_prediction(rec["p"], "p", line);
  std::optional<ParsedDist> pref;
  if (diff) pref = parse_prediction(rec["pref"], "pref", line);

  auto width = width_;
  auto fix = [&](const ParsedDist& d) {
    if (!d.width) return;
    if (width && *width != *d.width)
      throw Error(ErrorCode::kDimensionMismatch,
                  "prediction has " + std::to_string(*d.width) + " outcomes, expected " +
                      std::to_string(*width),
                  std::nullopt, line);
    width = d.width;
  };
  fix(p);
  if (pref) fix(*pref);
  std::size_t n = std::max(x, p.max_index) + 1;
  if (pref) n = std::max(n, pref->max_index + 1);
  if (width) {
    if (n > *width)
      throw Error(ErrorCode::kDimensionMismatch,
                  "index " + std::to_string(n - 1) + " outside " + std::to_string(*width) +
                      " outcomes",
                  n - 1, line);
    n = *width;
  }

  auto make = [&](ParsedDist& d) {
    try {
      return Distribution::sparse(n, std::move(d.entries));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidProbability, e.what(), e.index(), line);
    }
  };
  const auto y = make(p);
  const auto yref = diff ? std::optional(make(*pref)) : std::nullopt;
  width_ = width;

  ordered out;
  if (diff) {
    const auto v = differential_->next(y, *yref, x);
    out = {{"t", v.step}, {"est", v.estimate}, {"lo", v.lo}, {"hi", v.hi},
           {"decision", decision_name(differential_->decision().value)}};
  } else {
    const auto v = average_->next(y, x);
    out = {{"t", v.step}, {"est", v.estimate}, {"lo", v.lo}, {"hi", v.hi}};
  }
  return out.dump();
}

}  // namespace alignmon
