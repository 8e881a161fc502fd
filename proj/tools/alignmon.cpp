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

// Command-line front end. Everything goes through the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "alignmon/alignmon.h"

namespace {

using json = nlohmann::json;

enum Exit { kSuccess = 0, kUsage = 1, kData = 2, kRuntime = 3 };

int exit_code(alignmon_status s) {
  switch (s) {
    case ALIGNMON_OK: return kSuccess;
    case ALIGNMON_INVALID_PARAMS:
    case ALIGNMON_INVALID_ARGUMENT: return kUsage;
    case ALIGNMON_RUNTIME:
    case ALIGNMON_NO_OBSERVATIONS: return kRuntime;
    default: return kData;
  }
}

// Thrown to unwind with a status already reported.
struct Failure {
  int code;
};

void check(alignmon_status s) {
  if (s == ALIGNMON_OK) return;
  std::fprintf(stderr, "alignmon: %s\n", alignmon_last_error());
  throw Failure{exit_code(s)};
}

struct Config {
  alignmon_config* handle = nullptr;
  Config() { check(alignmon_config_new(&handle)); }
  ~Config() { alignmon_config_free(handle); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;

  void merge(const json& patch) {
    if (!patch.empty()) check(alignmon_config_merge_json(handle, patch.dump().c_str()));
  }
  json current() const {
    char* text = nullptr;
    check(alignmon_config_to_json(handle, &text));
    json j = json::parse(text);
    alignmon_string_free(text);
    return j;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::fprintf(stderr, "alignmon: cannot read '%s'\n", path.c_str());
    throw Failure{kData};
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_line(const char* line, size_t len, void*) {
  std::fwrite(line, 1, len, stdout);
  std::fputc('\n', stdout);
}

// Flags shared by every subcommand. Unset flags leave the config alone.
struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> runs;
  std::optional<std::string> rule;
  std::optional<std::string> format;
  std::optional<std::string> output;
  std::optional<unsigned> threads;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_file, "JSON config file; flags override it")
        ->check(CLI::ExistingFile);
    app.add_option("--set", sets, "extra JSON object merged after all flags");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--delta", delta, "error probability in (0, 1)");
    app.add_option("--steps", steps, "monitoring steps per run");
    app.add_option("--runs", runs, "independent runs");
    app.add_option("--rule", rule, "scoring rule")->check(CLI::IsMember({"brier", "spherical"}));
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("-o,--output", output, "write results to this file");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
  }

  json patch() const {
    json j = json::object();
    if (seed) j["seed"] = *seed;
    if (delta) j["delta"] = *delta;
    if (steps) j["steps"] = *steps;
    if (runs) j["runs"] = *runs;
    if (rule) j["rule"] = *rule;
    if (format) j["format"] = *format;
    if (output) j["output"] = *output;
    if (threads) j["threads"] = *threads;
    return j;
  }

  // Subcommand defaults, the config file, the subcommand's scenario, flags,
  // then --set objects.
  void build(Config& cfg, const json& defaults, const json& scenario, const json& flags) const {
    cfg.merge(defaults);
    if (!config_file.empty()) {
      const auto text = read_file(config_file);
      check(alignmon_config_merge_json(cfg.handle, text.c_str()));
    }
    cfg.merge(scenario);
    cfg.merge(patch());
    cfg.merge(flags);
    for (const auto& s : sets) check(alignmon_config_merge_json(cfg.handle, s.c_str()));
  }
};

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

int run_experiment(const Config& cfg) {
  check(alignmon_run_experiment(cfg.handle, print_line, nullptr));
  return kSuccess;
}

int run_stream(const Config& cfg) {
  const json c = cfg.current();
  const bool differential = c["scenario"] == "differential";
  const alignmon_rule rule = c["rule"] == "spherical" ? ALIGNMON_SPHERICAL : ALIGNMON_BRIER;
  alignmon_stream* stream = nullptr;
  check(alignmon_stream_new(differential ? 1 : 0, rule, c["delta"].get<double>(), &stream));

  bool failed = false;
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    char* out = nullptr;
    const auto s = alignmon_stream_push(stream, line.c_str(), &out);
    if (s == ALIGNMON_OK) {
      std::fputs(out, stdout);
      std::fputc('\n', stdout);
      alignmon_string_free(out);
    } else {
      failed = true;
      std::fprintf(stderr, "%s\n",
                   json{{"line", lineno}, {"error", alignmon_status_name(s)},
                        {"message", alignmon_last_error()}}
                       .dump()
                       .c_str());
    }
    std::fflush(stdout);
  }
  alignmon_stream_free(stream);
  return failed ? kData : kSuccess;
}

int run_corrupt(const std::string& in, const std::optional<std::string>& out, const std::string& kind,
                const std::optional<std::string>& params, std::uint64_t seed, bool structured) {
  alignmon_chain* chain = nullptr;
  alignmon_chain* bad = nullptr;
  check(alignmon_chain_load(in.c_str(), &chain));
  const auto s = alignmon_chain_corrupt(chain, kind.c_str(), params ? params->c_str() : nullptr, seed, &bad);
  alignmon_chain_free(chain);
  check(s);
  alignmon_status w;
  if (out) {
    w = alignmon_chain_save(bad, out->c_str(), structured ? 1 : 0);
  } else {
    char* text = nullptr;
    w = alignmon_chain_write(bad, structured ? 1 : 0, &text);
    if (w == ALIGNMON_OK) {
      std::fputs(text, stdout);
      alignmon_string_free(text);
    }
  }
  alignmon_chain_free(bad);
  check(w);
  return kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming alignment monitors for probabilistic models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(alignmon_version()));
  Common common;

  // sweep
  auto* sweep = app.add_subcommand("sweep", "expected Brier and spherical scores of shifted Gaussians");
  std::optional<std::string> sw_param;
  std::optional<double> sw_from, sw_to, sw_step, sw_env_mean, sw_env_sd, sw_model_mean, sw_model_sd;
  std::optional<std::size_t> sw_bins;
  sweep->add_option("--parameter", sw_param, "swept model parameter")->check(CLI::IsMember({"mean", "sd"}));
  sweep->add_option("--from", sw_from);
  sweep->add_option("--to", sw_to);
  sweep->add_option("--step", sw_step);
  sweep->add_option("--env-mean", sw_env_mean);
  sweep->add_option("--env-sd", sw_env_sd);
  sweep->add_option("--model-mean", sw_model_mean);
  sweep->add_option("--model-sd", sw_model_sd);
  sweep->add_option("--bins", sw_bins);

  // monitor
  auto* monitor = app.add_subcommand("monitor", "run a monitor against a simulated environment");
  std::optional<std::string> m_env, m_model, m_corruption, m_reference, m_mode, m_weights, m_penalty;
  std::optional<double> m_rho;
  monitor->add_option("-e,--env", m_env, "bundled chain, toy (fairness, safety, bernoulli) or chain file");
  monitor->add_option("--model", m_model, "model chain; default: the corrupted environment");
  monitor->add_option("--corruption", m_corruption, "corruption applied to the environment");
  monitor->add_option("--reference", m_reference, "environment, expert, gray, black or none");
  monitor->add_option("--mode", m_mode)->check(CLI::IsMember({"average", "differential", "weighted"}));
  monitor->add_option("--weights", m_weights)->check(CLI::IsMember({"auto", "unit", "fairness", "safety"}));
  monitor->add_option("--penalty", m_penalty)->check(CLI::IsMember({"upper", "lower"}));
  monitor->add_option("--rho", m_rho, "return mass added to avoid bottom components");

  // stream
  auto* stream = app.add_subcommand("stream", "monitor JSON-lines predictions from stdin");
  std::optional<std::string> s_mode;
  stream->add_option("--mode", s_mode)->check(CLI::IsMember({"average", "differential"}));

  // table
  auto* table = app.add_subcommand("table", "decision times over benchmarks, corruptions and references");
  std::vector<std::string> t_bench, t_corr, t_ref;
  bool t_records = false;
  std::optional<double> t_rho;
  table->add_option("--benchmarks", t_bench);
  table->add_option("--corruptions", t_corr);
  table->add_option("--references", t_ref);
  table->add_flag("--records", t_records, "one line per run instead of per cell");
  table->add_option("--rho", t_rho);

  // coverage
  auto* coverage = app.add_subcommand("coverage", "violation rate of the true score over many runs");
  std::optional<std::string> c_env, c_model, c_corruption, c_reference, c_monitor, c_weights;
  std::optional<double> c_p_env, c_p_model;
  coverage->add_option("-e,--env", c_env);
  coverage->add_option("--model", c_model);
  coverage->add_option("--corruption", c_corruption);
  coverage->add_option("--reference", c_reference);
  coverage->add_option("--monitor", c_monitor)->check(CLI::IsMember({"average", "differential", "weighted"}));
  coverage->add_option("--weights", c_weights)->check(CLI::IsMember({"auto", "unit", "fairness", "safety"}));
  coverage->add_option("--p-env", c_p_env, "Bernoulli environment parameter");
  coverage->add_option("--p-model", c_p_model, "Bernoulli model parameter");

  // bench
  auto* bench = app.add_subcommand("bench", "per-iteration timings over support sizes");
  std::vector<std::size_t> b_sizes;
  std::optional<std::size_t> b_trace, b_block, b_repeats;
  bench->add_option("--sizes", b_sizes);
  bench->add_option("--trace", b_trace);
  bench->add_option("--block", b_block);
  bench->add_option("--repeats", b_repeats);

  // corrupt
  auto* corrupt = app.add_subcommand("corrupt", "write a corrupted copy of a chain file");
  std::string k_in, k_kind;
  std::optional<std::string> k_out, k_params;
  bool k_structured = false;
  corrupt->add_option("input", k_in, "chain file")->required();
  corrupt->add_option("--kind", k_kind, "corruption name")->required();
  corrupt->add_option("--out", k_out, "output file; default stdout");
  corrupt->add_option("--params", k_params, "JSON object of corruption parameters");
  corrupt->add_flag("--structured", k_structured, "write the structured format");

  for (auto* sub : {sweep, monitor, stream, table, coverage, bench, corrupt}) common.attach(*sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kUsage;
  }

  try {
    Config cfg;
    json flags = json::object();
    if (*sweep) {
      json sw = json::object();
      put(sw, "parameter", sw_param);
      put(sw, "from", sw_from);
      put(sw, "to", sw_to);
      put(sw, "step", sw_step);
      put(sw, "env_mean", sw_env_mean);
      put(sw, "env_sd", sw_env_sd);
      put(sw, "model_mean", sw_model_mean);
      put(sw, "model_sd", sw_model_sd);
      put(sw, "bins", sw_bins);
      if (!sw.empty()) flags["sweep"] = sw;
      common.build(cfg, json::object(), {{"scenario", "sweep"}}, flags);
      return run_experiment(cfg);
    }
    if (*monitor) {
      put(flags, "environment", m_env);
      put(flags, "model", m_model);
      put(flags, "corruption", m_corruption);
      put(flags, "reference", m_reference);
      put(flags, "scenario", m_mode);
      put(flags, "weights", m_weights);
      put(flags, "penalty", m_penalty);
      put(flags, "bscc_rho", m_rho);
      common.build(cfg, json::object(), json::object(), flags);
      const auto scenario = cfg.current()["scenario"];
      if (scenario != "average" && scenario != "differential" && scenario != "weighted")
        cfg.merge({{"scenario", "average"}});
      return run_experiment(cfg);
    }
    if (*stream) {
      put(flags, "scenario", s_mode);
      common.build(cfg, json::object(), json::object(), flags);
      return run_stream(cfg);
    }
    if (*table) {
      json t = json::object();
      if (!t_bench.empty()) t["benchmarks"] = t_bench;
      if (!t_corr.empty()) t["corruptions"] = t_corr;
      if (!t_ref.empty()) t["references"] = t_ref;
      if (t_records) t["records"] = true;
      if (!t.empty()) flags["table"] = t;
      put(flags, "bscc_rho", t_rho);
      common.build(cfg, {{"runs", 5}}, {{"scenario", "table"}}, flags);
      return run_experiment(cfg);
    }
    if (*coverage) {
      put(flags, "environment", c_env);
      put(flags, "model", c_model);
      put(flags, "corruption", c_corruption);
      put(flags, "reference", c_reference);
      put(flags, "coverage_monitor", c_monitor);
      put(flags, "weights", c_weights);
      put(flags, "bernoulli_env", c_p_env);
      put(flags, "bernoulli_model", c_p_model);
      common.build(cfg, json::object(), {{"scenario", "coverage"}}, flags);
      return run_experiment(cfg);
    }
    if (*bench) {
      json b = json::object();
      if (!b_sizes.empty()) b["sizes"] = b_sizes;
      put(b, "trace", b_trace);
      put(b, "block", b_block);
      put(b, "core_repeats", b_repeats);
      if (!b.empty()) flags["bench"] = b;
      common.build(cfg, json::object(), {{"scenario", "bench"}}, flags);
      return run_experiment(cfg);
    }
    if (*corrupt) {
      common.build(cfg, json::object(), json::object(), flags);
      const auto seed = cfg.current()["seed"].get<std::uint64_t>();
      return run_corrupt(k_in, k_out, k_kind, k_params, seed, k_structured);
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "alignmon: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
