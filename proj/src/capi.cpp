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

#include "alignmon/alignmon.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>
#include <variant>

#include "alignmon/harness.hpp"
#include "alignmon/ingest.hpp"

#ifndef ALIGNMON_VERSION
#define ALIGNMON_VERSION "0.0.0"
#endif

struct alignmon_monitor {
  std::variant<alignmon::AverageMonitor, alignmon::DifferentialMonitor> impl;
};

struct alignmon_chain {
  alignmon::MarkovChain chain;
};

struct alignmon_config {
  alignmon::ExperimentConfig config;
};

struct alignmon_stream {
  alignmon::StreamMonitor impl;
};

namespace {

thread_local std::string g_error;
thread_local std::size_t g_error_line = 0;

alignmon_status fail(alignmon_status status, std::string message, std::size_t line = 0) {
  g_error = std::move(message);
  g_error_line = line;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
alignmon_status guarded(Fn&& fn) {
  try {
    fn();
    return ALIGNMON_OK;
  } catch (const alignmon::Error& e) {
    return fail(static_cast<alignmon_status>(e.code()), e.what(), e.line().value_or(0));
  } catch (const std::bad_alloc&) {
    return fail(ALIGNMON_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(ALIGNMON_RUNTIME, e.what());
  } catch (...) {
    return fail(ALIGNMON_RUNTIME, "unknown failure");
  }
}

alignmon_status null_argument(const char* what) {
  return fail(ALIGNMON_INVALID_ARGUMENT, std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

alignmon::RuleKind rule_of(alignmon_rule rule) {
  switch (rule) {
    case ALIGNMON_BRIER: return alignmon::RuleKind::kBrier;
    case ALIGNMON_SPHERICAL: return alignmon::RuleKind::kSpherical;
  }
  throw alignmon::Error(alignmon::ErrorCode::kInvalidArgument, "unknown scoring rule");
}

alignmon::Distribution dense_of(const double* p, std::size_t n) {
  return alignmon::Distribution::dense(std::vector<double>(p, p + n));
}

void fill(alignmon_verdict* out, const alignmon::Verdict& v, alignmon::DecisionValue d) {
  out->step = v.step;
  out->estimate = v.estimate;
  out->lo = v.lo;
  out->hi = v.hi;
  out->informative = v.informative ? 1 : 0;
  out->decision = static_cast<alignmon_decision>(d);
}

}  // namespace

extern "C" {

const char* alignmon_version(void) { return ALIGNMON_VERSION; }

const char* alignmon_status_name(alignmon_status status) {
  if (status == ALIGNMON_OK) return "Ok";
  if (status < ALIGNMON_OK || status > ALIGNMON_RUNTIME) return "Unknown";
  return alignmon::error_code_name(static_cast<alignmon::ErrorCode>(status)).data();
}

const char* alignmon_last_error(void) { return g_error.c_str(); }

size_t alignmon_last_error_line(void) { return g_error_line; }

void alignmon_string_free(char* s) { std::free(s); }

alignmon_status alignmon_monitor_average_new(alignmon_rule rule, double delta,
                                             alignmon_monitor** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new alignmon_monitor{alignmon::AverageMonitor(alignmon::ScoringRule::of(rule_of(rule)), delta)};
  });
}

alignmon_status alignmon_monitor_differential_new(alignmon_rule rule, double delta,
                                                  alignmon_monitor** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new alignmon_monitor{
        alignmon::DifferentialMonitor(alignmon::ScoringRule::of(rule_of(rule)), delta)};
  });
}

alignmon_status alignmon_monitor_next(alignmon_monitor* m, const double* p, size_t n,
                                      size_t observed, alignmon_verdict* out) {
  if (!m || !p || !out) return null_argument("monitor, prediction and out");
  auto* avg = std::get_if<alignmon::AverageMonitor>(&m->impl);
  if (!avg) return fail(ALIGNMON_INVALID_ARGUMENT, "differential monitors need a reference");
  return guarded([&] {
    fill(out, avg->next(dense_of(p, n), observed), alignmon::DecisionValue::kUndecided);
  });
}

alignmon_status alignmon_monitor_next_differential(alignmon_monitor* m, const double* p,
                                                   const double* pref, size_t n, size_t observed,
                                                   alignmon_verdict* out) {
  if (!m || !p || !pref || !out) return null_argument("monitor, predictions and out");
  auto* diff = std::get_if<alignmon::DifferentialMonitor>(&m->impl);
  if (!diff) return fail(ALIGNMON_INVALID_ARGUMENT, "not a differential monitor");
  return guarded([&] {
    const auto v = diff->next(dense_of(p, n), dense_of(pref, n), observed);
    fill(out, v, diff->decision().value);
  });
}

void alignmon_monitor_free(alignmon_monitor* m) { delete m; }

alignmon_status alignmon_chain_load(const char* path, alignmon_chain** out) {
  if (!path || !out) return null_argument("path and out");
  return guarded([&] { *out = new alignmon_chain{alignmon::load_chain(path)}; });
}

alignmon_status alignmon_chain_parse(const char* text, alignmon_chain** out) {
  if (!text || !out) return null_argument("text and out");
  return guarded([&] {
    const std::string_view s(text);
    const auto first = s.find_first_not_of(" \t\r\n");
    const bool structured = first != std::string_view::npos && s.substr(first, 14) == "alignmon-chain";
    *out = new alignmon_chain{structured ? alignmon::parse_structured(s) : alignmon::parse_tra(s)};
  });
}

alignmon_status alignmon_chain_bundled(const char* name, alignmon_chain** out) {
  if (!name || !out) return null_argument("name and out");
  return guarded([&] { *out = new alignmon_chain{alignmon::bundled_chain(name)}; });
}

size_t alignmon_chain_size(const alignmon_chain* c) { return c ? c->chain.size() : 0; }

alignmon_status alignmon_chain_prob(const alignmon_chain* c, size_t from, size_t to, double* out) {
  if (!c || !out) return null_argument("chain and out");
  if (from >= c->chain.size() || to >= c->chain.size())
    return fail(ALIGNMON_INDEX_OUT_OF_RANGE, "state index out of range");
  return guarded([&] { *out = c->chain.row(from).prob(to); });
}

alignmon_status alignmon_chain_corrupt(const alignmon_chain* c, const char* kind,
                                       const char* params_json, uint64_t seed,
                                       alignmon_chain** out) {
  if (!c || !kind || !out) return null_argument("chain, kind and out");
  return guarded([&] {
    const auto k = alignmon::parse_corruption(kind);
    if (!k)
      throw alignmon::Error(alignmon::ErrorCode::kInvalidArgument,
                            std::string("unknown corruption '") + kind + "'");
    alignmon::ExperimentConfig cfg;
    if (params_json)
      alignmon::merge_config_json(cfg, std::string("{\"corruption_params\": ") + params_json + "}");
    *out = new alignmon_chain{alignmon::corrupt(c->chain, *k, cfg.corruption_params, seed)};
  });
}

alignmon_status alignmon_chain_write(const alignmon_chain* c, int structured, char** out) {
  if (!c || !out) return null_argument("chain and out");
  return guarded([&] {
    *out = copy_string(structured ? alignmon::write_structured(c->chain)
                                  : alignmon::write_tra(c->chain));
  });
}

alignmon_status alignmon_chain_save(const alignmon_chain* c, const char* path, int structured) {
  if (!c || !path) return null_argument("chain and path");
  return guarded([&] { alignmon::save_chain(path, c->chain, structured != 0); });
}

void alignmon_chain_free(alignmon_chain* c) { delete c; }

alignmon_status alignmon_config_new(alignmon_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new alignmon_config{}; });
}

alignmon_status alignmon_config_merge_json(alignmon_config* c, const char* json) {
  if (!c || !json) return null_argument("config and json");
  return guarded([&] {
    auto next = c->config;  // all or nothing
    alignmon::merge_config_json(next, json);
    c->config = std::move(next);
  });
}

alignmon_status alignmon_config_to_json(const alignmon_config* c, char** out) {
  if (!c || !out) return null_argument("config and out");
  return guarded([&] { *out = copy_string(alignmon::config_to_json(c->config)); });
}

void alignmon_config_free(alignmon_config* c) { delete c; }

alignmon_status alignmon_run_experiment(const alignmon_config* c, alignmon_line_fn fn, void* user) {
  if (!c) return null_argument("config");
  if (!fn && c->config.output.empty()) return null_argument("line callback without an output file");
  return guarded([&] {
    const auto& cfg = c->config;
    if (cfg.output.empty()) {
      alignmon::run_experiment(cfg, [&](std::string_view line) { fn(line.data(), line.size(), user); });
      return;
    }
    // Run into memory first so a failed experiment leaves no partial file.
    std::string text;
    alignmon::run_experiment(cfg, [&](std::string_view line) {
      text.append(line);
      text.push_back('\n');
    });
    std::ofstream f(cfg.output, std::ios::binary);
    f << text;
    if (!f)
      throw alignmon::Error(alignmon::ErrorCode::kIoError, "cannot write '" + cfg.output + "'");
  });
}

alignmon_status alignmon_stream_new(int differential, alignmon_rule rule, double delta,
                                    alignmon_stream** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    using Mode = alignmon::StreamMonitor::Mode;
    *out = new alignmon_stream{
        alignmon::StreamMonitor(differential ? Mode::kDifferential : Mode::kAverage, rule_of(rule), delta)};
  });
}

alignmon_status alignmon_stream_push(alignmon_stream* s, const char* line, char** out) {
  if (!s || !line || !out) return null_argument("stream, line and out");
  return guarded([&] { *out = copy_string(s->impl.push(line)); });
}

void alignmon_stream_free(alignmon_stream* s) { delete s; }

}  // extern "C"
