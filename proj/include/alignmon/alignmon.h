/* Copyright 2026 The alignmon Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libalignmon. Every fallible call returns an alignmon_status;
 * on failure the message (and line, for parse errors) is kept per thread until
 * the next failing call. Strings returned through char** are owned by the
 * caller and released with alignmon_string_free. */

#ifndef ALIGNMON_ALIGNMON_H_
#define ALIGNMON_ALIGNMON_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ALIGNMON_API __declspec(dllexport)
#else
#define ALIGNMON_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values are stable; new codes are only appended. */
typedef enum alignmon_status {
  ALIGNMON_OK = 0,
  ALIGNMON_NEGATIVE_MASS = 1,
  ALIGNMON_MASS_SUM_MISMATCH = 2,
  ALIGNMON_INDEX_OUT_OF_RANGE = 3,
  ALIGNMON_EMPTY_SUPPORT = 4,
  ALIGNMON_ZERO_NORM = 5,
  ALIGNMON_DOMAIN_ERROR = 6,
  ALIGNMON_NO_OBSERVATIONS = 7,
  ALIGNMON_DEGENERATE_ROW = 8,
  ALIGNMON_INVALID_PARAMS = 9,
  ALIGNMON_SYNTAX_ERROR = 10,
  ALIGNMON_NON_STOCHASTIC_ROW = 11,
  ALIGNMON_MISSING_ROW = 12,
  ALIGNMON_MALFORMED_RECORD = 13,
  ALIGNMON_DIMENSION_MISMATCH = 14,
  ALIGNMON_INVALID_PROBABILITY = 15,
  ALIGNMON_IO_ERROR = 16,
  ALIGNMON_INVALID_ARGUMENT = 17,
  ALIGNMON_RUNTIME = 18
} alignmon_status;

typedef enum alignmon_rule { ALIGNMON_BRIER = 0, ALIGNMON_SPHERICAL = 1 } alignmon_rule;

typedef enum alignmon_decision {
  ALIGNMON_UNDECIDED = 0,
  ALIGNMON_MODEL_BETTER = 1,
  ALIGNMON_REFERENCE_BETTER = 2
} alignmon_decision;

typedef struct alignmon_verdict {
  size_t step;
  double estimate;
  double lo;
  double hi;
  int informative;            /* 0 while no weighted time has accrued */
  alignmon_decision decision; /* differential monitors only */
} alignmon_verdict;

typedef struct alignmon_monitor alignmon_monitor;
typedef struct alignmon_chain alignmon_chain;
typedef struct alignmon_config alignmon_config;
typedef struct alignmon_stream alignmon_stream;

ALIGNMON_API const char* alignmon_version(void);
ALIGNMON_API const char* alignmon_status_name(alignmon_status status);
ALIGNMON_API const char* alignmon_last_error(void);
/* 1-based input line of the last failure, 0 when not applicable. */
ALIGNMON_API size_t alignmon_last_error_line(void);
ALIGNMON_API void alignmon_string_free(char* s);

/* Monitors. Predictions are dense arrays of n probabilities. */
ALIGNMON_API alignmon_status alignmon_monitor_average_new(alignmon_rule rule, double delta,
                                                          alignmon_monitor** out);
ALIGNMON_API alignmon_status alignmon_monitor_differential_new(alignmon_rule rule, double delta,
                                                               alignmon_monitor** out);
ALIGNMON_API alignmon_status alignmon_monitor_next(alignmon_monitor* m, const double* p, size_t n,
                                                   size_t observed, alignmon_verdict* out);
ALIGNMON_API alignmon_status alignmon_monitor_next_differential(alignmon_monitor* m,
                                                                const double* p,
                                                                const double* pref, size_t n,
                                                                size_t observed,
                                                                alignmon_verdict* out);
ALIGNMON_API void alignmon_monitor_free(alignmon_monitor* m);

/* Markov chains. */
ALIGNMON_API alignmon_status alignmon_chain_load(const char* path, alignmon_chain** out);
ALIGNMON_API alignmon_status alignmon_chain_parse(const char* text, alignmon_chain** out);
ALIGNMON_API alignmon_status alignmon_chain_bundled(const char* name, alignmon_chain** out);
ALIGNMON_API size_t alignmon_chain_size(const alignmon_chain* c);
ALIGNMON_API alignmon_status alignmon_chain_prob(const alignmon_chain* c, size_t from, size_t to,
                                                 double* out);
/* kind is a corruption name; params_json is an object of corruption
 * parameters or NULL for the defaults. */
ALIGNMON_API alignmon_status alignmon_chain_corrupt(const alignmon_chain* c, const char* kind,
                                                    const char* params_json, uint64_t seed,
                                                    alignmon_chain** out);
ALIGNMON_API alignmon_status alignmon_chain_write(const alignmon_chain* c, int structured,
                                                  char** out);
ALIGNMON_API alignmon_status alignmon_chain_save(const alignmon_chain* c, const char* path,
                                                 int structured);
ALIGNMON_API void alignmon_chain_free(alignmon_chain* c);

/* Experiment configuration: defaults overlaid by JSON objects, later merges
 * winning. */
ALIGNMON_API alignmon_status alignmon_config_new(alignmon_config** out);
ALIGNMON_API alignmon_status alignmon_config_merge_json(alignmon_config* c, const char* json);
ALIGNMON_API alignmon_status alignmon_config_to_json(const alignmon_config* c, char** out);
ALIGNMON_API void alignmon_config_free(alignmon_config* c);

typedef void (*alignmon_line_fn)(const char* line, size_t len, void* user);

/* Runs the configured experiment. Lines go to the configured output file
 * when one is set, otherwise to fn. */
ALIGNMON_API alignmon_status alignmon_run_experiment(const alignmon_config* c, alignmon_line_fn fn,
                                                     void* user);

/* JSON-lines stream monitor; see docs/formats.md for the record layout. */
ALIGNMON_API alignmon_status alignmon_stream_new(int differential, alignmon_rule rule,
                                                 double delta, alignmon_stream** out);
ALIGNMON_API alignmon_status alignmon_stream_push(alignmon_stream* s, const char* line,
                                                  char** out);
ALIGNMON_API void alignmon_stream_free(alignmon_stream* s);

#ifdef __cplusplus
}
#endif

#endif /* ALIGNMON_ALIGNMON_H_ */
