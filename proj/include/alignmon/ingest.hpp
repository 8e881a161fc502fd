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

#ifndef ALIGNMON_INGEST_HPP_
#define ALIGNMON_INGEST_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "alignmon/markov.hpp"

namespace alignmon {

/// Row sums further than this from one are rejected; closer ones are
/// renormalized.
inline constexpr double kRowSumTolerance = 1e-6;

struct TraTriple {
  std::size_t src;
  std::size_t dst;
  double prob;
  std::size_t line;
};

/// Raw explicit-format transition list, checked for syntax, index range,
/// probability range and duplicate edges. The announced transition count and
/// row sums are checked by to_chain.
struct TraDocument {
  std::size_t n_states = 0;
  std::size_t n_transitions = 0;
  std::vector<TraTriple> triples;
  std::size_t header_line = 0;
  std::size_t last_line = 0;
};

struct TraOptions {
  Outcome initial_state = 0;
  /// Give states without outgoing transitions a self-loop instead of failing.
  bool complete_absorbing = false;
};

TraDocument parse_tra_document(std::string_view text);
MarkovChain to_chain(const TraDocument& doc, const TraOptions& options = {});
MarkovChain parse_tra(std::string_view text, const TraOptions& options = {});

/// Canonical explicit format (src asc, dst asc, shortest round-trip
/// decimals). Chains whose initial distribution is not a point mass on
/// state 0 are rejected unless `drop_init` is set.
std::string write_tra(const MarkovChain& chain, bool drop_init = false);

/// Line-oriented "alignmon-chain 1" format carrying the initial distribution
/// and optional state names. Grammar in docs/formats.md.
MarkovChain parse_structured(std::string_view text);
std::string write_structured(const MarkovChain& chain);

/// Reads a chain from disk, choosing the parser from the first significant
/// line. Throws IoError when the file cannot be read.
MarkovChain load_chain(const std::filesystem::path& path, const TraOptions& options = {});
void save_chain(const std::filesystem::path& path, const MarkovChain& chain, bool structured,
                bool drop_init = false);

/// Chains shipped with the library: die, brp-16-2, crowds-4-3, leader-3-5 and
/// nand-5-2. Throws InvalidArgument for unknown names.
std::vector<std::string> bundled_names();
MarkovChain bundled_chain(std::string_view name);
std::string_view bundled_source(std::string_view name);

}  // namespace alignmon

#endif  // ALIGNMON_INGEST_HPP_
