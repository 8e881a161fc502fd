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

#include "alignmon/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace alignmon {

namespace {

constexpr std::string_view kStructuredMagic = "alignmon-chain";
constexpr int kStructuredVersion = 1;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Iterates over significant lines: blank lines and '#' comments are skipped.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::vector<std::string_view>& tokens) {
    while (pos_ <= text_.size() && pos_ != std::string_view::npos) {
      auto end = text_.find('\n', pos_);
      auto line = text_.substr(pos_, end == std::string_view::npos ? end : end - pos_);
      pos_ = end == std::string_view::npos ? std::string_view::npos : end + 1;
      ++line_;
      tokens = split(line);
      if (tokens.empty() || tokens.front().front() == '#') continue;
      last_ = line_;
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_; }
  /// Last significant line read; falls back to 1 for empty input.
  std::size_t last() const noexcept { return last_ ? last_ : 1; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::size_t last_ = 0;
};

[[noreturn]] void syntax(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::kSyntaxError, msg, std::nullopt, line);
}

std::size_t parse_index(std::string_view tok, std::size_t line, const char* what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    syntax(line, std::string("expected ") + what + ", got '" + std::string(tok) + "'");
  return v;
}

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v))
    syntax(line, "expected a probability, got '" + std::string(tok) + "'");
  return v;
}

void check_index(std::size_t i, std::size_t n, std::size_t line) {
  if (i >= n)
    throw Error(ErrorCode::kIndexOutOfRange,
                "state " + std::to_string(i) + " outside 0.." + std::to_string(n - 1), i, line);
}

void check_prob(double p, std::size_t line) {
  if (!(p > 0.0 && p <= 1.0))
    throw Error(ErrorCode::kInvalidProbability,
                "transition probability " + std::to_string(p) + " outside (0, 1]", std::nullopt,
                line);
}

std::string fmt_real(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// Checks a row's sum and renormalizes it.
Distribution finish_row(std::size_t n, std::size_t state, std::vector<SparseEntry> entries,
                        std::size_t line) {
  std::sort(entries.begin(), entries.end());
  double total = 0.0;
  for (const auto& e : entries) total += e.second;
  if (std::abs(total - 1.0) > kRowSumTolerance) {
    std::ostringstream msg;
    msg << "row " << state << " sums to " << total;
    throw Error(ErrorCode::kNonStochasticRow, msg.str(), state, line);
  }
  return Distribution::normalized(n, std::move(entries));
}

}  // namespace

TraDocument parse_tra_document(std::string_view text) {
  LineReader in(text);
  std::vector<std::string_view> tok;
  TraDocument doc;
  if (!in.next(tok)) syntax(in.last(), "missing header line");
  doc.header_line = in.line();
  if (tok.size() != 2) syntax(in.line(), "header must be 'n_states n_transitions'");
  doc.n_states = parse_index(tok[0], in.line(), "state count");
  doc.n_transitions = parse_index(tok[1], in.line(), "transition count");
  if (doc.n_states == 0) syntax(in.line(), "chain must have at least one state");

  std::set<std::pair<std::size_t, std::size_t>> seen;
  doc.triples.reserve(doc.n_transitions);
  while (in.next(tok)) {
    const auto line = in.line();
    if (tok.size() != 3) syntax(line, "expected 'src dst prob'");
    TraTriple t{parse_index(tok[0], line, "source state"), parse_index(tok[1], line, "target state"),
                parse_real(tok[2], line), line};
    check_index(t.src, doc.n_states, line);
    check_index(t.dst, doc.n_states, line);
    check_prob(t.prob, line);
    if (!seen.emplace(t.src, t.dst).second)
      syntax(line, "duplicate transition " + std::to_string(t.src) + " -> " + std::to_string(t.dst));
    doc.triples.push_back(t);
  }
  doc.last_line = in.last();
  return doc;
}

MarkovChain to_chain(const TraDocument& doc, const TraOptions& options) {
  const std::size_t n = doc.n_states;
  check_index(options.initial_state, n, doc.header_line);
  std::vector<std::vector<SparseEntry>> entries(n);
  std::vector<std::size_t> first_line(n, 0);
  for (const auto& t : doc.triples) {
    entries[t.src].emplace_back(t.dst, t.prob);
    if (!first_line[t.src]) first_line[t.src] = t.line;
  }
  std::vector<Distribution> rows;
  rows.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (entries[s].empty()) {
      if (!options.complete_absorbing)
        throw Error(ErrorCode::kMissingRow, "state " + std::to_string(s) + " has no transitions", s,
                    doc.header_line);
      rows.push_back(point_mass(n, s));
      continue;
    }
    rows.push_back(finish_row(n, s, std::move(entries[s]), first_line[s]));
  }
  // Row errors are more informative than a count mismatch, so they win.
  if (doc.triples.size() != doc.n_transitions)
    syntax(doc.last_line, "header announces " + std::to_string(doc.n_transitions) +
                              " transitions, found " + std::to_string(doc.triples.size()));
  return MarkovChain(std::move(rows), point_mass(n, options.initial_state));
}

MarkovChain parse_tra(std::string_view text, const TraOptions& options) {
  return to_chain(parse_tra_document(text), options);
}

std::string write_tra(const MarkovChain& chain, bool drop_init) {
  if (!drop_init && !(chain.init() == point_mass(chain.size(), 0)))
    throw Error(ErrorCode::kInvalidArgument,
                "explicit format cannot carry an initial distribution other than state 0");
  std::size_t m = 0;
  for (const auto& row : chain.rows()) m += row.support_size();
  std::string out = std::to_string(chain.size()) + " " + std::to_string(m) + "\n";
  for (std::size_t s = 0; s < chain.size(); ++s) {
    chain.row(s).for_each([&](Outcome d, double p) {
      out += std::to_string(s);
      out += ' ';
      out += std::to_string(d);
      out += ' ';
      out += fmt_real(p);
      out += '\n';
    });
  }
  return out;
}

MarkovChain parse_structured(std::string_view text) {
  LineReader in(text);
  std::vector<std::string_view> tok;
  if (!in.next(tok)) syntax(1, "empty document");
  if (tok.size() != 2 || tok[0] != kStructuredMagic)
    syntax(in.line(), "expected 'alignmon-chain <version>'");
  if (parse_index(tok[1], in.line(), "format version") != kStructuredVersion)
    syntax(in.line(), "unsupported format version " + std::string(tok[1]));

  if (!in.next(tok) || tok.size() != 2 || tok[0] != "states")
    syntax(in.last(), "expected 'states <count>'");
  const std::size_t n = parse_index(tok[1], in.line(), "state count");
  if (n == 0) syntax(in.line(), "chain must have at least one state");
  const std::size_t states_line = in.line();

  std::vector<std::string> names;
  std::optional<Distribution> init;
  std::vector<std::optional<Distribution>> rows(n);

  auto read_entries = [&](std::size_t from, std::size_t line) {
    std::vector<SparseEntry> e;
    std::set<std::size_t> seen;
    for (std::size_t k = from; k < tok.size(); ++k) {
      const auto colon = tok[k].find(':');
      if (colon == std::string_view::npos) syntax(line, "expected 'index:prob'");
      const auto j = parse_index(tok[k].substr(0, colon), line, "state index");
      const auto p = parse_real(tok[k].substr(colon + 1), line);
      check_index(j, n, line);
      check_prob(p, line);
      if (!seen.insert(j).second) syntax(line, "duplicate entry for state " + std::to_string(j));
      e.emplace_back(j, p);
    }
    if (e.empty()) syntax(line, "empty distribution");
    return e;
  };

  while (in.next(tok)) {
    const auto line = in.line();
    if (tok[0] == "names") {
      if (!names.empty()) syntax(line, "duplicate 'names' line");
      if (tok.size() != n + 1) syntax(line, "expected one name per state");
      for (std::size_t k = 1; k < tok.size(); ++k) names.emplace_back(tok[k]);
    } else if (tok[0] == "init") {
      if (init) syntax(line, "duplicate 'init' line");
      init = finish_row(n, 0, read_entries(1, line), line);
    } else if (tok[0] == "row") {
      if (tok.size() < 2) syntax(line, "expected 'row <state> index:prob ...'");
      const auto s = parse_index(tok[1], line, "state index");
      check_index(s, n, line);
      if (rows[s]) syntax(line, "duplicate row for state " + std::to_string(s));
      rows[s] = finish_row(n, s, read_entries(2, line), line);
    } else {
      syntax(line, "unknown directive '" + std::string(tok[0]) + "'");
    }
  }
  if (!init) syntax(in.last(), "missing 'init' line");
  std::vector<Distribution> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (!rows[s])
      throw Error(ErrorCode::kMissingRow, "state " + std::to_string(s) + " has no row", s,
                  states_line);
    out.push_back(std::move(*rows[s]));
  }
  return MarkovChain(std::move(out), std::move(*init), std::move(names));
}

std::string write_structured(const MarkovChain& chain) {
  std::string out = std::string(kStructuredMagic) + " " + std::to_string(kStructuredVersion) + "\n";
  out += "states " + std::to_string(chain.size()) + "\n";
  if (!chain.names().empty()) {
    out += "names";
    for (const auto& nm : chain.names()) {
      if (nm.empty() || std::any_of(nm.begin(), nm.end(), [](char c) { return is_space(c) || c == '\n'; }))
        throw Error(ErrorCode::kInvalidArgument, "state names must be non-empty and space-free");
      out += ' ';
      out += nm;
    }
    out += '\n';
  }
  auto put = [&](const Distribution& d) {
    d.for_each([&](Outcome j, double p) {
      out += ' ';
      out += std::to_string(j);
      out += ':';
      out += fmt_real(p);
    });
    out += '\n';
  };
  out += "init";
  put(chain.init());
  for (std::size_t s = 0; s < chain.size(); ++s) {
    out += "row " + std::to_string(s);
    put(chain.row(s));
  }
  return out;
}

namespace {

bool looks_structured(std::string_view text) {
  LineReader in(text);
  std::vector<std::string_view> tok;
  return in.next(tok) && tok.front() == kStructuredMagic;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return ss.str();
}

}  // namespace

MarkovChain load_chain(const std::filesystem::path& path, const TraOptions& options) {
  const auto text = read_file(path);
  return looks_structured(text) ? parse_structured(text) : parse_tra(text, options);
}

void save_chain(const std::filesystem::path& path, const MarkovChain& chain, bool structured,
                bool drop_init) {
  const auto text = structured ? write_structured(chain) : write_tra(chain, drop_init);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

}  // namespace alignmon
