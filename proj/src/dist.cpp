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

#include <algorithm>
#include <cmath>
#include <sstream>

namespace alignmon {

std::string Violation::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (code) {
    case ErrorCode::kMassSumMismatch:
      os << "probabilities sum to " << value << ", expected 1";
      break;
    case ErrorCode::kNegativeMass:
      os << "negative mass " << value << " at index " << index;
      break;
    case ErrorCode::kIndexOutOfRange:
      os << "index " << index << " out of range";
      break;
    case ErrorCode::kInvalidProbability:
      os << "non-finite mass at index " << index;
      break;
    default:
      os << error_code_name(code) << " at index " << index;
  }
  return os.str();
}

namespace {

std::optional<Violation> check_mass(std::size_t index, double p) {
  if (!std::isfinite(p)) return Violation{ErrorCode::kInvalidProbability, index, p};
  if (p < 0.0) return Violation{ErrorCode::kNegativeMass, index, p};
  return std::nullopt;
}

std::optional<Violation> check_sum(double sum) {
  if (std::abs(sum - 1.0) > kMassTolerance)
    return Violation{ErrorCode::kMassSumMismatch, 0, sum};
  return std::nullopt;
}

[[noreturn]] void raise(const Violation& v) {
  throw Error(v.code, v.describe(), v.index);
}

// Sorts by index, rejects duplicates, drops explicit zeros.
std::vector<SparseEntry> canonical(std::vector<SparseEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.first < b.first; });
  for (std::size_t k = 1; k < entries.size(); ++k)
    if (entries[k].first == entries[k - 1].first)
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate outcome " + std::to_string(entries[k].first), entries[k].first);
  std::erase_if(entries, [](const SparseEntry& e) { return e.second == 0.0; });
  return entries;
}

}  // namespace

std::optional<Violation> validate(std::span<const double> mass) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (auto v = check_mass(i, mass[i])) return v;
    sum += mass[i];
  }
  return check_sum(sum);
}

std::optional<Violation> validate(std::size_t n, std::span<const SparseEntry> entries) {
  double sum = 0.0;
  for (const auto& [i, p] : entries) {
    if (i >= n) return Violation{ErrorCode::kIndexOutOfRange, i, p};
    if (auto v = check_mass(i, p)) return v;
    sum += p;
  }
  return check_sum(sum);
}

Distribution Distribution::build(std::size_t n, std::vector<SparseEntry> sorted) {
  Distribution d;
  d.n_ = n;
  d.support_ = sorted.size();
  if (4 * d.support_ >= n) {
    d.dense_.assign(n, 0.0);
    for (const auto& [i, p] : sorted) d.dense_[i] = p;
  } else {
    d.idx_.reserve(sorted.size());
    d.val_.reserve(sorted.size());
    for (const auto& [i, p] : sorted) {
      d.idx_.push_back(i);
      d.val_.push_back(p);
    }
  }
  return d;
}

Distribution Distribution::dense(std::vector<double> mass) {
  if (mass.empty()) throw Error(ErrorCode::kEmptySupport, "distribution over zero outcomes");
  if (auto v = validate(mass)) raise(*v);
  std::vector<SparseEntry> entries;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] > 0.0) entries.emplace_back(i, mass[i]);
  return build(mass.size(), std::move(entries));
}

Distribution Distribution::sparse(std::size_t n, std::vector<SparseEntry> entries) {
  if (n == 0) throw Error(ErrorCode::kEmptySupport, "distribution over zero outcomes");
  if (auto v = validate(n, entries)) raise(*v);
  return build(n, canonical(std::move(entries)));
}

Distribution Distribution::normalized(std::vector<double> weights) {
  std::vector<SparseEntry> entries;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] != 0.0) entries.emplace_back(i, weights[i]);
  return normalized(weights.size(), std::move(entries));
}

Distribution Distribution::normalized(std::size_t n, std::vector<SparseEntry> entries) {
  if (n == 0) throw Error(ErrorCode::kEmptySupport, "distribution over zero outcomes");
  double total = 0.0;
  for (const auto& [i, p] : entries) {
    if (i >= n) throw Error(ErrorCode::kIndexOutOfRange, "index " + std::to_string(i) + " out of range", i);
    if (auto v = check_mass(i, p)) raise(*v);
    total += p;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kEmptySupport, "cannot normalize zero total mass");
  for (auto& e : entries) e.second /= total;
  return build(n, canonical(std::move(entries)));
}

double Distribution::prob(Outcome x) const {
  if (!dense_.empty()) return dense_[x];
  auto it = std::lower_bound(idx_.begin(), idx_.end(), x);
  if (it == idx_.end() || *it != x) return 0.0;
  return val_[static_cast<std::size_t>(it - idx_.begin())];
}

std::vector<double> Distribution::to_dense() const {
  std::vector<double> out(n_, 0.0);
  for_each([&out](Outcome i, double p) { out[i] = p; });
  return out;
}

std::vector<SparseEntry> Distribution::entries() const {
  std::vector<SparseEntry> out;
  out.reserve(support_);
  for_each([&out](Outcome i, double p) { out.emplace_back(i, p); });
  return out;
}

std::vector<Outcome> Distribution::support() const {
  std::vector<Outcome> out;
  out.reserve(support_);
  for_each([&out](Outcome i, double) { out.push_back(i); });
  return out;
}

Outcome Distribution::argmax() const {
  Outcome best = 0;
  double best_p = -1.0;
  for_each([&](Outcome i, double p) {
    if (p > best_p) {
      best = i;
      best_p = p;
    }
  });
  return best;
}

bool operator==(const Distribution& a, const Distribution& b) {
  return a.n_ == b.n_ && a.entries() == b.entries();
}

Distribution point_mass(std::size_t n, Outcome i) {
  if (i >= n) throw Error(ErrorCode::kIndexOutOfRange, "point mass index out of range", i);
  return Distribution::sparse(n, {{i, 1.0}});
}

Distribution uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kEmptySupport, "uniform over zero outcomes");
  return Distribution::dense(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution uniform_over(std::size_t n, std::span<const Outcome> support) {
  if (support.empty()) throw Error(ErrorCode::kEmptySupport, "uniform over an empty support");
  std::vector<Outcome> s(support.begin(), support.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  const double p = 1.0 / static_cast<double>(s.size());
  std::vector<SparseEntry> entries;
  entries.reserve(s.size());
  for (auto i : s) {
    if (i >= n) throw Error(ErrorCode::kIndexOutOfRange, "support index out of range", i);
    entries.emplace_back(i, p);
  }
  return Distribution::sparse(n, std::move(entries));
}

Outcome sample(const Distribution& d, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Outcome last = 0;
  bool found = false;
  Outcome hit = 0;
  d.for_each([&](Outcome i, double p) {
    if (found) return;
    acc += p;
    last = i;
    if (u < acc) {
      hit = i;
      found = true;
    }
  });
  return found ? hit : last;
}

CdfSampler::CdfSampler(const Distribution& d) {
  outcomes_.reserve(d.support_size());
  cumulative_.reserve(d.support_size());
  double acc = 0.0;
  d.for_each([&](Outcome i, double p) {
    acc += p;
    outcomes_.push_back(i);
    cumulative_.push_back(acc);
  });
}

Outcome CdfSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return outcomes_.back();
  return outcomes_[static_cast<std::size_t>(it - cumulative_.begin())];
}

}  // namespace alignmon
