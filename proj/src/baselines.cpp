// Copyright 2026 The flipsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <flipsense/baselines.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include <flipsense/error.hpp>

namespace flipsense {

namespace {

std::uint32_t low_word(std::uint64_t value) { return static_cast<std::uint32_t>(value); }
std::uint32_t high_word(std::uint64_t value) { return static_cast<std::uint32_t>(value >> 32U); }

double token_distance(const std::set<std::string>& lhs, const std::set<std::string>& rhs) {
  if (lhs.empty() && rhs.empty()) {
    return 0.0;
  }
  std::size_t common = 0;
  auto l = lhs.begin();
  auto r = rhs.begin();
  while (l != lhs.end() && r != rhs.end()) {
    if (*l < *r) {
      ++l;
    } else if (*r < *l) {
      ++r;
    } else {
      ++common;
      ++l;
      ++r;
    }
  }
  const std::size_t total = lhs.size() + rhs.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(total);
}

}  // namespace

std::vector<TestId> random_select(const TestSet& universe, std::size_t n, const RandomPolicy& policy,
                                  std::size_t run_index, std::uint64_t stream) {
  if (n > universe.size()) {
    throw ArgumentError("cannot sample " + std::to_string(n) + " tests from a universe of " +
                        std::to_string(universe.size()));
  }
  if (run_index >= policy.runs) {
    throw ArgumentError("run index " + std::to_string(run_index) + " outside policy of " +
                        std::to_string(policy.runs) + " runs");
  }
  std::seed_seq seeds{low_word(policy.seed), high_word(policy.seed),
                      low_word(run_index),   high_word(run_index),
                      low_word(stream),      high_word(stream)};
  std::mt19937_64 rng{seeds};

  std::vector<TestId> pool(universe.begin(), universe.end());
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick{i, pool.size() - 1};
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(n);
  return pool;
}

ScoreVector hbtp_scores(const History& history, const FlipLedger& ledger, std::size_t at_seq) {
  if (at_seq > history.size()) {
    throw ArgumentError("sequence " + std::to_string(at_seq) + " is beyond the history");
  }
  std::map<TestId, std::size_t> last_failure;
  for (std::size_t seq = 0; seq < at_seq; ++seq) {
    for (const auto& [test, verdict] : history[seq].verdicts) {
      if (verdict == Verdict::fail) {
        last_failure[test] = seq;
      }
    }
  }
  std::map<TestId, double> scores;
  for (const auto& test : ledger.universe) {
    scores.emplace(test, 0.0);
  }
  for (const auto& [test, seq] : last_failure) {
    const auto gap = at_seq - 1 - seq;
    scores[test] = 1.0 / (1.0 + static_cast<double>(gap));
  }
  return ScoreVector{std::move(scores)};
}

std::set<std::string> identifier_tokens(std::string_view test_id) {
  std::set<std::string> tokens;
  std::size_t start = 0;
  while (start <= test_id.size()) {
    const auto end = test_id.find_first_of("/_", start);
    const auto piece = test_id.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!piece.empty()) {
      tokens.emplace(piece);
    }
    if (end == std::string_view::npos) {
      break;
    }
    start = end + 1;
  }
  return tokens;
}

double jaccard_distance(std::string_view lhs, std::string_view rhs) {
  return token_distance(identifier_tokens(lhs), identifier_tokens(rhs));
}

std::vector<TestId> dissimilarity_order(const TestSet& candidates, const std::vector<TestId>& already_chosen) {
  std::vector<TestId> remaining(candidates.begin(), candidates.end());
  std::vector<std::set<std::string>> tokens;
  tokens.reserve(remaining.size());
  for (const auto& test : remaining) {
    tokens.push_back(identifier_tokens(test));
  }

  // nearest[i]: distance from remaining[i] to the closest chosen test; empty
  // optional while nothing is chosen.
  std::vector<std::optional<double>> nearest(remaining.size());
  for (const auto& chosen : already_chosen) {
    const auto chosen_tokens = identifier_tokens(chosen);
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double d = token_distance(tokens[i], chosen_tokens);
      nearest[i] = nearest[i] ? std::min(*nearest[i], d) : d;
    }
  }

  std::vector<TestId> order;
  order.reserve(remaining.size());
  std::vector<bool> taken(remaining.size(), false);
  for (std::size_t step = 0; step < remaining.size(); ++step) {
    std::size_t best = remaining.size();
    double best_distance = -1.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (taken[i]) {
        continue;
      }
      const double d = nearest[i].value_or(std::numeric_limits<double>::infinity());
      // Candidates are scanned in id order, so strict > keeps the smaller id on ties.
      if (best == remaining.size() || d > best_distance) {
        best = i;
        best_distance = d;
      }
    }
    taken[best] = true;
    order.push_back(remaining[best]);
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (!taken[i]) {
        const double d = token_distance(tokens[i], tokens[best]);
        nearest[i] = nearest[i] ? std::min(*nearest[i], d) : d;
      }
    }
  }
  return order;
}

}  // namespace flipsense
