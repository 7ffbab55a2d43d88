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

#ifndef FLIPSENSE_BASELINES_HPP
#define FLIPSENSE_BASELINES_HPP

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <flipsense/history.hpp>
#include <flipsense/sensitivity.hpp>

namespace flipsense {

struct RandomPolicy {
  std::uint64_t seed = 0;
  std::size_t runs = 100;
};

/// Uniform sample of n tests without replacement, in draw order.
///
/// The draw is a function of (seed, run_index, stream, sorted universe) only.
/// `stream` separates independent draws that share a run index, such as the
/// builds of one replay. The first m draws of a call with size n >= m equal
/// the draws of the same call with size m.
///
/// Throws ArgumentError when n exceeds the universe or run_index >= runs.
[[nodiscard]] std::vector<TestId> random_select(const TestSet& universe, std::size_t n,
                                                const RandomPolicy& policy, std::size_t run_index,
                                                std::uint64_t stream = 0);

/// Failure-recency weight 1/(1+g), where g is the number of builds between
/// the test's latest failure before `at_seq` and `at_seq` itself (g = 0 for a
/// failure in build at_seq-1). Tests that never failed score 0. Every test in
/// the ledger's universe appears in the result.
[[nodiscard]] ScoreVector hbtp_scores(const History& history, const FlipLedger& ledger,
                                      std::size_t at_seq);

/// Identifier tokens split on '/' and '_'; empty tokens dropped.
[[nodiscard]] std::set<std::string> identifier_tokens(std::string_view test_id);

/// 1 - |A ∩ B| / |A ∪ B| over identifier tokens; 0 when both are empty.
[[nodiscard]] double jaccard_distance(std::string_view lhs, std::string_view rhs);

/// Greedy farthest-first ordering of `candidates`. Each step picks the
/// candidate whose minimum distance to everything chosen so far (including
/// `already_chosen`) is largest, ties to the smaller id. With nothing chosen
/// yet the smallest id goes first.
[[nodiscard]] std::vector<TestId> dissimilarity_order(const TestSet& candidates,
                                                      const std::vector<TestId>& already_chosen);

}  // namespace flipsense

#endif  // FLIPSENSE_BASELINES_HPP
