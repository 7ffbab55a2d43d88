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

#ifndef FLIPSENSE_SCHEDULE_HPP
#define FLIPSENSE_SCHEDULE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <flipsense/history.hpp>
#include <flipsense/sensitivity.hpp>

namespace flipsense {

enum class StableRule {
  never_flipped,  // no flip anywhere in the ledger
  always_passed,  // never flipped and never failed
};

struct TestSchedule {
  std::uint64_t staleness = 0;  // days since the test last executed
  bool stable = true;

  friend bool operator==(const TestSchedule&, const TestSchedule&) = default;
};

struct ScheduleState {
  std::map<TestId, TestSchedule, std::less<>> tests;
  PendingChanges pending;

  friend bool operator==(const ScheduleState&, const ScheduleState&) = default;
};

/// Tracks every test of the history with staleness 0 and its stability flag.
/// Pending changes are seeded with each test's last verdict.
[[nodiscard]] ScheduleState make_schedule_state(const History& history, const FlipLedger& ledger,
                                                StableRule rule = StableRule::never_flipped);

/// Σ s_i² over all tracked tests.
[[nodiscard]] std::uint64_t cost(const ScheduleState& state) noexcept;

struct StableStrategy {
  enum class Kind { cost_min, round_robin };

  Kind kind = Kind::cost_min;
  std::uint64_t window_days = 7;  // round robin only

  static StableStrategy cost_min() { return {Kind::cost_min, 0}; }
  static StableStrategy round_robin(std::uint64_t window) { return {Kind::round_robin, window}; }
};

/// Picks up to `budget` stable tests.
///
/// cost_min takes the most stale tests (staleness desc, id asc), which
/// minimises the post-execution cost among all subsets of that size.
/// round_robin takes overdue tests (staleness >= window) first in the same
/// order, then fills the remaining budget tier by tier in staleness order,
/// using dissimilarity ordering within a tier. Throws ArgumentError for
/// budget == 0.
[[nodiscard]] std::vector<TestId> select_stable(const ScheduleState& state, std::size_t budget,
                                                const StableStrategy& strategy);

/// One office-hours iteration: records the change set into `pending`, then
/// ranks by w * sensitivity + (1 - w) * hbtp, each vector first divided by
/// its largest entry. Returns the top k under the usual tie rule.
/// Throws ArgumentError for k == 0 or w outside [0,1].
[[nodiscard]] std::vector<TestId> office_hours_tick(const SensitivityMatrix& matrix, PendingChanges& pending,
                                                    const FileSet& changed_files, const ScoreVector& hbtp,
                                                    std::size_t k, double weight, const TestSet& universe,
                                                    ScoreMode mode = ScoreMode::sum);

/// Divides every score by the largest one; all-zero vectors are returned unchanged.
[[nodiscard]] ScoreVector normalised(const ScoreVector& scores);

/// Resets executed tests to staleness 0 and ages every other test by one day.
/// Executed tests not yet tracked are added as stable.
void day_tick(ScheduleState& state, const TestSet& executed);

[[nodiscard]] nlohmann::ordered_json to_json(const ScheduleState& state);
/// Throws ParseError (line 1) on a malformed document.
[[nodiscard]] ScheduleState schedule_state_from_json(const nlohmann::json& doc);

}  // namespace flipsense

#endif  // FLIPSENSE_SCHEDULE_HPP
