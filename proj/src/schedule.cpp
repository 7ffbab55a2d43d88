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

#include <flipsense/schedule.hpp>

#include <algorithm>
#include <set>

#include <flipsense/baselines.hpp>
#include <flipsense/error.hpp>

namespace flipsense {

namespace {

constexpr std::string_view kStateKind = "flipsense-schedule";

struct Candidate {
  std::uint64_t staleness;
  const TestId* id;
};

// Stable tests sorted by (staleness desc, id asc).
std::vector<Candidate> stable_by_staleness(const ScheduleState& state) {
  std::vector<Candidate> out;
  for (const auto& [test, schedule] : state.tests) {
    if (schedule.stable) {
      out.push_back({schedule.staleness, &test});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& lhs, const Candidate& rhs) { return lhs.staleness > rhs.staleness; });
  return out;
}

}  // namespace

ScheduleState make_schedule_state(const History& history, const FlipLedger& ledger, StableRule rule) {
  TestSet flipped;
  for (const auto& event : ledger.events) {
    flipped.insert(event.test_id);
  }
  TestSet failed;
  for (const auto& record : history) {
    for (const auto& [test, verdict] : record.verdicts) {
      if (verdict == Verdict::fail) {
        failed.insert(test);
      }
    }
  }

  ScheduleState state;
  for (const auto& test : ledger.universe) {
    bool stable = !flipped.contains(test);
    if (rule == StableRule::always_passed) {
      stable = stable && !failed.contains(test);
    }
    state.tests.emplace(test, TestSchedule{0, stable});
    state.pending.track(test);
  }
  for (const auto& record : history) {
    for (const auto& [test, verdict] : record.verdicts) {
      state.pending.entry(test).last_verdict = verdict;
    }
  }
  return state;
}

std::uint64_t cost(const ScheduleState& state) noexcept {
  std::uint64_t total = 0;
  for (const auto& [test, schedule] : state.tests) {
    total += schedule.staleness * schedule.staleness;
  }
  return total;
}

std::vector<TestId> select_stable(const ScheduleState& state, std::size_t budget, const StableStrategy& strategy) {
  if (budget == 0) {
    throw ArgumentError("stable-test budget must be at least 1");
  }
  const auto ranked = stable_by_staleness(state);
  std::vector<TestId> selected;

  if (strategy.kind == StableStrategy::Kind::cost_min) {
    for (std::size_t i = 0; i < ranked.size() && selected.size() < budget; ++i) {
      selected.push_back(*ranked[i].id);
    }
    return selected;
  }

  std::size_t i = 0;
  for (; i < ranked.size() && selected.size() < budget && ranked[i].staleness >= strategy.window_days; ++i) {
    selected.push_back(*ranked[i].id);
  }
  while (i < ranked.size() && selected.size() < budget) {
    TestSet tier;
    const auto level = ranked[i].staleness;
    for (; i < ranked.size() && ranked[i].staleness == level; ++i) {
      tier.insert(*ranked[i].id);
    }
    for (auto& test : dissimilarity_order(tier, selected)) {
      if (selected.size() == budget) {
        break;
      }
      selected.push_back(std::move(test));
    }
  }
  return selected;
}

ScoreVector normalised(const ScoreVector& scores) {
  double peak = 0.0;
  for (const auto& [test, score] : scores.scores()) {
    peak = std::max(peak, score);
  }
  if (!(peak > 0.0)) {
    return scores;
  }
  std::map<TestId, double> out;
  for (const auto& [test, score] : scores.scores()) {
    out.emplace(test, score / peak);
  }
  return ScoreVector{std::move(out)};
}

std::vector<TestId> office_hours_tick(const SensitivityMatrix& matrix, PendingChanges& pending,
                                      const FileSet& changed_files, const ScoreVector& hbtp, std::size_t k,
                                      double weight, const TestSet& universe, ScoreMode mode) {
  if (k == 0) {
    throw ArgumentError("office-hours selection size must be at least 1");
  }
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw ArgumentError("blend weight must lie in [0, 1]");
  }
  incremental_observe(pending, changed_files);

  const auto sensitivity = normalised(matrix.slice_scores(changed_files, mode));
  const auto history = normalised(hbtp);
  std::map<TestId, double> combined;
  for (const auto& [test, score] : sensitivity.scores()) {
    combined[test] += weight * score;
  }
  for (const auto& [test, score] : history.scores()) {
    combined[test] += (1.0 - weight) * score;
  }
  return select_top_n(ScoreVector{std::move(combined)}, k, universe);
}

void day_tick(ScheduleState& state, const TestSet& executed) {
  for (auto& [test, schedule] : state.tests) {
    if (executed.contains(test)) {
      schedule.staleness = 0;
    } else {
      ++schedule.staleness;
    }
  }
  for (const auto& test : executed) {
    state.tests.try_emplace(test, TestSchedule{0, true});
  }
}

nlohmann::ordered_json to_json(const ScheduleState& state) {
  using Json = nlohmann::ordered_json;
  Json doc;
  doc["kind"] = kStateKind;
  Json tests = Json::object();
  for (const auto& [test, schedule] : state.tests) {
    tests[test] = Json{{"staleness", schedule.staleness}, {"stable", schedule.stable}};
  }
  doc["tests"] = std::move(tests);
  Json pending = Json::object();
  for (const auto& [test, entry] : state.pending.entries()) {
    Json item;
    item["files"] = entry.accumulated;
    if (entry.last_verdict) {
      item["last_verdict"] = to_string(*entry.last_verdict);
    } else {
      item["last_verdict"] = nullptr;
    }
    pending[test] = std::move(item);
  }
  doc["pending"] = std::move(pending);
  return doc;
}

ScheduleState schedule_state_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("kind", "") != kStateKind) {
      throw ParseError(1, "not a flipsense schedule state");
    }
    ScheduleState state;
    for (const auto& [test, item] : doc.at("tests").items()) {
      state.tests.emplace(test, TestSchedule{item.at("staleness").get<std::uint64_t>(), item.at("stable").get<bool>()});
    }
    for (const auto& [test, item] : doc.at("pending").items()) {
      auto& entry = state.pending.entry(test);
      for (const auto& file : item.at("files")) {
        entry.accumulated.insert(file.get<std::string>());
      }
      const auto& verdict = item.at("last_verdict");
      if (!verdict.is_null()) {
        const auto parsed = parse_verdict(verdict.get<std::string>());
        if (!parsed) {
          throw ParseError(1, "test '" + test + "' has an unknown last verdict");
        }
        entry.last_verdict = *parsed;
      }
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string{"malformed schedule state: "} + e.what());
  }
}

}  // namespace flipsense
