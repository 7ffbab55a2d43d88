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

#ifndef FLIPSENSE_HISTORY_HPP
#define FLIPSENSE_HISTORY_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace flipsense {

using FileId = std::string;
using TestId = std::string;
using FileSet = std::set<FileId>;
using TestSet = std::set<TestId>;

enum class Verdict { pass, fail };

[[nodiscard]] std::string_view to_string(Verdict verdict) noexcept;
[[nodiscard]] std::optional<Verdict> parse_verdict(std::string_view text) noexcept;

/// One build of the regression history.
///
/// `changed_files` is the change set between the previous build and this one.
/// A test absent from `verdicts` did not run in this build. The record at
/// seq 0 is the baseline: its change set never enters the sensitivity matrix.
struct BuildRecord {
  std::string build_id;
  std::size_t seq = 0;
  FileSet changed_files;
  std::map<TestId, Verdict> verdicts;

  friend bool operator==(const BuildRecord&, const BuildRecord&) = default;
};

using History = std::vector<BuildRecord>;

struct HistorySummary {
  std::size_t builds = 0;
  std::size_t distinct_files = 0;
  std::size_t distinct_tests = 0;
};

/// Parses one line-delimited record: {"build": str, "changes": [str], "results": {test: "pass"|"fail"}}.
/// Throws ParseError naming `line_number` on any structural problem.
[[nodiscard]] BuildRecord parse_build_record(std::string_view line, std::size_t line_number);

/// Reads a whole history, assigning seq by line order. Blank lines are skipped
/// but still counted for error line numbers.
[[nodiscard]] History ingest_history(std::istream& in);
[[nodiscard]] History load_history(const std::string& path);

/// Canonical single-line serialisation (keys and sets in sorted order).
[[nodiscard]] std::string to_record_line(const BuildRecord& record);
void write_history(std::ostream& out, const History& history);

/// Throws ValidationError for an empty history, duplicate build ids,
/// non-contiguous seq, or empty identifiers.
void validate_history(const History& history);

[[nodiscard]] HistorySummary summarize(const History& history);

enum class FlipDirection { broken, fixed };

[[nodiscard]] std::string_view to_string(FlipDirection direction) noexcept;

struct FlipEvent {
  std::size_t seq = 0;
  TestId test_id;
  FlipDirection direction = FlipDirection::broken;

  friend bool operator==(const FlipEvent&, const FlipEvent&) = default;
};

/// Flip bookkeeping for a history. `flipped_at` and `predictable_at` are
/// indexed by seq and always have one slot per build.
struct FlipLedger {
  std::vector<FlipEvent> events;
  std::vector<TestSet> flipped_at;
  std::vector<TestSet> predictable_at;
  TestSet universe;

  friend bool operator==(const FlipLedger&, const FlipLedger&) = default;
};

/// Flips are taken against the most recent build in which the test had a
/// verdict, so a test that skips builds still flips when its verdict changes.
[[nodiscard]] FlipLedger extract_flips(const History& history);

struct PredictableStats {
  std::size_t builds = 0;
  std::size_t qualifying_builds = 0;  // builds with at least one predictable test
  std::size_t at_most_5 = 0;
  std::size_t from_6_to_25 = 0;
  std::size_t above_25 = 0;
};

[[nodiscard]] PredictableStats predictable_build_stats(const FlipLedger& ledger);

}  // namespace flipsense

#endif  // FLIPSENSE_HISTORY_HPP
