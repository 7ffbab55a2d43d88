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

#include <flipsense/history.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include <flipsense/error.hpp>

namespace flipsense {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string_view to_string(Verdict verdict) noexcept {
  return verdict == Verdict::pass ? "pass" : "fail";
}

std::optional<Verdict> parse_verdict(std::string_view text) noexcept {
  if (text == "pass") {
    return Verdict::pass;
  }
  if (text == "fail") {
    return Verdict::fail;
  }
  return std::nullopt;
}

std::string_view to_string(FlipDirection direction) noexcept {
  return direction == FlipDirection::broken ? "broken" : "fixed";
}

BuildRecord parse_build_record(std::string_view line, std::size_t line_number) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ParseError(line_number, std::string{"malformed record: "} + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError(line_number, "record is not an object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "build" && key != "changes" && key != "results") {
      throw ParseError(line_number, "unexpected field '" + key + "'");
    }
  }

  BuildRecord record;
  const auto build = doc.find("build");
  if (build == doc.end() || !build->is_string()) {
    throw ParseError(line_number, "field 'build' must be a string");
  }
  record.build_id = build->get<std::string>();
  if (record.build_id.empty()) {
    throw ParseError(line_number, "field 'build' is empty");
  }

  const auto changes = doc.find("changes");
  if (changes == doc.end() || !changes->is_array()) {
    throw ParseError(line_number, "field 'changes' must be an array of strings");
  }
  for (const auto& file : *changes) {
    if (!file.is_string() || file.get_ref<const std::string&>().empty()) {
      throw ParseError(line_number, "field 'changes' must contain non-empty strings");
    }
    record.changed_files.insert(file.get<std::string>());
  }

  const auto results = doc.find("results");
  if (results == doc.end() || !results->is_object()) {
    throw ParseError(line_number, "field 'results' must be an object");
  }
  for (const auto& [test, verdict] : results->items()) {
    if (test.empty()) {
      throw ParseError(line_number, "empty test id in 'results'");
    }
    std::optional<Verdict> parsed;
    if (verdict.is_string()) {
      parsed = parse_verdict(verdict.get_ref<const std::string&>());
    }
    if (!parsed) {
      throw ParseError(line_number, "test '" + test + "' has verdict " + verdict.dump() +
                                        ", expected \"pass\" or \"fail\"");
    }
    record.verdicts.emplace(test, *parsed);
  }
  return record;
}

History ingest_history(std::istream& in) {
  History history;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) {
      continue;
    }
    BuildRecord record = parse_build_record(line, line_number);
    if (!seen_ids.insert(record.build_id).second) {
      throw ValidationError("line " + std::to_string(line_number) + ": duplicate build id '" +
                            record.build_id + "'");
    }
    record.seq = history.size();
    history.push_back(std::move(record));
  }
  if (in.bad()) {
    throw IoError("failed while reading history stream");
  }
  validate_history(history);
  return history;
}

History load_history(const std::string& path) {
  std::ifstream in{path};
  if (!in) {
    throw IoError("cannot open history file '" + path + "'");
  }
  return ingest_history(in);
}

std::string to_record_line(const BuildRecord& record) {
  OrderedJson doc;
  doc["build"] = record.build_id;
  doc["changes"] = OrderedJson::array();
  for (const auto& file : record.changed_files) {
    doc["changes"].push_back(file);
  }
  doc["results"] = OrderedJson::object();
  for (const auto& [test, verdict] : record.verdicts) {
    doc["results"][test] = std::string{to_string(verdict)};
  }
  return doc.dump();
}

void write_history(std::ostream& out, const History& history) {
  for (const auto& record : history) {
    out << to_record_line(record) << '\n';
  }
}

void validate_history(const History& history) {
  if (history.empty()) {
    throw ValidationError("history contains no builds");
  }
  std::unordered_set<std::string_view> ids;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& record = history[i];
    if (record.seq != i) {
      throw ValidationError("build '" + record.build_id + "' has seq " + std::to_string(record.seq) +
                            ", expected " + std::to_string(i));
    }
    if (record.build_id.empty()) {
      throw ValidationError("build at seq " + std::to_string(i) + " has an empty id");
    }
    if (!ids.insert(record.build_id).second) {
      throw ValidationError("duplicate build id '" + record.build_id + "'");
    }
    if (record.changed_files.contains("")) {
      throw ValidationError("build '" + record.build_id + "' lists an empty file id");
    }
    if (record.verdicts.contains("")) {
      throw ValidationError("build '" + record.build_id + "' has a verdict for an empty test id");
    }
  }
}

HistorySummary summarize(const History& history) {
  std::unordered_set<std::string_view> files;
  std::unordered_set<std::string_view> tests;
  for (const auto& record : history) {
    files.insert(record.changed_files.begin(), record.changed_files.end());
    for (const auto& [test, verdict] : record.verdicts) {
      tests.insert(test);
    }
  }
  return {history.size(), files.size(), tests.size()};
}

FlipLedger extract_flips(const History& history) {
  FlipLedger ledger;
  ledger.flipped_at.resize(history.size());
  ledger.predictable_at.resize(history.size());

  std::unordered_map<std::string_view, Verdict> last_known;
  std::unordered_set<std::string_view> flipped_before;
  for (const auto& record : history) {
    auto& flipped = ledger.flipped_at[record.seq];
    for (const auto& [test, verdict] : record.verdicts) {
      ledger.universe.insert(test);
      auto [it, first_seen] = last_known.try_emplace(test, verdict);
      if (first_seen || it->second == verdict) {
        continue;
      }
      it->second = verdict;
      ledger.events.push_back(
          {record.seq, test, verdict == Verdict::fail ? FlipDirection::broken : FlipDirection::fixed});
      flipped.insert(test);
    }
    // Only flips from strictly earlier builds count toward predictability.
    for (const auto& test : flipped) {
      if (flipped_before.contains(test)) {
        ledger.predictable_at[record.seq].insert(test);
      }
    }
    for (const auto& test : flipped) {
      flipped_before.insert(test);
    }
  }
  return ledger;
}

PredictableStats predictable_build_stats(const FlipLedger& ledger) {
  PredictableStats stats;
  stats.builds = ledger.predictable_at.size();
  for (const auto& predictable : ledger.predictable_at) {
    const auto count = predictable.size();
    if (count == 0) {
      continue;
    }
    ++stats.qualifying_builds;
    if (count <= 5) {
      ++stats.at_most_5;
    } else if (count <= 25) {
      ++stats.from_6_to_25;
    } else {
      ++stats.above_25;
    }
  }
  return stats;
}

}  // namespace flipsense
