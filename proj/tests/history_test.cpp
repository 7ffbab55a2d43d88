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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <flipsense/error.hpp>
#include <flipsense/history.hpp>

#include "support/oracles.hpp"

namespace {

using flipsense::FlipDirection;
using flipsense::TestSet;
using flipsense::Verdict;

flipsense::History ingest(const std::string& text) {
  std::istringstream in{text};
  return flipsense::ingest_history(in);
}

// Builds a one-test history from a verdict string: p, f, or '.' for not run.
flipsense::History single_test(std::string_view pattern) {
  flipsense::oracle::VerdictTable table;
  for (const char c : pattern) {
    std::optional<Verdict> cell;
    if (c == 'p') {
      cell = Verdict::pass;
    } else if (c == 'f') {
      cell = Verdict::fail;
    }
    table.push_back({cell});
  }
  return flipsense::oracle::table_to_history(table);
}

TEST(Ingest, AssignsSequenceByLineOrder) {
  const auto history = ingest(
      R"({"build":"b1","changes":[],"results":{"tc":"pass"}})"
      "\n"
      R"({"build":"b2","changes":["src/a.c","src/b.c"],"results":{"tc":"fail","tc2":"pass"}})"
      "\n"
      R"({"build":"b3","changes":["src/a.c"],"results":{}})"
      "\n");
  ASSERT_EQ(history.size(), 3U);
  for (std::size_t i = 0; i < history.size(); ++i) {
    EXPECT_EQ(history[i].seq, i);
  }
  EXPECT_EQ(history[1].build_id, "b2");
  EXPECT_EQ(history[1].changed_files, (flipsense::FileSet{"src/a.c", "src/b.c"}));
  EXPECT_EQ(history[1].verdicts.at("tc"), Verdict::fail);

  const auto summary = flipsense::summarize(history);
  EXPECT_EQ(summary.builds, 3U);
  EXPECT_EQ(summary.distinct_files, 2U);
  EXPECT_EQ(summary.distinct_tests, 2U);
}

TEST(Ingest, RejectsVerdictOutsideVocabulary) {
  try {
    (void)ingest(R"({"build":"b1","changes":[],"results":{"net_login":"skip"}})");
    FAIL() << "expected a parse error";
  } catch (const flipsense::ParseError& e) {
    EXPECT_EQ(e.line(), 1U);
    EXPECT_NE(std::string{e.what()}.find("net_login"), std::string::npos);
  }
}

TEST(Ingest, MalformedLineReportsLineNumber) {
  const std::string text =
      R"({"build":"b1","changes":[],"results":{}})"
      "\n\n"
      R"({"build":"b2","changes":[}})"
      "\n";
  try {
    (void)ingest(text);
    FAIL() << "expected a parse error";
  } catch (const flipsense::ParseError& e) {
    EXPECT_EQ(e.line(), 3U);
  }
}

TEST(Ingest, StructuralErrors) {
  EXPECT_THROW((void)ingest(""), flipsense::ValidationError);
  EXPECT_THROW((void)ingest("\n  \n"), flipsense::ValidationError);
  EXPECT_THROW((void)ingest(R"({"build":"b1","changes":[],"results":{}})"
                            "\n"
                            R"({"build":"b1","changes":[],"results":{}})"),
               flipsense::ValidationError);
  EXPECT_THROW((void)ingest(R"({"build":"b1","results":{}})"), flipsense::ParseError);
  EXPECT_THROW((void)ingest(R"({"build":"b1","changes":[],"results":{},"extra":1})"), flipsense::ParseError);
  EXPECT_THROW((void)ingest(R"({"build":"b1","changes":[""],"results":{}})"), flipsense::ParseError);
  EXPECT_THROW((void)ingest(R"({"build":"","changes":[],"results":{}})"), flipsense::ParseError);
  EXPECT_THROW((void)ingest(R"({"build":"b1","changes":[],"results":{"":"pass"}})"), flipsense::ParseError);
  EXPECT_THROW((void)ingest(R"({"build":"b1","changes":[3],"results":{}})"), flipsense::ParseError);
  EXPECT_THROW((void)ingest(R"(["b1"])"), flipsense::ParseError);
}

// 176 builds, 6720 modified files and 1254 functional tests.
TEST(Ingest, ReportsCountsForLargeHistory) {
  constexpr std::size_t kBuilds = 176;
  constexpr std::size_t kFiles = 6720;
  constexpr std::size_t kTests = 1254;
  flipsense::History history(kBuilds);
  for (std::size_t b = 0; b < kBuilds; ++b) {
    history[b].build_id = "build-" + std::to_string(b);
    history[b].seq = b;
    for (std::size_t t = 0; t < kTests; ++t) {
      history[b].verdicts.emplace("tc" + std::to_string(t), (t + b) % 7 == 0 ? Verdict::fail : Verdict::pass);
    }
  }
  for (std::size_t f = 0; f < kFiles; ++f) {
    history[f % kBuilds].changed_files.insert("src/file" + std::to_string(f) + ".c");
  }
  std::stringstream text;
  flipsense::write_history(text, history);
  const auto ingested = flipsense::ingest_history(text);
  const auto summary = flipsense::summarize(ingested);
  EXPECT_EQ(summary.builds, kBuilds);
  EXPECT_EQ(summary.distinct_files, kFiles);
  EXPECT_EQ(summary.distinct_tests, kTests);
}

TEST(Ingest, EmittedHistoryRoundTripsByteExactly) {
  std::mt19937_64 rng{11};
  for (int trial = 0; trial < 20; ++trial) {
    const auto table = flipsense::oracle::random_table(rng, 8, 6, 0.2, 0.3);
    std::vector<flipsense::FileSet> changes(8);
    for (std::size_t b = 0; b < changes.size(); ++b) {
      for (std::size_t f = 0; f < b % 4; ++f) {
        changes[b].insert("dir/ü_" + std::to_string(f + b));
      }
    }
    const auto history = flipsense::oracle::table_to_history(table, changes);
    std::stringstream first;
    flipsense::write_history(first, history);
    const std::string emitted = first.str();
    std::istringstream in{emitted};
    const auto reread = flipsense::ingest_history(in);
    EXPECT_EQ(reread, history);
    std::ostringstream second;
    flipsense::write_history(second, reread);
    EXPECT_EQ(second.str(), emitted);
  }
}

TEST(ExtractFlips, PassFailFailPass) {
  const auto ledger = flipsense::extract_flips(single_test("pffp"));
  const std::string tc = flipsense::oracle::test_label(0);
  ASSERT_EQ(ledger.flipped_at.size(), 4U);
  EXPECT_TRUE(ledger.flipped_at[0].empty());
  EXPECT_EQ(ledger.flipped_at[1], TestSet{tc});
  EXPECT_TRUE(ledger.flipped_at[2].empty());
  EXPECT_EQ(ledger.flipped_at[3], TestSet{tc});
  EXPECT_TRUE(ledger.predictable_at[1].empty());
  EXPECT_EQ(ledger.predictable_at[3], TestSet{tc});
  ASSERT_EQ(ledger.events.size(), 2U);
  EXPECT_EQ(ledger.events[0].direction, FlipDirection::broken);
  EXPECT_EQ(ledger.events[1].direction, FlipDirection::fixed);
}

TEST(ExtractFlips, CarriesVerdictAcrossMissingRun) {
  const auto ledger = flipsense::extract_flips(single_test("p.f"));
  const std::string tc = flipsense::oracle::test_label(0);
  EXPECT_TRUE(ledger.flipped_at[1].empty());
  EXPECT_EQ(ledger.flipped_at[2], TestSet{tc});
  EXPECT_TRUE(ledger.predictable_at[2].empty());
}

TEST(ExtractFlips, ConstantVerdictNeverFlips) {
  const auto ledger = flipsense::extract_flips(single_test("fff"));
  EXPECT_TRUE(ledger.events.empty());
  for (const auto& set : ledger.predictable_at) {
    EXPECT_TRUE(set.empty());
  }
  EXPECT_EQ(ledger.universe.size(), 1U);
}

TEST(ExtractFlips, FirstVerdictIsNotAFlip) {
  const auto ledger = flipsense::extract_flips(single_test("..f"));
  EXPECT_TRUE(ledger.events.empty());
}

TEST(ExtractFlips, MatchesNaiveScannerAndInvariants) {
  std::mt19937_64 rng{5};
  for (int trial = 0; trial < 50; ++trial) {
    const auto table = flipsense::oracle::random_table(rng, 12, 7, 0.25, 0.35);
    const auto ledger = flipsense::extract_flips(flipsense::oracle::table_to_history(table));
    const auto naive = flipsense::oracle::naive_flips(table);
    for (std::size_t k = 0; k < table.size(); ++k) {
      EXPECT_EQ(ledger.flipped_at[k], naive.flipped[k]);
      EXPECT_EQ(ledger.predictable_at[k], naive.predictable[k]);
      EXPECT_TRUE(std::includes(ledger.flipped_at[k].begin(), ledger.flipped_at[k].end(),
                                ledger.predictable_at[k].begin(), ledger.predictable_at[k].end()));
      EXPECT_TRUE(std::includes(ledger.universe.begin(), ledger.universe.end(), ledger.flipped_at[k].begin(),
                                ledger.flipped_at[k].end()));
    }
    ASSERT_EQ(ledger.events.size(), naive.events.size());
    for (std::size_t i = 0; i < naive.events.size(); ++i) {
      const auto& [seq, test, broken] = naive.events[i];
      EXPECT_EQ(ledger.events[i].seq, seq);
      EXPECT_EQ(ledger.events[i].test_id, test);
      EXPECT_EQ(ledger.events[i].direction == FlipDirection::broken, broken);
    }
  }
}

TEST(ExtractFlips, IndependentOfKeyOrderInsideRecords) {
  const auto a = ingest(
      R"({"build":"b0","changes":["y","x"],"results":{"t2":"pass","t1":"fail"}})"
      "\n"
      R"({"build":"b1","changes":["x"],"results":{"t1":"pass","t2":"fail"}})");
  const auto b = ingest(
      R"({"results":{"t1":"fail","t2":"pass"},"changes":["x","y"],"build":"b0"})"
      "\n"
      R"({"changes":["x"],"results":{"t2":"fail","t1":"pass"},"build":"b1"})");
  EXPECT_EQ(flipsense::extract_flips(a), flipsense::extract_flips(b));
}

TEST(PredictableStats, CountsQualifyingBuilds) {
  flipsense::FlipLedger ledger;
  ledger.flipped_at = {{}, {"a"}, {"a", "b"}};
  ledger.predictable_at = {{}, {"a"}, {"a", "b"}};
  const auto stats = flipsense::predictable_build_stats(ledger);
  EXPECT_EQ(stats.qualifying_builds, 2U);
  EXPECT_EQ(stats.at_most_5, 2U);
  EXPECT_EQ(stats.from_6_to_25, 0U);
  EXPECT_EQ(stats.above_25, 0U);
}

TEST(PredictableStats, EmptyLedger) {
  flipsense::FlipLedger ledger;
  ledger.flipped_at.resize(4);
  ledger.predictable_at.resize(4);
  const auto stats = flipsense::predictable_build_stats(ledger);
  EXPECT_EQ(stats.builds, 4U);
  EXPECT_EQ(stats.qualifying_builds, 0U);
}

// 132 of 176 builds with predictable tests; 41 with at most 5, 76 with more than 25.
TEST(PredictableStats, SkewedHistogram) {
  flipsense::FlipLedger ledger;
  ledger.predictable_at.resize(176);
  auto fill = [](TestSet& set, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      set.insert("tc" + std::to_string(i));
    }
  };
  std::size_t b = 1;
  for (std::size_t i = 0; i < 41; ++i) {
    fill(ledger.predictable_at[b++], 1 + i % 5);
  }
  for (std::size_t i = 0; i < 15; ++i) {
    fill(ledger.predictable_at[b++], 6 + i);
  }
  for (std::size_t i = 0; i < 76; ++i) {
    fill(ledger.predictable_at[b++], 26 + i);
  }
  ledger.flipped_at = ledger.predictable_at;
  const auto stats = flipsense::predictable_build_stats(ledger);
  EXPECT_EQ(stats.builds, 176U);
  EXPECT_EQ(stats.qualifying_builds, 132U);
  EXPECT_EQ(stats.at_most_5, 41U);
  EXPECT_EQ(stats.from_6_to_25, 15U);
  EXPECT_EQ(stats.above_25, 76U);
  EXPECT_EQ(100 * stats.at_most_5 / stats.qualifying_builds, 31U);
  EXPECT_EQ(100 * stats.above_25 / stats.qualifying_builds, 57U);  // 57.6%, reported rounded as 58%
}

}  // namespace
