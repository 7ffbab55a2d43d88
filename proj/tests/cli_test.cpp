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

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <flipsense/sensitivity.hpp>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the tool through the shell; stderr is folded into the captured output.
Result run(const std::string& args, const std::string& env = "") {
  const std::string command = env + " '" FLIPSENSE_CLI "' " + args + " 2>&1";
  Result result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) {
    return result;
  }
  std::array<char, 4096> buffer{};
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.out.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path{::testing::TempDir()} /
           ("flipsense_cli_" + std::string{::testing::UnitTest::GetInstance()->current_test_info()->name()});
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream{path(name)} << text;
    return path(name);
  }

  std::string synth(const std::string& name = "history.jsonl") const {
    const auto r = run("--seed 1 synth -o '" + path(name) + "'");
    EXPECT_EQ(r.code, 0) << r.out;
    return path(name);
  }

  fs::path dir_;
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in{text};
  for (std::string line; std::getline(in, line);) {
    out.push_back(line);
  }
  return out;
}

TEST_F(Cli, IngestValidFile) {
  const auto r = run("ingest '" + synth() + "'");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("builds:         50"), std::string::npos) << r.out;
}

TEST_F(Cli, IngestMachineFormat) {
  const auto r = run("--format machine ingest '" + synth() + "'");
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc.at("builds"), 50);
  EXPECT_EQ(doc.at("distinct_tests"), 100);
}

TEST_F(Cli, IngestNamesMalformedLine) {
  std::string text;
  for (int i = 0; i < 6; ++i) {
    text += R"({"build":"b)" + std::to_string(i) + R"(","changes":["f"],"results":{"t":"pass"}})" + "\n";
  }
  text += "{\"build\":\"b6\",\"changes\":[\"f\"]}\n";
  const auto r = run("ingest '" + write("bad.jsonl", text) + "'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 7"), std::string::npos) << r.out;
}

TEST_F(Cli, IngestEmptyFileIsValidationError) {
  EXPECT_EQ(run("ingest '" + write("empty.jsonl", "") + "'").code, 2);
}

TEST_F(Cli, MissingFileIsRuntimeError) {
  EXPECT_EQ(run("ingest '" + path("absent.jsonl") + "'").code, 1);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("--format xml ingest x").code, 2);
  EXPECT_EQ(run("prioritise -n 5").code, 2);
  EXPECT_EQ(run("replay '" + synth() + "' --select 0..3").code, 2);
  EXPECT_EQ(run("sweep-alpha '" + synth() + "' --grid 0:1").code, 2);
}

TEST_F(Cli, PrioritiseReturnsRequestedCount) {
  const auto r = run("prioritise --history '" + synth() + "' --file mod01/f0001.c -n 5");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(r.out).size(), 5U);
}

TEST_F(Cli, PrioritiseScoreModesOnWorkedExample) {
  flipsense::SensitivityMatrix matrix{flipsense::ema_config(0.8)};
  matrix.set("f1", "t1", 0.4);
  matrix.set("f2", "t1", 0.1);
  matrix.set("f2", "t2", 0.3);
  std::ofstream out{path("matrix.jsonl")};
  flipsense::write_snapshot(out, matrix);
  out.close();
  for (const auto* mode : {"sum", "max"}) {
    const auto r = run("prioritise --snapshot '" + path("matrix.jsonl") + "' --file f1 --file f2 -n 2 --score-mode " +
                       mode);
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(r.out), (std::vector<std::string>{"t1", "t2"})) << mode;
  }
}

TEST_F(Cli, PrioritiseUnknownFilesPadsById) {
  const auto history = synth();
  const auto changes = write("changes.txt", "nowhere/1.c\nnowhere/2.c\n");
  const auto r = run("prioritise --history '" + history + "' --changes '" + changes + "' -n 5 --scores");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto got = lines(r.out);
  ASSERT_EQ(got.size(), 5U);
  for (const auto& line : got) {
    EXPECT_EQ(line.substr(line.find('\t') + 1), "0");
  }
  EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
}

TEST_F(Cli, SnapshotReuseGivesSameRanking) {
  const auto history = synth();
  const auto a = run("prioritise --history '" + history + "' --save-snapshot '" + path("m.jsonl") +
                     "' --file mod03/f0003.c -n 8 --scores");
  const auto b = run("prioritise --snapshot '" + path("m.jsonl") + "' --file mod03/f0003.c -n 8 --scores");
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, SynthPipesIntoReplay) {
  const auto r = run("synth --seed 1 | '" FLIPSENSE_CLI "' replay - --method ema --alpha 0.8 --select 5..25");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("# recall"), std::string::npos);
  EXPECT_NE(r.out.find("\n25,"), std::string::npos);
}

TEST_F(Cli, ReplayWritesFigureTables) {
  const auto history = synth();
  const auto r = run("--format machine replay '" + history + "' --method ema --method random --runs 5 --select 5,10",
                     "FLIPSENSE_OUT_DIR='" + path("out") + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("reports").size(), 4U);
  for (const auto* metric : {"zero_pct", "precision", "recall", "f_measure"}) {
    std::ifstream in{path("out/figure_" + std::string{metric} + ".csv")};
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "n,ema,random") << metric;
  }
}

TEST_F(Cli, MachineOutputIsRepeatable) {
  const auto history = synth();
  const std::string args = "--format machine replay '" + history + "' --method random --runs 3 --select 5";
  const auto a = run(args, "FLIPSENSE_SEED=4");
  const auto b = run(args, "FLIPSENSE_SEED=4");
  const auto c = run(args, "FLIPSENSE_SEED=5");
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST_F(Cli, SweepReportsBestAlpha) {
  const auto r = run("--format machine sweep-alpha '" + synth() + "' --grid 0:1:0.5 --select 5..6");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc.at("table").size(), 3U);
  EXPECT_GT(doc.at("best_alpha").get<double>(), 0.0);
}

TEST_F(Cli, HeatmapExportsBothFiles) {
  const auto r = run("heatmap '" + synth() + "'", "FLIPSENSE_OUT_DIR='" + path("maps") + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(path("maps/heatmap.csv")));
  std::ifstream in{path("maps/flakiness.csv")};
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "test_id,fraction,mean_magnitude");
}

TEST_F(Cli, ScheduleLifecycle) {
  const auto history = synth();
  const auto state = "--state '" + path("state.json") + "'";
  ASSERT_EQ(run("schedule init --history '" + history + "' " + state).code, 0);
  EXPECT_EQ(run("schedule cost " + state).out, "0\n");
  const auto picked = run("schedule select --budget 3 " + state);
  ASSERT_EQ(picked.code, 0) << picked.out;
  const auto tests = lines(picked.out);
  ASSERT_FALSE(tests.empty());
  ASSERT_LE(tests.size(), 3U);
  std::string executed;
  for (const auto& t : tests) {
    executed += " --executed " + t;
  }
  ASSERT_EQ(run("schedule tick " + state + executed).code, 0);
  const auto doc = nlohmann::json::parse(std::ifstream{path("state.json")});
  std::size_t total = doc.at("tests").size();
  EXPECT_EQ(run("schedule cost " + state).out, std::to_string(total - tests.size()) + "\n");
  const auto office = run("schedule office --history '" + history + "' " + state + " --file mod01/f0001.c -k 4");
  ASSERT_EQ(office.code, 0) << office.out;
  EXPECT_EQ(lines(office.out).size(), 4U);
}

TEST_F(Cli, SynthWritesGroundTruth) {
  const auto r = run("synth --seed 2 --tests 5 --builds 4 -o '" + path("h.jsonl") + "' --truth '" + path("t.json") + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(nlohmann::json::parse(std::ifstream{path("t.json")}).size(), 5U);
  EXPECT_EQ(run("synth --p-hit 2").code, 2);
}

}  // namespace
