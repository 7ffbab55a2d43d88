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

// flipsense command-line tool.
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 validation or usage error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <flipsense/baselines.hpp>
#include <flipsense/csv.hpp>
#include <flipsense/error.hpp>
#include <flipsense/eval.hpp>
#include <flipsense/history.hpp>
#include <flipsense/schedule.hpp>
#include <flipsense/sensitivity.hpp>
#include <flipsense/synth.hpp>

namespace fs = flipsense;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

enum class Format { human, machine };

struct Globals {
  std::string format = "human";
  std::uint64_t seed = 0;
  std::string out_dir;

  [[nodiscard]] Format fmt() const { return format == "machine" ? Format::machine : Format::human; }
};

std::optional<std::string> env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') {
    return std::nullopt;
  }
  return std::string{value};
}

fs::History read_history(const std::string& path) {
  if (path == "-") {
    return fs::ingest_history(std::cin);
  }
  return fs::load_history(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out{path};
  if (!out) {
    throw fs::IoError("cannot write " + path);
  }
  return out;
}

std::string in_dir(const std::string& dir, const std::string& name) {
  if (dir.empty()) {
    return name;
  }
  std::filesystem::create_directories(dir);
  return (std::filesystem::path{dir} / name).string();
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  try {
    if (const auto dots = text.find(".."); dots != std::string::npos) {
      const auto lo = std::stoull(text.substr(0, dots));
      const auto hi = std::stoull(text.substr(dots + 2));
      if (lo < 1 || lo > hi) {
        throw fs::ArgumentError("selection range needs 1 <= lo <= hi: " + text);
      }
      for (auto n = lo; n <= hi; ++n) {
        sizes.push_back(n);
      }
      return sizes;
    }
    std::stringstream in{text};
    std::string item;
    while (std::getline(in, item, ',')) {
      std::size_t used = 0;
      const auto n = std::stoull(item, &used);
      if (used != item.size() || n == 0) {
        throw fs::ArgumentError("bad selection size: " + item);
      }
      sizes.push_back(n);
    }
  } catch (const std::logic_error&) {
    throw fs::ArgumentError("bad selection sizes: " + text);
  }
  if (sizes.empty()) {
    throw fs::ArgumentError("no selection sizes given");
  }
  return sizes;
}

std::vector<double> parse_grid(const std::string& text) {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  char c1 = 0;
  char c2 = 0;
  std::istringstream in{text};
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw fs::ArgumentError("grid must look like lo:hi:step, got " + text);
  }
  return fs::alpha_grid(lo, hi, step);
}

fs::FileSet read_change_set(const std::string& path, const std::vector<std::string>& inline_files) {
  fs::FileSet files{inline_files.begin(), inline_files.end()};
  if (!path.empty()) {
    std::ifstream in{path};
    if (!in) {
      throw fs::IoError("cannot open " + path);
    }
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      if (!line.empty()) {
        files.insert(line);
      }
    }
  }
  return files;
}

/// Replays a whole history into a matrix: the state a CI job would hold after
/// the last build.
fs::SensitivityMatrix build_matrix(const fs::History& history, const fs::FlipLedger& ledger,
                                   const fs::MatrixConfig& config) {
  fs::SensitivityMatrix matrix{config};
  for (const auto& test : ledger.universe) {
    matrix.register_test(test);
  }
  for (const auto& build : history) {
    matrix.advance(fs::build_delta(build.changed_files, ledger.flipped_at[build.seq], config.d_mode));
  }
  return matrix;
}

nlohmann::ordered_json scores_json(const std::vector<fs::TestId>& ranked, const fs::ScoreVector& scores) {
  auto doc = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    doc.push_back({{"rank", i + 1}, {"test", ranked[i]}, {"score", scores.score(ranked[i])}});
  }
  return doc;
}

// ---------------------------------------------------------------------------

struct MatrixFlags {
  std::string method = "ema";
  double alpha = 0.8;
  std::string d_mode = "linear";
  std::string score_mode = "sum";

  void add(CLI::App* cmd) {
    cmd->add_option("--method", method, "ema or ekelund")->capture_default_str();
    cmd->add_option("--alpha", alpha, "EMA smoothing factor in [0,1]")->capture_default_str();
    cmd->add_option("--d-mode", d_mode, "delta normaliser: linear or constant")->capture_default_str();
    cmd->add_option("--score-mode", score_mode, "column reduction: sum or max")->capture_default_str();
  }

  [[nodiscard]] fs::MatrixConfig matrix_config() const {
    fs::MethodConfig config;
    config.method = fs::parse_method(method);
    config.alpha = alpha;
    config.d_mode = fs::parse_d_mode(d_mode);
    return config.matrix_config();
  }
};

int cmd_ingest(const Globals& g, const std::string& input) {
  const auto history = read_history(input);
  const auto summary = fs::summarize(history);
  const auto ledger = fs::extract_flips(history);
  const auto stats = fs::predictable_build_stats(ledger);
  if (g.fmt() == Format::machine) {
    nlohmann::ordered_json doc;
    doc["builds"] = summary.builds;
    doc["distinct_files"] = summary.distinct_files;
    doc["distinct_tests"] = summary.distinct_tests;
    doc["flips"] = ledger.events.size();
    doc["predictable"] = {{"qualifying_builds", stats.qualifying_builds},
                          {"at_most_5", stats.at_most_5},
                          {"from_6_to_25", stats.from_6_to_25},
                          {"above_25", stats.above_25}};
    std::cout << doc.dump() << '\n';
  } else {
    std::cout << "builds:         " << summary.builds << '\n'
              << "distinct files: " << summary.distinct_files << '\n'
              << "distinct tests: " << summary.distinct_tests << '\n'
              << "flip events:    " << ledger.events.size() << '\n'
              << "builds with predictable tests: " << stats.qualifying_builds << '\n'
              << "  <= 5:   " << stats.at_most_5 << '\n'
              << "  6..25:  " << stats.from_6_to_25 << '\n'
              << "  > 25:   " << stats.above_25 << '\n';
  }
  return 0;
}

struct PrioritiseArgs {
  std::string history;
  std::string snapshot;
  std::string save_snapshot;
  std::string changes;
  std::vector<std::string> files;
  std::size_t n = 10;
  bool show_scores = false;
  MatrixFlags matrix;
};

int cmd_prioritise(const Globals& g, const PrioritiseArgs& a) {
  if (a.history.empty() == a.snapshot.empty()) {
    throw fs::ArgumentError("give exactly one of --history or --snapshot");
  }
  if (a.changes.empty() && a.files.empty()) {
    throw fs::ArgumentError("give the change set with --changes or --file");
  }
  std::optional<fs::SensitivityMatrix> matrix;
  fs::TestSet universe;
  if (!a.history.empty()) {
    const auto history = read_history(a.history);
    const auto ledger = fs::extract_flips(history);
    matrix.emplace(build_matrix(history, ledger, a.matrix.matrix_config()));
    universe = ledger.universe;
  } else {
    std::ifstream in{a.snapshot};
    if (!in) {
      throw fs::IoError("cannot open " + a.snapshot);
    }
    matrix.emplace(fs::read_snapshot(in));
    const auto tests = matrix->tests();
    universe.insert(tests.begin(), tests.end());
  }
  if (!a.save_snapshot.empty()) {
    auto out = open_out(a.save_snapshot);
    fs::write_snapshot(out, *matrix);
  }
  const auto changed = read_change_set(a.changes, a.files);
  const auto scores = matrix->slice_scores(changed, fs::parse_score_mode(a.matrix.score_mode));
  const auto ranked = fs::select_top_n(scores, a.n, universe);
  if (g.fmt() == Format::machine) {
    std::cout << scores_json(ranked, scores).dump() << '\n';
    return 0;
  }
  for (const auto& test : ranked) {
    std::cout << test;
    if (a.show_scores) {
      std::cout << '\t' << fs::format_significant(scores.score(test));
    }
    std::cout << '\n';
  }
  return 0;
}

struct ReplayArgs {
  std::string input;
  std::vector<std::string> methods;
  double alpha = 0.8;
  std::string d_mode = "linear";
  std::string score_mode = "sum";
  std::string select = "5..25";
  std::size_t runs = 100;
};

int cmd_replay(const Globals& g, const ReplayArgs& a) {
  const auto history = read_history(a.input);
  const auto ledger = fs::extract_flips(history);
  const auto sizes = parse_sizes(a.select);
  std::vector<std::string> methods = a.methods.empty() ? std::vector<std::string>{"ema"} : a.methods;

  std::vector<fs::EvalReport> reports;
  for (const auto& name : methods) {
    fs::MethodConfig config;
    config.method = fs::parse_method(name);
    config.alpha = a.alpha;
    config.d_mode = fs::parse_d_mode(a.d_mode);
    config.score_mode = fs::parse_score_mode(a.score_mode);
    config.random = {g.seed, a.runs};
    for (auto& report : fs::replay_sizes(history, ledger, config, sizes)) {
      reports.push_back(std::move(report));
    }
  }
  const auto tables = fs::figure_data(reports);

  if (!g.out_dir.empty()) {
    for (const auto& table : tables) {
      auto out = open_out(in_dir(g.out_dir, "figure_" + std::string{fs::to_string(table.metric)} + ".csv"));
      fs::write_figure_csv(out, table);
    }
  }

  if (g.fmt() == Format::machine) {
    nlohmann::ordered_json doc;
    doc["reports"] = nlohmann::ordered_json::array();
    for (const auto& report : reports) {
      doc["reports"].push_back(fs::to_json(report));
    }
    std::cout << doc.dump() << '\n';
    return 0;
  }
  for (const auto& table : tables) {
    std::cout << "# " << fs::to_string(table.metric) << '\n';
    fs::write_figure_csv(std::cout, table);
    std::cout << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::string input;
  std::string grid = "0:1:0.01";
  std::string select = "5..25";
  std::string d_mode = "linear";
  std::string score_mode = "sum";
  unsigned threads = 0;
};

int cmd_sweep(const Globals& g, const SweepArgs& a) {
  const auto history = read_history(a.input);
  const auto ledger = fs::extract_flips(history);
  const auto grid = parse_grid(a.grid);
  const auto sizes = parse_sizes(a.select);
  fs::MethodConfig base;
  base.d_mode = fs::parse_d_mode(a.d_mode);
  base.score_mode = fs::parse_score_mode(a.score_mode);
  const auto result = fs::sweep_alpha(history, ledger, grid, sizes, base, a.threads);

  if (!g.out_dir.empty()) {
    auto out = open_out(in_dir(g.out_dir, "sweep.csv"));
    fs::write_sweep_csv(out, result);
  }
  if (g.fmt() == Format::machine) {
    nlohmann::ordered_json doc;
    doc["best_alpha"] = result.best_alpha;
    doc["table"] = nlohmann::ordered_json::array();
    for (const auto& row : result.table) {
      doc["table"].push_back({{"alpha", row.alpha},
                              {"zero_builds", row.zero_builds},
                              {"mean_zero_pct", row.mean_zero_pct},
                              {"mean_precision", row.mean_precision},
                              {"mean_recall", row.mean_recall},
                              {"mean_f_measure", row.mean_f_measure}});
    }
    std::cout << doc.dump() << '\n';
    return 0;
  }
  std::cout << "best alpha: " << fs::format_significant(result.best_alpha) << "\n\n";
  fs::write_sweep_csv(std::cout, result);
  return 0;
}

struct HeatmapArgs {
  std::string input;
  std::string snapshot;
  std::string heatmap = "heatmap.csv";
  std::string flakiness = "flakiness.csv";
  std::size_t top = 10;
  MatrixFlags matrix;
};

int cmd_heatmap(const Globals& g, const HeatmapArgs& a) {
  std::optional<fs::SensitivityMatrix> matrix;
  if (!a.snapshot.empty()) {
    std::ifstream in{a.snapshot};
    if (!in) {
      throw fs::IoError("cannot open " + a.snapshot);
    }
    matrix.emplace(fs::read_snapshot(in));
  } else if (!a.input.empty()) {
    const auto history = read_history(a.input);
    matrix.emplace(build_matrix(history, fs::extract_flips(history), a.matrix.matrix_config()));
  } else {
    throw fs::ArgumentError("give a history or --snapshot");
  }
  const auto heat_path = in_dir(g.out_dir, a.heatmap);
  const auto flaky_path = in_dir(g.out_dir, a.flakiness);
  fs::export_heatmap(*matrix, heat_path, flaky_path);

  const auto index = fs::flakiness_index(*matrix);
  if (g.fmt() == Format::machine) {
    nlohmann::ordered_json doc;
    doc["heatmap"] = heat_path;
    doc["flakiness"] = flaky_path;
    doc["files"] = matrix->file_count();
    doc["tests"] = matrix->test_count();
    doc["nonzeros"] = matrix->nonzeros();
    std::cout << doc.dump() << '\n';
    return 0;
  }
  std::cout << "wrote " << heat_path << " and " << flaky_path << '\n';
  std::cout << "most broadly sensitive tests:\n";
  for (std::size_t i = 0; i < index.size() && i < a.top; ++i) {
    std::cout << "  " << index[i].test << "  fraction=" << fs::format_significant(index[i].fraction)
              << "  mean=" << fs::format_significant(index[i].mean_magnitude) << '\n';
  }
  return 0;
}

// --- schedule ---------------------------------------------------------------

fs::ScheduleState load_state(const std::string& path) {
  std::ifstream in{path};
  if (!in) {
    throw fs::IoError("cannot open " + path);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fs::ParseError(1, e.what());
  }
  return fs::schedule_state_from_json(doc);
}

void save_state(const std::string& path, const fs::ScheduleState& state) {
  auto out = open_out(path);
  out << fs::to_json(state).dump(2) << '\n';
}

void print_list(const Globals& g, const std::vector<fs::TestId>& tests) {
  if (g.fmt() == Format::machine) {
    std::cout << nlohmann::ordered_json(tests).dump() << '\n';
    return;
  }
  for (const auto& test : tests) {
    std::cout << test << '\n';
  }
}

struct ScheduleArgs {
  std::string state = "schedule.json";
  std::string history;
  std::string rule = "never-flipped";
  std::size_t budget = 1;
  std::string strategy = "cost-min";
  std::uint64_t window = 7;
  std::vector<std::string> executed;
  std::string changes;
  std::vector<std::string> files;
  std::size_t k = 10;
  double weight = 0.5;
  MatrixFlags matrix;
};

int cmd_schedule_init(const Globals& g, const ScheduleArgs& a) {
  const auto history = read_history(a.history);
  fs::StableRule rule = fs::StableRule::never_flipped;
  if (a.rule == "always-passed") {
    rule = fs::StableRule::always_passed;
  } else if (a.rule != "never-flipped") {
    throw fs::ArgumentError("unknown stable rule: " + a.rule);
  }
  const auto state = fs::make_schedule_state(history, fs::extract_flips(history), rule);
  save_state(a.state, state);
  std::size_t stable = 0;
  for (const auto& [test, entry] : state.tests) {
    stable += entry.stable ? 1 : 0;
  }
  if (g.fmt() == Format::machine) {
    std::cout << nlohmann::ordered_json{{"tests", state.tests.size()}, {"stable", stable}}.dump() << '\n';
  } else {
    std::cout << state.tests.size() << " tests, " << stable << " stable\n";
  }
  return 0;
}

int cmd_schedule_select(const Globals& g, const ScheduleArgs& a) {
  const auto state = load_state(a.state);
  fs::StableStrategy strategy;
  if (a.strategy == "round-robin") {
    strategy = fs::StableStrategy::round_robin(a.window);
  } else if (a.strategy != "cost-min") {
    throw fs::ArgumentError("unknown strategy: " + a.strategy);
  }
  print_list(g, fs::select_stable(state, a.budget, strategy));
  return 0;
}

int cmd_schedule_tick(const Globals& g, const ScheduleArgs& a) {
  auto state = load_state(a.state);
  fs::day_tick(state, fs::TestSet{a.executed.begin(), a.executed.end()});
  save_state(a.state, state);
  if (g.fmt() == Format::machine) {
    std::cout << nlohmann::ordered_json{{"cost", fs::cost(state)}}.dump() << '\n';
  } else {
    std::cout << "cost: " << fs::cost(state) << '\n';
  }
  return 0;
}

int cmd_schedule_cost(const Globals& g, const ScheduleArgs& a) {
  const auto state = load_state(a.state);
  if (g.fmt() == Format::machine) {
    std::cout << nlohmann::ordered_json{{"cost", fs::cost(state)}}.dump() << '\n';
  } else {
    std::cout << fs::cost(state) << '\n';
  }
  return 0;
}

int cmd_schedule_office(const Globals& g, const ScheduleArgs& a) {
  if (a.history.empty()) {
    throw fs::ArgumentError("office needs --history");
  }
  if (a.changes.empty() && a.files.empty()) {
    throw fs::ArgumentError("give the change set with --changes or --file");
  }
  const auto history = read_history(a.history);
  const auto ledger = fs::extract_flips(history);
  const auto matrix = build_matrix(history, ledger, a.matrix.matrix_config());
  auto state = load_state(a.state);
  const auto hbtp = fs::hbtp_scores(history, ledger, history.size());
  const auto ranked =
      fs::office_hours_tick(matrix, state.pending, read_change_set(a.changes, a.files), hbtp, a.k, a.weight,
                            ledger.universe, fs::parse_score_mode(a.matrix.score_mode));
  save_state(a.state, state);
  print_list(g, ranked);
  return 0;
}

// --- synth ------------------------------------------------------------------

struct SynthArgs {
  fs::SynthConfig config;
  std::string output = "-";
  std::string truth;
};

int cmd_synth(const Globals& g, SynthArgs a) {
  a.config.seed = g.seed;
  const auto synth = fs::generate(a.config);
  if (a.output == "-") {
    fs::write_history(std::cout, synth.history);
  } else {
    auto out = open_out(in_dir(g.out_dir, a.output));
    fs::write_history(out, synth.history);
  }
  if (!a.truth.empty()) {
    auto out = open_out(in_dir(g.out_dir, a.truth));
    out << fs::ground_truth_json(synth).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flipsense: change-based regression test prioritisation"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  Globals g;
  if (const auto seed = env("FLIPSENSE_SEED")) {
    try {
      g.seed = std::stoull(*seed);
    } catch (const std::logic_error&) {
      std::cerr << "error: FLIPSENSE_SEED is not an unsigned integer\n";
      return kExitUsage;
    }
  }
  if (const auto dir = env("FLIPSENSE_OUT_DIR")) {
    g.out_dir = *dir;
  }
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"human", "machine"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "seed for every random choice (env FLIPSENSE_SEED)")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for report files (env FLIPSENSE_OUT_DIR)");

  std::string ingest_input;
  auto* ingest = app.add_subcommand("ingest", "validate a history file and print statistics");
  ingest->add_option("input", ingest_input, "history file, - for stdin")->required();

  PrioritiseArgs pri;
  auto* prioritise = app.add_subcommand("prioritise", "rank tests for a change set");
  prioritise->alias("prioritize");
  prioritise->add_option("--history", pri.history, "history to replay into a matrix");
  prioritise->add_option("--snapshot", pri.snapshot, "saved matrix snapshot");
  prioritise->add_option("--save-snapshot", pri.save_snapshot, "write the matrix used");
  prioritise->add_option("--changes", pri.changes, "file listing changed paths, one per line");
  prioritise->add_option("--file", pri.files, "changed path (repeatable)");
  prioritise->add_option("-n", pri.n, "number of tests to select")->capture_default_str();
  prioritise->add_flag("--scores", pri.show_scores, "print a score column");
  pri.matrix.add(prioritise);

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "replay a history and report selection quality");
  replay->add_option("input", rep.input, "history file, - for stdin")->required();
  replay->add_option("--method", rep.methods, "ema, ekelund or random (repeatable)");
  replay->add_option("--alpha", rep.alpha)->capture_default_str();
  replay->add_option("--d-mode", rep.d_mode)->capture_default_str();
  replay->add_option("--score-mode", rep.score_mode)->capture_default_str();
  replay->add_option("--select", rep.select, "sizes: lo..hi or a,b,c")->capture_default_str();
  replay->add_option("--runs", rep.runs, "random baseline repetitions")->capture_default_str();

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep-alpha", "choose alpha by minimising zero-result builds");
  sweep->add_option("input", sw.input, "history file, - for stdin")->required();
  sweep->add_option("--grid", sw.grid, "lo:hi:step")->capture_default_str();
  sweep->add_option("--select", sw.select)->capture_default_str();
  sweep->add_option("--d-mode", sw.d_mode)->capture_default_str();
  sweep->add_option("--score-mode", sw.score_mode)->capture_default_str();
  sweep->add_option("--threads", sw.threads, "0 = hardware concurrency")->capture_default_str();

  HeatmapArgs hm;
  auto* heatmap = app.add_subcommand("heatmap", "export the matrix as a heat map and flakiness index");
  heatmap->add_option("input", hm.input, "history file, - for stdin");
  heatmap->add_option("--snapshot", hm.snapshot);
  heatmap->add_option("--heatmap", hm.heatmap)->capture_default_str();
  heatmap->add_option("--flakiness", hm.flakiness)->capture_default_str();
  heatmap->add_option("--top", hm.top)->capture_default_str();
  hm.matrix.add(heatmap);

  ScheduleArgs sa;
  auto* schedule = app.add_subcommand("schedule", "stable-test scheduling");
  schedule->require_subcommand(1);
  auto* s_init = schedule->add_subcommand("init", "create a state file from a history");
  s_init->add_option("--history", sa.history)->required();
  s_init->add_option("--rule", sa.rule, "never-flipped or always-passed")->capture_default_str();
  auto* s_select = schedule->add_subcommand("select", "pick stable tests for today");
  s_select->add_option("--budget", sa.budget)->capture_default_str();
  s_select->add_option("--strategy", sa.strategy, "cost-min or round-robin")->capture_default_str();
  s_select->add_option("--window", sa.window, "round robin window in days")->capture_default_str();
  auto* s_tick = schedule->add_subcommand("tick", "advance one day");
  s_tick->add_option("--executed", sa.executed, "tests run today (repeatable)");
  auto* s_cost = schedule->add_subcommand("cost", "print the staleness cost");
  auto* s_office = schedule->add_subcommand("office", "office-hours selection for a change set");
  s_office->add_option("--history", sa.history)->required();
  s_office->add_option("--changes", sa.changes);
  s_office->add_option("--file", sa.files);
  s_office->add_option("-k", sa.k)->capture_default_str();
  s_office->add_option("--weight", sa.weight, "share of sensitivity vs failure history")->capture_default_str();
  sa.matrix.add(s_office);
  for (auto* sub : {s_init, s_select, s_tick, s_cost, s_office}) {
    sub->add_option("--state", sa.state)->capture_default_str();
  }

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "generate a synthetic history");
  synth->add_option("--builds", sy.config.n_builds)->capture_default_str();
  synth->add_option("--files", sy.config.n_files)->capture_default_str();
  synth->add_option("--tests", sy.config.n_tests)->capture_default_str();
  synth->add_option("--deps-min", sy.config.deps_per_test.lo)->capture_default_str();
  synth->add_option("--deps-max", sy.config.deps_per_test.hi)->capture_default_str();
  synth->add_option("--change-min", sy.config.change_set_size.lo)->capture_default_str();
  synth->add_option("--change-max", sy.config.change_set_size.hi)->capture_default_str();
  synth->add_option("--p-hit", sy.config.flip_probability_hit)->capture_default_str();
  synth->add_option("--p-noise", sy.config.flip_probability_noise)->capture_default_str();
  synth->add_option("--initial-fail", sy.config.initial_fail_fraction)->capture_default_str();
  synth->add_option("-o,--output", sy.output, "history destination, - for stdout")->capture_default_str();
  synth->add_option("--truth", sy.truth, "write planted dependencies here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  try {
    if (*ingest) return cmd_ingest(g, ingest_input);
    if (*prioritise) return cmd_prioritise(g, pri);
    if (*replay) return cmd_replay(g, rep);
    if (*sweep) return cmd_sweep(g, sw);
    if (*heatmap) return cmd_heatmap(g, hm);
    if (*s_init) return cmd_schedule_init(g, sa);
    if (*s_select) return cmd_schedule_select(g, sa);
    if (*s_tick) return cmd_schedule_tick(g, sa);
    if (*s_cost) return cmd_schedule_cost(g, sa);
    if (*s_office) return cmd_schedule_office(g, sa);
    if (*synth) return cmd_synth(g, sy);
  } catch (const fs::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const fs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
