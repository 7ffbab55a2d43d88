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

#ifndef FLIPSENSE_EVAL_HPP
#define FLIPSENSE_EVAL_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <flipsense/baselines.hpp>
#include <flipsense/history.hpp>
#include <flipsense/sensitivity.hpp>

namespace flipsense {

// Set metrics -----------------------------------------------------------------

/// |selected ∩ predictable| / |selected|. Throws UndefinedMetricError when selected is empty.
[[nodiscard]] double precision(const TestSet& selected, const TestSet& predictable);

/// |selected ∩ predictable| / |predictable|. Throws UndefinedMetricError when predictable is empty.
[[nodiscard]] double recall(const TestSet& selected, const TestSet& predictable);

/// Harmonic mean of precision and recall; 0 when both are 0.
[[nodiscard]] double f_measure(double precision, double recall) noexcept;

// Replay ----------------------------------------------------------------------

enum class Method {
  ema,      // EMA sensitivity prioritisation
  ekelund,  // cumulative co-occurrence counts, d = 1
  random,   // uniform selection, averaged over RandomPolicy::runs
};

[[nodiscard]] std::string_view to_string(Method method) noexcept;
[[nodiscard]] Method parse_method(std::string_view text);

struct MethodConfig {
  Method method = Method::ema;
  double alpha = 0.8;
  DMode d_mode = DMode::linear;  // ema only; ekelund is always constant
  ScoreMode score_mode = ScoreMode::sum;
  RandomPolicy random;
  double drop_threshold = kDefaultDropThreshold;

  /// Matrix settings implied by the method. Throws ConfigError for random.
  [[nodiscard]] MatrixConfig matrix_config() const;
  /// Column label used in figure tables.
  [[nodiscard]] std::string label() const;
};

/// Metrics for one evaluated build. For the random method every field is the
/// mean over the policy's runs; otherwise intersection is an integer and
/// zero_fraction is 0 or 1.
struct BuildMetrics {
  std::size_t seq = 0;
  std::size_t selected = 0;
  std::size_t predictable = 0;
  double intersection = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double zero_fraction = 0.0;  // share of selections disjoint from the predictable set

  friend bool operator==(const BuildMetrics&, const BuildMetrics&) = default;
};

struct Aggregates {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;  // mean of per-build F, not F of the means
  double zero_pct = 0.0;   // fraction in [0,1]

  friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

struct EvalReport {
  MethodConfig config;
  std::string label;
  std::size_t n = 0;
  std::vector<BuildMetrics> per_build;
  std::optional<Aggregates> aggregates;  // absent when no build was evaluated

  [[nodiscard]] std::size_t evaluated_builds() const noexcept { return per_build.size(); }
  /// Sum of zero fractions; an exact integer count for deterministic methods.
  [[nodiscard]] double zero_builds() const noexcept;
};

/// Replays the history once for each selection size. Selection at build k
/// uses only the matrix state after build k-1; metrics are recorded for builds
/// with a non-empty predictable set. Sizes must be non-zero.
[[nodiscard]] std::vector<EvalReport> replay_sizes(const History& history, const FlipLedger& ledger,
                                                   const MethodConfig& config,
                                                   std::span<const std::size_t> sizes);

[[nodiscard]] EvalReport replay(const History& history, const FlipLedger& ledger, const MethodConfig& config,
                                std::size_t n);

[[nodiscard]] nlohmann::ordered_json to_json(const EvalReport& report);

// Alpha sweep -----------------------------------------------------------------

struct SweepRow {
  double alpha = 0.0;
  std::size_t zero_builds = 0;  // summed over the selection sizes
  double mean_zero_pct = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f_measure = 0.0;
};

struct SweepResult {
  double best_alpha = 0.0;
  std::vector<SweepRow> table;  // one row per grid point, in grid order
};

/// Evenly spaced grid lo, lo+step, ..., up to hi inclusive.
[[nodiscard]] std::vector<double> alpha_grid(double lo, double hi, double step);

/// Default grid 0.00..1.00 in steps of 0.01.
[[nodiscard]] std::vector<double> default_alpha_grid();

/// Picks the alpha with the fewest zero-intersection builds summed over
/// `sizes`; ties go to the smaller alpha. `base` supplies d and score modes.
/// Grid points are evaluated on up to `threads` workers (0 = hardware
/// concurrency); the result does not depend on the thread count.
[[nodiscard]] SweepResult sweep_alpha(const History& history, const FlipLedger& ledger,
                                      std::span<const double> grid, std::span<const std::size_t> sizes,
                                      const MethodConfig& base = {}, unsigned threads = 0);

void write_sweep_csv(std::ostream& out, const SweepResult& result);

// Figure tables ---------------------------------------------------------------

enum class Metric { zero_pct, precision, recall, f_measure };

[[nodiscard]] std::string_view to_string(Metric metric) noexcept;
[[nodiscard]] double metric_value(const Aggregates& aggregates, Metric metric) noexcept;

struct FigureTable {
  Metric metric = Metric::recall;
  std::vector<std::size_t> sizes;
  std::vector<std::string> labels;
  std::vector<std::vector<std::optional<double>>> values;  // [size][label]
};

/// Reshapes reports into one table per metric. Every label must cover the
/// same set of selection sizes exactly once; otherwise ValidationError.
[[nodiscard]] std::vector<FigureTable> figure_data(const std::vector<EvalReport>& reports);

void write_figure_csv(std::ostream& out, const FigureTable& table);

struct Improvement {
  double min_relative = 0.0;
  double max_relative = 0.0;
  double avg_relative = 0.0;
  double min_absolute = 0.0;
  double max_absolute = 0.0;
  double avg_absolute = 0.0;
  /// Relative change between the means over sizes.
  double of_averages_relative = 0.0;
};

/// Relative (candidate/reference - 1) and absolute deltas per selection
/// size, summarised across sizes. Both sides must cover the same sizes.
[[nodiscard]] Improvement improvement(const std::vector<EvalReport>& candidate,
                                      const std::vector<EvalReport>& reference, Metric metric);

}  // namespace flipsense

#endif  // FLIPSENSE_EVAL_HPP
