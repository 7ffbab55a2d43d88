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

#include <flipsense/eval.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

#include <flipsense/csv.hpp>
#include <flipsense/error.hpp>

namespace flipsense {

namespace {

std::size_t intersection_size(const TestSet& lhs, const TestSet& rhs) {
  std::size_t count = 0;
  auto l = lhs.begin();
  auto r = rhs.begin();
  while (l != lhs.end() && r != rhs.end()) {
    if (*l < *r) {
      ++l;
    } else if (*r < *l) {
      ++r;
    } else {
      ++count;
      ++l;
      ++r;
    }
  }
  return count;
}

// Running intersection counts of the prefixes of `ranked` at each size.
std::vector<std::size_t> prefix_hits(const std::vector<TestId>& ranked, const TestSet& predictable,
                                     std::span<const std::size_t> sizes) {
  std::vector<std::size_t> running(ranked.size() + 1, 0);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    running[i + 1] = running[i] + (predictable.contains(ranked[i]) ? 1 : 0);
  }
  std::vector<std::size_t> hits;
  hits.reserve(sizes.size());
  for (const auto n : sizes) {
    hits.push_back(running[std::min(n, ranked.size())]);
  }
  return hits;
}

void finalise(EvalReport& report) {
  if (report.per_build.empty()) {
    report.aggregates.reset();
    return;
  }
  Aggregates sum;
  for (const auto& row : report.per_build) {
    sum.precision += row.precision;
    sum.recall += row.recall;
    sum.f_measure += row.f_measure;
    sum.zero_pct += row.zero_fraction;
  }
  const auto count = static_cast<double>(report.per_build.size());
  report.aggregates = Aggregates{sum.precision / count, sum.recall / count, sum.f_measure / count,
                                 sum.zero_pct / count};
}

double rounded(double value) { return std::round(value * 1e12) / 1e12; }

}  // namespace

double precision(const TestSet& selected, const TestSet& predictable) {
  if (selected.empty()) {
    throw UndefinedMetricError("precision is undefined for an empty selection");
  }
  return static_cast<double>(intersection_size(selected, predictable)) / static_cast<double>(selected.size());
}

double recall(const TestSet& selected, const TestSet& predictable) {
  if (predictable.empty()) {
    throw UndefinedMetricError("recall is undefined for an empty predictable set");
  }
  return static_cast<double>(intersection_size(selected, predictable)) /
         static_cast<double>(predictable.size());
}

double f_measure(double precision, double recall) noexcept {
  const double denominator = precision + recall;
  if (denominator == 0.0) {
    return 0.0;
  }
  return 2.0 * precision * recall / denominator;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::ema:
      return "ema";
    case Method::ekelund:
      return "ekelund";
    case Method::random:
      return "random";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "ema") {
    return Method::ema;
  }
  if (text == "ekelund" || text == "cumulative") {
    return Method::ekelund;
  }
  if (text == "random") {
    return Method::random;
  }
  throw ArgumentError("unknown method '" + std::string{text} + "' (expected ema, ekelund or random)");
}

MatrixConfig MethodConfig::matrix_config() const {
  MatrixConfig config;
  switch (method) {
    case Method::ema:
      config = ema_config(alpha, d_mode);
      break;
    case Method::ekelund:
      config = cumulative_config();
      break;
    case Method::random:
      throw ConfigError("the random method has no sensitivity matrix");
  }
  config.drop_threshold = drop_threshold;
  validate(config);
  return config;
}

std::string MethodConfig::label() const { return std::string{to_string(method)}; }

double EvalReport::zero_builds() const noexcept {
  double total = 0.0;
  for (const auto& row : per_build) {
    total += row.zero_fraction;
  }
  return total;
}

std::vector<EvalReport> replay_sizes(const History& history, const FlipLedger& ledger, const MethodConfig& config,
                                     std::span<const std::size_t> sizes) {
  if (sizes.empty()) {
    throw ArgumentError("at least one selection size is required");
  }
  if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) {
    throw ArgumentError("selection size must be at least 1");
  }
  if (ledger.predictable_at.size() != history.size()) {
    throw ArgumentError("flip ledger does not match the history");
  }
  if (config.method == Method::random && config.random.runs == 0) {
    throw ConfigError("random policy needs at least one run");
  }

  std::vector<EvalReport> reports(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    reports[i].config = config;
    reports[i].label = config.label();
    reports[i].n = sizes[i];
  }
  const std::size_t largest = *std::max_element(sizes.begin(), sizes.end());
  const TestSet& universe = ledger.universe;

  std::optional<SensitivityMatrix> matrix;
  if (config.method != Method::random) {
    matrix.emplace(config.matrix_config());
  }

  for (std::size_t seq = 1; seq < history.size(); ++seq) {
    const auto& build = history[seq];
    const auto& predictable = ledger.predictable_at[seq];

    if (!predictable.empty() && !universe.empty()) {
      const double pred_count = static_cast<double>(predictable.size());
      if (matrix) {
        const auto ranked =
            select_top_n(matrix->slice_scores(build.changed_files, config.score_mode), largest, universe);
        const auto hits = prefix_hits(ranked, predictable, sizes);
        for (std::size_t i = 0; i < sizes.size(); ++i) {
          const auto selected = std::min(sizes[i], ranked.size());
          const double p = static_cast<double>(hits[i]) / static_cast<double>(selected);
          const double r = static_cast<double>(hits[i]) / pred_count;
          reports[i].per_build.push_back({seq, selected, predictable.size(), static_cast<double>(hits[i]), p, r,
                                          f_measure(p, r), hits[i] == 0 ? 1.0 : 0.0});
        }
      } else {
        const std::size_t draw = std::min(largest, universe.size());
        std::vector<BuildMetrics> sums(sizes.size());
        for (std::size_t run = 0; run < config.random.runs; ++run) {
          const auto ranked = random_select(universe, draw, config.random, run, seq);
          const auto hits = prefix_hits(ranked, predictable, sizes);
          for (std::size_t i = 0; i < sizes.size(); ++i) {
            const auto selected = std::min(sizes[i], ranked.size());
            const double p = static_cast<double>(hits[i]) / static_cast<double>(selected);
            const double r = static_cast<double>(hits[i]) / pred_count;
            sums[i].intersection += static_cast<double>(hits[i]);
            sums[i].precision += p;
            sums[i].recall += r;
            sums[i].f_measure += f_measure(p, r);
            sums[i].zero_fraction += hits[i] == 0 ? 1.0 : 0.0;
          }
        }
        const auto runs = static_cast<double>(config.random.runs);
        for (std::size_t i = 0; i < sizes.size(); ++i) {
          reports[i].per_build.push_back({seq, std::min(sizes[i], draw), predictable.size(),
                                          sums[i].intersection / runs, sums[i].precision / runs,
                                          sums[i].recall / runs, sums[i].f_measure / runs,
                                          sums[i].zero_fraction / runs});
        }
      }
    }

    if (matrix) {
      matrix->advance(build_delta(build.changed_files, ledger.flipped_at[seq], matrix->config().d_mode));
    }
  }

  for (auto& report : reports) {
    finalise(report);
  }
  return reports;
}

EvalReport replay(const History& history, const FlipLedger& ledger, const MethodConfig& config, std::size_t n) {
  const std::size_t sizes[] = {n};
  return std::move(replay_sizes(history, ledger, config, sizes).front());
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  using Json = nlohmann::ordered_json;
  Json doc;
  doc["method"] = to_string(report.config.method);
  doc["label"] = report.label;
  Json config;
  if (report.config.method == Method::ema) {
    config["alpha"] = report.config.alpha;
    config["d_mode"] = to_string(report.config.d_mode);
  } else if (report.config.method == Method::ekelund) {
    config["d_mode"] = to_string(DMode::constant);
    config["update_mode"] = to_string(UpdateMode::cumulative);
  }
  if (report.config.method == Method::random) {
    config["seed"] = report.config.random.seed;
    config["runs"] = report.config.random.runs;
  } else {
    config["score_mode"] = to_string(report.config.score_mode);
    config["drop_threshold"] = report.config.drop_threshold;
  }
  doc["config"] = std::move(config);
  doc["n"] = report.n;
  doc["evaluated_builds"] = report.evaluated_builds();
  if (report.aggregates) {
    doc["aggregates"] = Json{{"precision", report.aggregates->precision},
                             {"recall", report.aggregates->recall},
                             {"f_measure", report.aggregates->f_measure},
                             {"zero_pct", report.aggregates->zero_pct}};
  } else {
    doc["aggregates"] = nullptr;
  }
  Json rows = Json::array();
  for (const auto& row : report.per_build) {
    rows.push_back(Json{{"seq", row.seq},
                        {"selected", row.selected},
                        {"predictable", row.predictable},
                        {"intersection", row.intersection},
                        {"precision", row.precision},
                        {"recall", row.recall},
                        {"f_measure", row.f_measure},
                        {"zero_fraction", row.zero_fraction}});
  }
  doc["per_build"] = std::move(rows);
  return doc;
}

// Alpha sweep -----------------------------------------------------------------

std::vector<double> alpha_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ArgumentError("grid needs lo <= hi and a positive step");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(std::min(hi, rounded(lo + static_cast<double>(i) * step)));
  }
  return grid;
}

std::vector<double> default_alpha_grid() { return alpha_grid(0.0, 1.0, 0.01); }

SweepResult sweep_alpha(const History& history, const FlipLedger& ledger, std::span<const double> grid,
                        std::span<const std::size_t> sizes, const MethodConfig& base, unsigned threads) {
  if (grid.empty()) {
    throw ArgumentError("alpha grid is empty");
  }
  for (const double alpha : grid) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw ArgumentError("alpha grid values must lie in [0, 1]");
    }
  }

  SweepResult result;
  result.table.resize(grid.size());
  auto evaluate = [&](std::size_t index) {
    MethodConfig config = base;
    config.method = Method::ema;
    config.alpha = grid[index];
    const auto reports = replay_sizes(history, ledger, config, sizes);
    SweepRow row;
    row.alpha = grid[index];
    double zero = 0.0;
    for (const auto& report : reports) {
      zero += report.zero_builds();
      if (report.aggregates) {
        row.mean_zero_pct += report.aggregates->zero_pct;
        row.mean_precision += report.aggregates->precision;
        row.mean_recall += report.aggregates->recall;
        row.mean_f_measure += report.aggregates->f_measure;
      }
    }
    const auto count = static_cast<double>(reports.size());
    row.zero_builds = static_cast<std::size_t>(std::llround(zero));
    row.mean_zero_pct /= count;
    row.mean_precision /= count;
    row.mean_recall /= count;
    row.mean_f_measure /= count;
    result.table[index] = row;
  };

  unsigned workers = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, grid.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      evaluate(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < grid.size() && !failed; i = next++) {
          try {
            evaluate(i);
          } catch (...) {
            if (!failed.exchange(true)) {
              failure = std::current_exception();
            }
          }
        }
      });
    }
    for (auto& thread : pool) {
      thread.join();
    }
    if (failure) {
      std::rethrow_exception(failure);
    }
  }

  const SweepRow* best = &result.table.front();
  for (const auto& row : result.table) {
    if (row.zero_builds < best->zero_builds || (row.zero_builds == best->zero_builds && row.alpha < best->alpha)) {
      best = &row;
    }
  }
  result.best_alpha = best->alpha;
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "alpha,zero_builds,zero_pct,precision,recall,f_measure\n";
  for (const auto& row : result.table) {
    out << format_significant(row.alpha) << ',' << row.zero_builds << ',' << format_significant(row.mean_zero_pct)
        << ',' << format_significant(row.mean_precision) << ',' << format_significant(row.mean_recall) << ','
        << format_significant(row.mean_f_measure) << '\n';
  }
}

// Figure tables ---------------------------------------------------------------

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::zero_pct:
      return "zero_pct";
    case Metric::precision:
      return "precision";
    case Metric::recall:
      return "recall";
    case Metric::f_measure:
      return "f_measure";
  }
  return "unknown";
}

double metric_value(const Aggregates& aggregates, Metric metric) noexcept {
  switch (metric) {
    case Metric::zero_pct:
      return aggregates.zero_pct;
    case Metric::precision:
      return aggregates.precision;
    case Metric::recall:
      return aggregates.recall;
    case Metric::f_measure:
      return aggregates.f_measure;
  }
  return 0.0;
}

namespace {

// label -> (n -> report), labels in first-appearance order.
struct Grouped {
  std::vector<std::string> labels;
  std::vector<std::map<std::size_t, const EvalReport*>> by_size;
};

Grouped group_reports(const std::vector<EvalReport>& reports) {
  Grouped grouped;
  for (const auto& report : reports) {
    auto it = std::find(grouped.labels.begin(), grouped.labels.end(), report.label);
    std::size_t index = static_cast<std::size_t>(it - grouped.labels.begin());
    if (it == grouped.labels.end()) {
      grouped.labels.push_back(report.label);
      grouped.by_size.emplace_back();
    }
    if (!grouped.by_size[index].emplace(report.n, &report).second) {
      throw ValidationError("duplicate report for '" + report.label + "' at n=" + std::to_string(report.n));
    }
  }
  return grouped;
}

std::vector<std::size_t> sizes_of(const std::map<std::size_t, const EvalReport*>& by_size) {
  std::vector<std::size_t> sizes;
  for (const auto& [n, report] : by_size) {
    sizes.push_back(n);
  }
  return sizes;
}

}  // namespace

std::vector<FigureTable> figure_data(const std::vector<EvalReport>& reports) {
  if (reports.empty()) {
    throw ValidationError("no reports to tabulate");
  }
  const auto grouped = group_reports(reports);
  const auto sizes = sizes_of(grouped.by_size.front());
  for (std::size_t i = 1; i < grouped.labels.size(); ++i) {
    if (sizes_of(grouped.by_size[i]) != sizes) {
      throw ValidationError("method '" + grouped.labels[i] + "' covers different selection sizes than '" +
                            grouped.labels.front() + "'");
    }
  }

  std::vector<FigureTable> tables;
  for (const Metric metric : {Metric::zero_pct, Metric::precision, Metric::recall, Metric::f_measure}) {
    FigureTable table;
    table.metric = metric;
    table.sizes = sizes;
    table.labels = grouped.labels;
    for (const auto n : sizes) {
      std::vector<std::optional<double>> row;
      for (const auto& by_size : grouped.by_size) {
        const auto& aggregates = by_size.at(n)->aggregates;
        row.push_back(aggregates ? std::optional<double>{metric_value(*aggregates, metric)} : std::nullopt);
      }
      table.values.push_back(std::move(row));
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

void write_figure_csv(std::ostream& out, const FigureTable& table) {
  out << 'n';
  for (const auto& label : table.labels) {
    out << ',' << csv_field(label);
  }
  out << '\n';
  for (std::size_t i = 0; i < table.sizes.size(); ++i) {
    out << table.sizes[i];
    for (const auto& value : table.values[i]) {
      out << ',';
      if (value) {
        out << format_significant(*value);
      }
    }
    out << '\n';
  }
}

Improvement improvement(const std::vector<EvalReport>& candidate, const std::vector<EvalReport>& reference,
                        Metric metric) {
  std::map<std::size_t, double> lhs;
  std::map<std::size_t, double> rhs;
  for (const auto& report : candidate) {
    if (!report.aggregates) {
      throw ValidationError("candidate report at n=" + std::to_string(report.n) + " has no aggregates");
    }
    lhs[report.n] = metric_value(*report.aggregates, metric);
  }
  for (const auto& report : reference) {
    if (!report.aggregates) {
      throw ValidationError("reference report at n=" + std::to_string(report.n) + " has no aggregates");
    }
    rhs[report.n] = metric_value(*report.aggregates, metric);
  }
  if (lhs.empty() || lhs.size() != rhs.size() ||
      !std::equal(lhs.begin(), lhs.end(), rhs.begin(), [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw ValidationError("improvement needs both sides to cover the same selection sizes");
  }

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  Improvement out;
  out.min_relative = out.min_absolute = std::numeric_limits<double>::infinity();
  out.max_relative = out.max_absolute = -std::numeric_limits<double>::infinity();
  double relative_sum = 0.0;
  std::size_t relative_count = 0;
  double absolute_sum = 0.0;
  double lhs_sum = 0.0;
  double rhs_sum = 0.0;
  for (const auto& [n, value] : lhs) {
    const double base = rhs.at(n);
    const double delta = value - base;
    out.min_absolute = std::min(out.min_absolute, delta);
    out.max_absolute = std::max(out.max_absolute, delta);
    absolute_sum += delta;
    lhs_sum += value;
    rhs_sum += base;
    if (base != 0.0) {
      const double relative = value / base - 1.0;
      out.min_relative = std::min(out.min_relative, relative);
      out.max_relative = std::max(out.max_relative, relative);
      relative_sum += relative;
      ++relative_count;
    }
  }
  const auto count = static_cast<double>(lhs.size());
  out.avg_absolute = absolute_sum / count;
  if (relative_count == 0) {
    out.min_relative = out.max_relative = out.avg_relative = kNaN;
  } else {
    out.avg_relative = relative_sum / static_cast<double>(relative_count);
  }
  out.of_averages_relative = rhs_sum != 0.0 ? lhs_sum / rhs_sum - 1.0 : kNaN;
  return out;
}

}  // namespace flipsense
