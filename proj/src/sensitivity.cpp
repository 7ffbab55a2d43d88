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

#include <flipsense/sensitivity.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include <flipsense/error.hpp>

namespace flipsense {

namespace {

double divisor(DMode mode, std::size_t change_set_size) {
  return mode == DMode::linear ? static_cast<double>(change_set_size) : 1.0;
}

}  // namespace

std::string_view to_string(DMode mode) noexcept {
  return mode == DMode::linear ? "linear" : "constant";
}

std::string_view to_string(UpdateMode mode) noexcept {
  return mode == UpdateMode::ema ? "ema" : "cumulative";
}

std::string_view to_string(ScoreMode mode) noexcept {
  return mode == ScoreMode::sum ? "sum" : "max";
}

DMode parse_d_mode(std::string_view text) {
  if (text == "linear") {
    return DMode::linear;
  }
  if (text == "constant") {
    return DMode::constant;
  }
  throw ArgumentError("unknown d mode '" + std::string{text} + "' (expected linear or constant)");
}

UpdateMode parse_update_mode(std::string_view text) {
  if (text == "ema") {
    return UpdateMode::ema;
  }
  if (text == "cumulative") {
    return UpdateMode::cumulative;
  }
  throw ArgumentError("unknown update mode '" + std::string{text} + "' (expected ema or cumulative)");
}

ScoreMode parse_score_mode(std::string_view text) {
  if (text == "sum") {
    return ScoreMode::sum;
  }
  if (text == "max") {
    return ScoreMode::max;
  }
  throw ArgumentError("unknown score mode '" + std::string{text} + "' (expected sum or max)");
}

void validate(const MatrixConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(config.alpha));
  }
  if (!(config.drop_threshold >= 0.0)) {
    throw ConfigError("drop threshold must be non-negative");
  }
}

MatrixConfig ema_config(double alpha, DMode d_mode) {
  MatrixConfig config;
  config.update_mode = UpdateMode::ema;
  config.d_mode = d_mode;
  config.alpha = alpha;
  validate(config);
  return config;
}

MatrixConfig cumulative_config() {
  MatrixConfig config;
  config.update_mode = UpdateMode::cumulative;
  config.d_mode = DMode::constant;
  config.alpha = 1.0;
  return config;
}

double SensitivityDelta::value() const noexcept {
  if (empty()) {
    return 0.0;
  }
  return 1.0 / divisor(d_mode, files.size());
}

double SensitivityDelta::at(std::string_view file, std::string_view test) const {
  const bool hit = files.contains(std::string{file}) && tests.contains(std::string{test});
  return hit ? value() : 0.0;
}

SensitivityDelta build_delta(const FileSet& changed_files, const TestSet& flipped, DMode d_mode) {
  return {d_mode, changed_files, flipped};
}

// ScoreVector -----------------------------------------------------------------

ScoreVector::ScoreVector(std::map<TestId, double> scores) {
  for (auto& [test, score] : scores) {
    if (!std::isfinite(score) || score < 0.0) {
      throw ArgumentError("score for '" + test + "' must be finite and non-negative");
    }
  }
  scores_.insert(std::make_move_iterator(scores.begin()), std::make_move_iterator(scores.end()));
  order_.reserve(scores_.size());
  for (const auto& [test, score] : scores_) {
    order_.push_back(test);
  }
  // Ids are already ascending, so a stable sort on score alone gives (score desc, id asc).
  std::stable_sort(order_.begin(), order_.end(), [this](const TestId& lhs, const TestId& rhs) {
    return scores_.find(lhs)->second > scores_.find(rhs)->second;
  });
}

double ScoreVector::score(std::string_view test) const {
  const auto it = scores_.find(test);
  return it == scores_.end() ? 0.0 : it->second;
}

// SensitivityMatrix -----------------------------------------------------------

SensitivityMatrix::SensitivityMatrix(MatrixConfig config) : config_{config} { validate(config_); }

SensitivityMatrix::Index SensitivityMatrix::file_index(const FileId& file) {
  const auto [it, inserted] = file_lookup_.try_emplace(file, static_cast<Index>(file_names_.size()));
  if (inserted) {
    file_names_.push_back(file);
    rows_.emplace_back();
  }
  return it->second;
}

SensitivityMatrix::Index SensitivityMatrix::test_index(const TestId& test) {
  const auto [it, inserted] = test_lookup_.try_emplace(test, static_cast<Index>(test_names_.size()));
  if (inserted) {
    test_names_.push_back(test);
  }
  return it->second;
}

std::optional<SensitivityMatrix::Index> SensitivityMatrix::find_file(std::string_view file) const {
  const auto it = file_lookup_.find(std::string{file});
  if (it == file_lookup_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::optional<SensitivityMatrix::Index> SensitivityMatrix::find_test(std::string_view test) const {
  const auto it = test_lookup_.find(std::string{test});
  if (it == test_lookup_.end()) {
    return std::nullopt;
  }
  return it->second;
}

bool SensitivityMatrix::keep(double value) const noexcept {
  return value > 0.0 && value >= config_.drop_threshold;
}

double& SensitivityMatrix::slot(Row& row, Index test) {
  auto it = std::lower_bound(row.begin(), row.end(), test,
                             [](const auto& entry, Index key) { return entry.first < key; });
  if (it == row.end() || it->first != test) {
    it = row.insert(it, {test, 0.0});
  }
  return it->second;
}

void SensitivityMatrix::scale_all(double factor) {
  for (auto& row : rows_) {
    for (auto& entry : row) {
      entry.second *= factor;
    }
    std::erase_if(row, [this](const auto& entry) { return !keep(entry.second); });
  }
}

double SensitivityMatrix::at(std::string_view file, std::string_view test) const {
  const auto f = find_file(file);
  const auto t = find_test(test);
  if (!f || !t) {
    return 0.0;
  }
  const auto& row = rows_[*f];
  const auto it = std::lower_bound(row.begin(), row.end(), *t,
                                   [](const auto& entry, Index key) { return entry.first < key; });
  return (it != row.end() && it->first == *t) ? it->second : 0.0;
}

std::size_t SensitivityMatrix::nonzeros() const noexcept {
  std::size_t count = 0;
  for (const auto& row : rows_) {
    count += row.size();
  }
  return count;
}

std::vector<FileId> SensitivityMatrix::files() const {
  std::vector<FileId> out = file_names_;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TestId> SensitivityMatrix::tests() const {
  std::vector<TestId> out = test_names_;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<MatrixEntry> SensitivityMatrix::entries() const {
  std::vector<MatrixEntry> out;
  out.reserve(nonzeros());
  for (std::size_t f = 0; f < rows_.size(); ++f) {
    for (const auto& [t, value] : rows_[f]) {
      out.push_back({file_names_[f], test_names_[t], value});
    }
  }
  std::sort(out.begin(), out.end(), [](const MatrixEntry& lhs, const MatrixEntry& rhs) {
    return std::tie(lhs.file, lhs.test) < std::tie(rhs.file, rhs.test);
  });
  return out;
}

std::vector<std::pair<FileId, double>> SensitivityMatrix::column(std::string_view test) const {
  std::vector<std::pair<FileId, double>> out;
  const auto t = find_test(test);
  if (!t) {
    return out;
  }
  for (std::size_t f = 0; f < rows_.size(); ++f) {
    const auto& row = rows_[f];
    const auto it = std::lower_bound(row.begin(), row.end(), *t,
                                     [](const auto& entry, Index key) { return entry.first < key; });
    if (it != row.end() && it->first == *t) {
      out.emplace_back(file_names_[f], it->second);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void SensitivityMatrix::advance(const SensitivityDelta& delta) {
  if (delta.d_mode != config_.d_mode) {
    throw ConfigError("delta built with d mode '" + std::string{to_string(delta.d_mode)} +
                      "' but matrix uses '" + std::string{to_string(config_.d_mode)} + "'");
  }
  std::vector<Index> files;
  std::vector<Index> tests;
  files.reserve(delta.files.size());
  tests.reserve(delta.tests.size());
  for (const auto& file : delta.files) {
    files.push_back(file_index(file));
  }
  for (const auto& test : delta.tests) {
    tests.push_back(test_index(test));
  }

  double increment = delta.value();
  if (config_.update_mode == UpdateMode::ema) {
    scale_all(1.0 - config_.alpha);
    increment *= config_.alpha;
  }
  if (!delta.empty() && increment > 0.0) {
    for (const Index f : files) {
      auto& row = rows_[f];
      for (const Index t : tests) {
        slot(row, t) += increment;
      }
      std::erase_if(row, [this](const auto& entry) { return !keep(entry.second); });
    }
  }
  ++last_seq_;
}

void SensitivityMatrix::update_column(const TestId& test, const FileSet& files, bool flipped) {
  const Index t = test_index(test);
  std::vector<Index> file_indices;
  file_indices.reserve(files.size());
  for (const auto& file : files) {
    file_indices.push_back(file_index(file));
  }

  double increment = files.empty() ? 0.0 : 1.0 / divisor(config_.d_mode, files.size());
  if (config_.update_mode == UpdateMode::ema) {
    const double decay = 1.0 - config_.alpha;
    for (auto& row : rows_) {
      const auto it = std::lower_bound(row.begin(), row.end(), t,
                                       [](const auto& entry, Index key) { return entry.first < key; });
      if (it != row.end() && it->first == t) {
        it->second *= decay;
        if (!keep(it->second)) {
          row.erase(it);
        }
      }
    }
    increment *= config_.alpha;
  }
  if (!flipped || increment <= 0.0) {
    return;
  }
  for (const Index f : file_indices) {
    auto& row = rows_[f];
    double& value = slot(row, t);
    value += increment;
    if (!keep(value)) {
      std::erase_if(row, [t](const auto& entry) { return entry.first == t; });
    }
  }
}

ScoreVector SensitivityMatrix::slice_scores(const FileSet& changed_files, ScoreMode mode) const {
  std::vector<double> totals(test_names_.size(), 0.0);
  for (const auto& file : changed_files) {
    const auto f = find_file(file);
    if (!f) {
      continue;
    }
    for (const auto& [t, value] : rows_[*f]) {
      if (mode == ScoreMode::sum) {
        totals[t] += value;
      } else {
        totals[t] = std::max(totals[t], value);
      }
    }
  }
  std::map<TestId, double> scores;
  for (std::size_t t = 0; t < test_names_.size(); ++t) {
    scores.emplace(test_names_[t], totals[t]);
  }
  return ScoreVector{std::move(scores)};
}

void SensitivityMatrix::set(const FileId& file, const TestId& test, double value) {
  auto& row = rows_[file_index(file)];
  const Index t = test_index(test);
  if (!(value > 0.0)) {
    std::erase_if(row, [t](const auto& entry) { return entry.first == t; });
    return;
  }
  slot(row, t) = value;
}

SensitivityMatrix advance(SensitivityMatrix matrix, const SensitivityDelta& delta) {
  matrix.advance(delta);
  return matrix;
}

ScoreVector slice_scores(const SensitivityMatrix& matrix, const FileSet& changed_files, ScoreMode mode) {
  return matrix.slice_scores(changed_files, mode);
}

std::vector<TestId> select_top_n(const ScoreVector& scores, std::size_t n, const TestSet& universe) {
  if (n == 0) {
    throw ArgumentError("selection size must be at least 1");
  }
  std::vector<TestId> selected;
  std::set<std::string_view> chosen;
  for (const auto& test : scores.order()) {
    if (selected.size() == n || !(scores.score(test) > 0.0)) {
      break;
    }
    selected.push_back(test);
    chosen.insert(test);
  }
  for (const auto& test : universe) {
    if (selected.size() == n) {
      break;
    }
    if (!chosen.contains(test)) {
      selected.push_back(test);
    }
  }
  return selected;
}

// Incremental mode ------------------------------------------------------------

void PendingChanges::track(const TestId& test) { entries_.try_emplace(test); }

void PendingChanges::observe(const FileSet& changed_files) {
  if (changed_files.empty()) {
    return;
  }
  for (auto& [test, entry] : entries_) {
    entry.accumulated.insert(changed_files.begin(), changed_files.end());
  }
}

bool PendingChanges::tracks(std::string_view test) const { return entries_.find(test) != entries_.end(); }

const FileSet& PendingChanges::accumulated(std::string_view test) const {
  static const FileSet kEmpty;
  const auto it = entries_.find(test);
  return it == entries_.end() ? kEmpty : it->second.accumulated;
}

std::optional<Verdict> PendingChanges::last_verdict(std::string_view test) const {
  const auto it = entries_.find(test);
  return it == entries_.end() ? std::nullopt : it->second.last_verdict;
}

void incremental_observe(PendingChanges& pending, const FileSet& changed_files) {
  pending.observe(changed_files);
}

void incremental_apply(SensitivityMatrix& matrix, PendingChanges& pending, const TestSet& executed,
                       const std::map<TestId, Verdict>& verdicts) {
  for (const auto& test : executed) {
    if (!verdicts.contains(test)) {
      throw ArgumentError("executed test '" + test + "' has no verdict");
    }
  }
  for (const auto& test : executed) {
    const Verdict verdict = verdicts.at(test);
    auto& entry = pending.entry(test);
    const bool flipped = entry.last_verdict.has_value() && *entry.last_verdict != verdict;
    matrix.update_column(test, entry.accumulated, flipped);
    entry.accumulated.clear();
    entry.last_verdict = verdict;
  }
  matrix.set_last_seq(matrix.last_seq() + 1);
}

}  // namespace flipsense
