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

#ifndef FLIPSENSE_SENSITIVITY_HPP
#define FLIPSENSE_SENSITIVITY_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <flipsense/history.hpp>

namespace flipsense {

/// Confidence divisor applied to a build's change set size.
enum class DMode {
  linear,    // d(n) = n
  constant,  // d(n) = 1
};

enum class UpdateMode {
  ema,         // new = alpha * delta + (1 - alpha) * old
  cumulative,  // new = delta + old
};

enum class ScoreMode { sum, max };

[[nodiscard]] std::string_view to_string(DMode mode) noexcept;
[[nodiscard]] std::string_view to_string(UpdateMode mode) noexcept;
[[nodiscard]] std::string_view to_string(ScoreMode mode) noexcept;
[[nodiscard]] DMode parse_d_mode(std::string_view text);
[[nodiscard]] UpdateMode parse_update_mode(std::string_view text);
[[nodiscard]] ScoreMode parse_score_mode(std::string_view text);

inline constexpr double kDefaultDropThreshold = 1e-12;

struct MatrixConfig {
  UpdateMode update_mode = UpdateMode::ema;
  DMode d_mode = DMode::linear;
  double alpha = 0.8;  // ignored in cumulative mode
  /// Entries strictly below this after an update are removed. Zero disables
  /// pruning, though exact zeros are always removed.
  double drop_threshold = kDefaultDropThreshold;

  friend bool operator==(const MatrixConfig&, const MatrixConfig&) = default;
};

/// Throws ConfigError on alpha outside [0,1] or a negative threshold.
void validate(const MatrixConfig& config);

[[nodiscard]] MatrixConfig ema_config(double alpha, DMode d_mode = DMode::linear);

/// Plain co-occurrence counting: d = 1 and no EMA coefficients.
[[nodiscard]] MatrixConfig cumulative_config();

/// One build's sensitivity contribution. Every (file, test) pair in
/// files x tests carries the same value 1/d(|files|); all other entries are zero.
struct SensitivityDelta {
  DMode d_mode = DMode::linear;
  FileSet files;
  TestSet tests;

  [[nodiscard]] bool empty() const noexcept { return files.empty() || tests.empty(); }
  [[nodiscard]] double value() const noexcept;
  [[nodiscard]] double at(std::string_view file, std::string_view test) const;
};

[[nodiscard]] SensitivityDelta build_delta(const FileSet& changed_files, const TestSet& flipped,
                                           DMode d_mode);

/// Test scores with a deterministic ranking: score descending, then id ascending.
class ScoreVector {
 public:
  ScoreVector() = default;
  /// Throws ArgumentError on a negative or non-finite score.
  explicit ScoreVector(std::map<TestId, double> scores);

  [[nodiscard]] double score(std::string_view test) const;
  [[nodiscard]] const std::map<TestId, double, std::less<>>& scores() const noexcept { return scores_; }
  [[nodiscard]] const std::vector<TestId>& order() const noexcept { return order_; }
  [[nodiscard]] std::size_t size() const noexcept { return order_.size(); }

 private:
  std::map<TestId, double, std::less<>> scores_;
  std::vector<TestId> order_;
};

struct MatrixEntry {
  FileId file;
  TestId test;
  double value = 0.0;

  friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

/// Sparse non-negative file x test matrix.
///
/// Files and tests are registered on first reference (by an update or a
/// snapshot load) and stay registered even when all their entries decay away,
/// so the heat map keeps the full row and column sets.
class SensitivityMatrix {
 public:
  explicit SensitivityMatrix(MatrixConfig config = {});

  [[nodiscard]] const MatrixConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t last_seq() const noexcept { return last_seq_; }
  void set_last_seq(std::size_t seq) noexcept { last_seq_ = seq; }

  [[nodiscard]] double at(std::string_view file, std::string_view test) const;
  [[nodiscard]] std::size_t nonzeros() const noexcept;
  [[nodiscard]] bool empty() const noexcept { return nonzeros() == 0; }

  /// Registered ids, sorted.
  [[nodiscard]] std::vector<FileId> files() const;
  [[nodiscard]] std::vector<TestId> tests() const;
  [[nodiscard]] std::size_t file_count() const noexcept { return file_names_.size(); }
  [[nodiscard]] std::size_t test_count() const noexcept { return test_names_.size(); }

  /// All stored entries sorted by (file, test).
  [[nodiscard]] std::vector<MatrixEntry> entries() const;
  /// Nonzero entries of one test column, sorted by file id.
  [[nodiscard]] std::vector<std::pair<FileId, double>> column(std::string_view test) const;

  /// Applies one build's delta under the configured update rule and bumps
  /// last_seq. Throws ConfigError when the delta's d_mode differs.
  void advance(const SensitivityDelta& delta);

  /// Test-wise update used by the incremental mode. A flipped column gets
  /// the update rule applied against a delta of 1/d(|files|) over `files`;
  /// a column that did not flip decays by (1 - alpha) in ema mode and is left
  /// alone in cumulative mode. Other columns are untouched.
  void update_column(const TestId& test, const FileSet& files, bool flipped);

  /// Column scores over the rows in `changed_files`. Every registered test
  /// appears in the result; unknown files contribute nothing.
  [[nodiscard]] ScoreVector slice_scores(const FileSet& changed_files, ScoreMode mode) const;

  /// Sets an entry directly (snapshot loading). Values <= 0 erase the entry.
  void set(const FileId& file, const TestId& test, double value);

  void register_file(const FileId& file) { file_index(file); }
  void register_test(const TestId& test) { test_index(test); }

 private:
  using Index = std::uint32_t;
  using Row = std::vector<std::pair<Index, double>>;  // sorted by test index

  Index file_index(const FileId& file);
  Index test_index(const TestId& test);
  [[nodiscard]] std::optional<Index> find_file(std::string_view file) const;
  [[nodiscard]] std::optional<Index> find_test(std::string_view test) const;
  [[nodiscard]] bool keep(double value) const noexcept;
  void scale_all(double factor);
  static double& slot(Row& row, Index test);

  MatrixConfig config_;
  std::size_t last_seq_ = 0;
  std::vector<FileId> file_names_;
  std::vector<TestId> test_names_;
  std::unordered_map<std::string, Index> file_lookup_;
  std::unordered_map<std::string, Index> test_lookup_;
  std::vector<Row> rows_;
};

/// Functional form of SensitivityMatrix::advance.
[[nodiscard]] SensitivityMatrix advance(SensitivityMatrix matrix, const SensitivityDelta& delta);

[[nodiscard]] ScoreVector slice_scores(const SensitivityMatrix& matrix, const FileSet& changed_files,
                                       ScoreMode mode);

/// Exactly min(n, |universe ∪ positive-score tests|) distinct tests: positive
/// scores first in ranking order, then zero-score universe members by id.
/// Throws ArgumentError for n == 0.
[[nodiscard]] std::vector<TestId> select_top_n(const ScoreVector& scores, std::size_t n,
                                               const TestSet& universe);

/// Files changed since each tracked test last ran, plus each test's last verdict.
class PendingChanges {
 public:
  struct Entry {
    FileSet accumulated;
    std::optional<Verdict> last_verdict;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  /// Starts tracking a test; a no-op for tracked tests.
  void track(const TestId& test);
  void observe(const FileSet& changed_files);

  [[nodiscard]] bool tracks(std::string_view test) const;
  [[nodiscard]] const FileSet& accumulated(std::string_view test) const;
  [[nodiscard]] std::optional<Verdict> last_verdict(std::string_view test) const;
  [[nodiscard]] const std::map<TestId, Entry, std::less<>>& entries() const noexcept { return entries_; }
  [[nodiscard]] Entry& entry(const TestId& test) { return entries_[test]; }

  friend bool operator==(const PendingChanges&, const PendingChanges&) = default;

 private:
  std::map<TestId, Entry, std::less<>> entries_;
};

void incremental_observe(PendingChanges& pending, const FileSet& changed_files);

/// Folds the verdicts of executed tests into the matrix column by column and
/// resets their accumulated change sets. A test's first-ever verdict never
/// counts as a flip. Throws ArgumentError when an executed test has no verdict.
void incremental_apply(SensitivityMatrix& matrix, PendingChanges& pending, const TestSet& executed,
                       const std::map<TestId, Verdict>& verdicts);

// Heat map and diagnostics ---------------------------------------------------

struct FlakinessEntry {
  TestId test;
  double fraction = 0.0;        // share of matrix files with a nonzero entry
  double mean_magnitude = 0.0;  // mean of the nonzero entries

  friend bool operator==(const FlakinessEntry&, const FlakinessEntry&) = default;
};

/// One entry per registered test, sorted by fraction desc, then test id.
[[nodiscard]] std::vector<FlakinessEntry> flakiness_index(const SensitivityMatrix& matrix);

void write_heatmap_csv(std::ostream& out, const SensitivityMatrix& matrix);
void write_flakiness_csv(std::ostream& out, const std::vector<FlakinessEntry>& index);

/// Writes both tables. Throws IoError if either path cannot be written.
void export_heatmap(const SensitivityMatrix& matrix, const std::string& heatmap_path,
                    const std::string& flakiness_path);

/// The k largest entries of a test column (value desc, file id asc). Unknown
/// tests yield an empty list. Throws ArgumentError for k == 0.
[[nodiscard]] std::vector<std::pair<FileId, double>> top_files_for_test(const SensitivityMatrix& matrix,
                                                                        std::string_view test,
                                                                        std::size_t k);

/// Line-delimited snapshot: one metadata line, then one {"file","test","value"} line per entry.
void write_snapshot(std::ostream& out, const SensitivityMatrix& matrix);
[[nodiscard]] SensitivityMatrix read_snapshot(std::istream& in);

}  // namespace flipsense

#endif  // FLIPSENSE_SENSITIVITY_HPP
