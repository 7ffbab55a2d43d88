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

// Brute-force reference computations shared by the unit and acceptance
// suites. Nothing here calls into the library's algorithms; only plain data
// types are borrowed.

#ifndef FLIPSENSE_TESTS_ORACLES_HPP
#define FLIPSENSE_TESTS_ORACLES_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <flipsense/history.hpp>

namespace flipsense::oracle {

/// verdicts[build][test]; nullopt = not run.
using VerdictTable = std::vector<std::vector<std::optional<Verdict>>>;

inline std::string test_label(std::size_t t) { return "t" + std::to_string(100 + t); }
inline std::string file_label(std::size_t f) { return "f" + std::to_string(100 + f); }

/// Random verdict table with optional gaps.
inline VerdictTable random_table(std::mt19937_64& rng, std::size_t builds, std::size_t tests, double absent,
                                 double flip) {
  std::bernoulli_distribution skip{absent};
  std::bernoulli_distribution change{flip};
  std::bernoulli_distribution coin{0.5};
  VerdictTable table(builds, std::vector<std::optional<Verdict>>(tests));
  for (std::size_t t = 0; t < tests; ++t) {
    Verdict current = coin(rng) ? Verdict::pass : Verdict::fail;
    for (std::size_t b = 0; b < builds; ++b) {
      if (change(rng)) {
        current = current == Verdict::pass ? Verdict::fail : Verdict::pass;
      }
      if (!skip(rng)) {
        table[b][t] = current;
      }
    }
  }
  return table;
}

inline History table_to_history(const VerdictTable& table, const std::vector<FileSet>& changes = {}) {
  History history;
  for (std::size_t b = 0; b < table.size(); ++b) {
    BuildRecord record;
    record.build_id = "build-" + std::to_string(b);
    record.seq = b;
    if (b < changes.size()) {
      record.changed_files = changes[b];
    }
    for (std::size_t t = 0; t < table[b].size(); ++t) {
      if (table[b][t]) {
        record.verdicts.emplace(test_label(t), *table[b][t]);
      }
    }
    history.push_back(std::move(record));
  }
  return history;
}

struct NaiveFlips {
  std::vector<std::set<std::string>> flipped;
  std::vector<std::set<std::string>> predictable;
  std::vector<std::tuple<std::size_t, std::string, bool>> events;  // (seq, test, broken?)
};

/// Scans each test column on its own, carrying the last observed verdict across gaps.
inline NaiveFlips naive_flips(const VerdictTable& table) {
  NaiveFlips out;
  out.flipped.resize(table.size());
  out.predictable.resize(table.size());
  const std::size_t tests = table.empty() ? 0 : table.front().size();
  for (std::size_t t = 0; t < tests; ++t) {
    std::optional<Verdict> last;
    std::size_t flips_so_far = 0;
    for (std::size_t b = 0; b < table.size(); ++b) {
      const auto& cell = table[b][t];
      if (!cell) {
        continue;
      }
      if (last && *last != *cell) {
        out.flipped[b].insert(test_label(t));
        out.events.emplace_back(b, test_label(t), *cell == Verdict::fail);
        if (flips_so_far > 0) {
          out.predictable[b].insert(test_label(t));
        }
        ++flips_so_far;
      }
      last = *cell;
    }
  }
  std::sort(out.events.begin(), out.events.end());
  return out;
}

/// One build's contribution: (change set, flipped set).
struct DeltaSpec {
  std::set<std::string> files;
  std::set<std::string> tests;
};

inline std::vector<DeltaSpec> random_deltas(std::mt19937_64& rng, std::size_t builds, std::size_t files,
                                            std::size_t tests) {
  std::uniform_int_distribution<std::size_t> file_count{0, std::min<std::size_t>(files, 8)};
  std::uniform_int_distribution<std::size_t> test_count{0, std::min<std::size_t>(tests, 5)};
  std::uniform_int_distribution<std::size_t> pick_file{0, files - 1};
  std::uniform_int_distribution<std::size_t> pick_test{0, tests - 1};
  std::vector<DeltaSpec> out(builds);
  for (auto& step : out) {
    const auto nf = file_count(rng);
    const auto nt = test_count(rng);
    for (std::size_t i = 0; i < nf; ++i) {
      step.files.insert(file_label(pick_file(rng)));
    }
    for (std::size_t i = 0; i < nt; ++i) {
      step.tests.insert(test_label(pick_test(rng)));
    }
  }
  return out;
}

using Dense = std::map<std::pair<std::string, std::string>, double>;

/// alpha * Σ_j (1-alpha)^(k-j) B_j with B_j = 1/|fc_j| (linear) or 1 (constant).
inline Dense closed_form_ema(const std::vector<DeltaSpec>& deltas, double alpha, bool linear) {
  Dense out;
  const std::size_t k = deltas.size();
  for (std::size_t j = 0; j < k; ++j) {
    const auto& step = deltas[j];
    if (step.files.empty() || step.tests.empty()) {
      continue;
    }
    const double b = linear ? 1.0 / static_cast<double>(step.files.size()) : 1.0;
    const double weight = alpha * std::pow(1.0 - alpha, static_cast<double>(k - 1 - j));
    for (const auto& f : step.files) {
      for (const auto& t : step.tests) {
        out[{f, t}] += weight * b;
      }
    }
  }
  return out;
}

/// Number of builds in which f changed and t flipped.
inline std::map<std::pair<std::string, std::string>, std::int64_t> co_occurrence_counts(
    const std::vector<DeltaSpec>& deltas) {
  std::map<std::pair<std::string, std::string>, std::int64_t> out;
  for (const auto& step : deltas) {
    for (const auto& f : step.files) {
      for (const auto& t : step.tests) {
        ++out[{f, t}];
      }
    }
  }
  return out;
}

struct SetCounts {
  std::size_t selected = 0;
  std::size_t predictable = 0;
  std::size_t common = 0;
};

inline SetCounts count_sets(const std::set<std::string>& selected, const std::set<std::string>& predictable) {
  SetCounts counts{selected.size(), predictable.size(), 0};
  for (const auto& s : selected) {
    for (const auto& p : predictable) {
      if (s == p) {
        ++counts.common;
      }
    }
  }
  return counts;
}

/// Minimum of Σ s_i² after zeroing any `budget`-sized subset of `staleness`.
inline std::uint64_t brute_force_min_cost(const std::vector<std::uint64_t>& staleness, std::size_t budget) {
  const std::size_t n = staleness.size();
  const std::size_t take = std::min(budget, n);
  std::uint64_t best = UINT64_MAX;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != take) {
      continue;
    }
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask & (1U << i)) == 0) {
        total += staleness[i] * staleness[i];
      }
    }
    best = std::min(best, total);
  }
  return best;
}

/// Zero-intersection build count for an EMA replay, recomputed densely from the
/// raw history: carry-forward flips, selection from the matrix before each
/// build's update, (score desc, id asc) ranking padded by id.
inline std::size_t naive_zero_builds(const History& history, double alpha, std::size_t n) {
  std::set<std::string> universe;
  for (const auto& build : history) {
    for (const auto& [test, verdict] : build.verdicts) {
      universe.insert(test);
    }
  }
  std::map<std::string, Verdict> last;
  std::map<std::string, std::size_t> flip_count;
  Dense matrix;
  std::size_t zero = 0;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const auto& build = history[k];
    std::set<std::string> flipped;
    std::set<std::string> predictable;
    for (const auto& [test, verdict] : build.verdicts) {
      const auto it = last.find(test);
      if (it != last.end() && it->second != verdict) {
        flipped.insert(test);
        if (flip_count[test]++ > 0) {
          predictable.insert(test);
        }
      }
      last[test] = verdict;
    }
    if (k > 0 && !predictable.empty()) {
      std::vector<std::pair<double, std::string>> ranked;
      for (const auto& test : universe) {
        double score = 0.0;
        for (const auto& file : build.changed_files) {
          const auto it = matrix.find({file, test});
          if (it != matrix.end()) {
            score += it->second;
          }
        }
        ranked.emplace_back(-score, test);
      }
      std::sort(ranked.begin(), ranked.end());
      bool hit = false;
      for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) {
        hit = hit || predictable.contains(ranked[i].second);
      }
      zero += hit ? 0 : 1;
    }
    // Decay everything, then credit the new co-occurrences.
    for (auto& [key, value] : matrix) {
      value = (1.0 - alpha) * value;
    }
    if (!build.changed_files.empty() && !flipped.empty()) {
      const double b = 1.0 / static_cast<double>(build.changed_files.size());
      for (const auto& f : build.changed_files) {
        for (const auto& t : flipped) {
          matrix[{f, t}] += alpha * b;
        }
      }
    }
  }
  return zero;
}

}  // namespace flipsense::oracle

#endif  // FLIPSENSE_TESTS_ORACLES_HPP
