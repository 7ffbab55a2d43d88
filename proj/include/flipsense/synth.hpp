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

#ifndef FLIPSENSE_SYNTH_HPP
#define FLIPSENSE_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <map>

#include <json.hpp>

#include <flipsense/history.hpp>

namespace flipsense {

struct CountRange {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

/// Desk-scale defaults: 50 builds, 200 files, 100 tests.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_builds = 50;
  std::size_t n_files = 200;
  std::size_t n_tests = 100;
  CountRange deps_per_test{1, 5};
  CountRange change_set_size{1, 20};
  double flip_probability_hit = 0.7;
  double flip_probability_noise = 0.01;
  double initial_fail_fraction = 0.1;
};

/// Throws ValidationError describing the first violated constraint.
void validate(const SynthConfig& config);

struct SynthHistory {
  History history;
  std::map<TestId, FileSet> dependencies;  // planted ground truth
};

/// Retest-all history: every test has a verdict in every build. A test flips
/// with the hit probability when the build's change set touches one of its
/// dependencies, otherwise with the noise probability. Fully determined by
/// the config.
[[nodiscard]] SynthHistory generate(const SynthConfig& config);

[[nodiscard]] nlohmann::ordered_json ground_truth_json(const SynthHistory& synth);

}  // namespace flipsense

#endif  // FLIPSENSE_SYNTH_HPP
