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

#include <flipsense/synth.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <flipsense/error.hpp>

namespace flipsense {

namespace {

constexpr std::size_t kModules = 10;

std::string file_name(std::size_t index) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "mod%02zu/f%04zu.c", index % kModules, index);
  return buffer;
}

std::string test_name(std::size_t module, std::size_t index) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "mod%02zu/tc_%04zu", module, index);
  return buffer;
}

std::vector<std::size_t> sample_distinct(std::mt19937_64& rng, std::size_t population, std::size_t count) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick{i, population - 1};
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

std::size_t draw(std::mt19937_64& rng, const CountRange& range) {
  return std::uniform_int_distribution<std::size_t>{range.lo, range.hi}(rng);
}

void check_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(std::string{name} + " must lie in [0, 1]");
  }
}

}  // namespace

void validate(const SynthConfig& config) {
  if (config.n_builds < 1 || config.n_files < 1 || config.n_tests < 1) {
    throw ValidationError("builds, files and tests must each be at least 1");
  }
  if (config.deps_per_test.lo < 1 || config.deps_per_test.lo > config.deps_per_test.hi) {
    throw ValidationError("deps per test needs 1 <= lo <= hi");
  }
  if (config.deps_per_test.hi > config.n_files) {
    throw ValidationError("deps per test cannot exceed the number of files");
  }
  if (config.change_set_size.lo > config.change_set_size.hi) {
    throw ValidationError("change set size needs lo <= hi");
  }
  if (config.change_set_size.hi > config.n_files) {
    throw ValidationError("change set size cannot exceed the number of files");
  }
  check_probability(config.flip_probability_hit, "hit flip probability");
  check_probability(config.flip_probability_noise, "noise flip probability");
  check_probability(config.initial_fail_fraction, "initial fail fraction");
}

SynthHistory generate(const SynthConfig& config) {
  validate(config);
  std::mt19937_64 rng{config.seed};

  std::vector<FileId> files;
  files.reserve(config.n_files);
  for (std::size_t i = 0; i < config.n_files; ++i) {
    files.push_back(file_name(i));
  }

  SynthHistory out;
  std::vector<TestId> tests;
  std::vector<std::vector<bool>> depends(config.n_tests, std::vector<bool>(config.n_files, false));
  for (std::size_t t = 0; t < config.n_tests; ++t) {
    const auto deps = sample_distinct(rng, config.n_files, draw(rng, config.deps_per_test));
    tests.push_back(test_name(deps.front() % kModules, t));
    auto& truth = out.dependencies[tests.back()];
    for (const auto f : deps) {
      depends[t][f] = true;
      truth.insert(files[f]);
    }
  }

  std::bernoulli_distribution initially_failing{config.initial_fail_fraction};
  std::bernoulli_distribution hit_flip{config.flip_probability_hit};
  std::bernoulli_distribution noise_flip{config.flip_probability_noise};
  std::vector<Verdict> current(config.n_tests);
  for (auto& verdict : current) {
    verdict = initially_failing(rng) ? Verdict::fail : Verdict::pass;
  }

  for (std::size_t seq = 0; seq < config.n_builds; ++seq) {
    BuildRecord record;
    char id[32];
    std::snprintf(id, sizeof id, "b%04zu", seq);
    record.build_id = id;
    record.seq = seq;
    const auto changed = sample_distinct(rng, config.n_files, draw(rng, config.change_set_size));
    for (const auto f : changed) {
      record.changed_files.insert(files[f]);
    }
    for (std::size_t t = 0; t < config.n_tests; ++t) {
      if (seq > 0) {
        const bool hit = std::any_of(changed.begin(), changed.end(), [&](std::size_t f) { return depends[t][f]; });
        const bool flips = hit ? hit_flip(rng) : noise_flip(rng);
        if (flips) {
          current[t] = current[t] == Verdict::pass ? Verdict::fail : Verdict::pass;
        }
      }
      record.verdicts.emplace(tests[t], current[t]);
    }
    out.history.push_back(std::move(record));
  }
  return out;
}

nlohmann::ordered_json ground_truth_json(const SynthHistory& synth) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [test, files] : synth.dependencies) {
    doc[test] = files;
  }
  return doc;
}

}  // namespace flipsense
