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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include <flipsense/csv.hpp>
#include <flipsense/error.hpp>
#include <flipsense/sensitivity.hpp>

namespace flipsense {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr std::string_view kSnapshotKind = "flipsense-matrix";

}  // namespace

std::vector<FlakinessEntry> flakiness_index(const SensitivityMatrix& matrix) {
  std::vector<FlakinessEntry> index;
  const auto file_count = static_cast<double>(matrix.file_count());
  for (const auto& test : matrix.tests()) {
    const auto column = matrix.column(test);
    FlakinessEntry entry{test, 0.0, 0.0};
    if (!column.empty()) {
      double total = 0.0;
      for (const auto& [file, value] : column) {
        total += value;
      }
      entry.fraction = static_cast<double>(column.size()) / file_count;
      entry.mean_magnitude = total / static_cast<double>(column.size());
    }
    index.push_back(std::move(entry));
  }
  std::stable_sort(index.begin(), index.end(), [](const FlakinessEntry& lhs, const FlakinessEntry& rhs) {
    return lhs.fraction > rhs.fraction;
  });
  return index;
}

void write_heatmap_csv(std::ostream& out, const SensitivityMatrix& matrix) {
  const auto tests = matrix.tests();
  out << "file";
  for (const auto& test : tests) {
    out << ',' << csv_field(test);
  }
  out << '\n';
  for (const auto& file : matrix.files()) {
    out << csv_field(file);
    for (const auto& test : tests) {
      out << ',' << format_significant(matrix.at(file, test));
    }
    out << '\n';
  }
}

void write_flakiness_csv(std::ostream& out, const std::vector<FlakinessEntry>& index) {
  out << "test_id,fraction,mean_magnitude\n";
  for (const auto& entry : index) {
    out << csv_field(entry.test) << ',' << format_significant(entry.fraction) << ','
        << format_significant(entry.mean_magnitude) << '\n';
  }
}

void export_heatmap(const SensitivityMatrix& matrix, const std::string& heatmap_path,
                    const std::string& flakiness_path) {
  std::ofstream heat{heatmap_path};
  if (!heat) {
    throw IoError("cannot write heat map to '" + heatmap_path + "'");
  }
  write_heatmap_csv(heat, matrix);
  std::ofstream flaky{flakiness_path};
  if (!flaky) {
    throw IoError("cannot write flakiness index to '" + flakiness_path + "'");
  }
  write_flakiness_csv(flaky, flakiness_index(matrix));
  if (!heat.flush() || !flaky.flush()) {
    throw IoError("failed while writing heat map output");
  }
}

std::vector<std::pair<FileId, double>> top_files_for_test(const SensitivityMatrix& matrix,
                                                          std::string_view test, std::size_t k) {
  if (k == 0) {
    throw ArgumentError("k must be at least 1");
  }
  auto column = matrix.column(test);
  std::stable_sort(column.begin(), column.end(),
                   [](const auto& lhs, const auto& rhs) { return lhs.second > rhs.second; });
  if (column.size() > k) {
    column.resize(k);
  }
  return column;
}

void write_snapshot(std::ostream& out, const SensitivityMatrix& matrix) {
  const auto& config = matrix.config();
  OrderedJson header;
  header["kind"] = kSnapshotKind;
  header["update_mode"] = to_string(config.update_mode);
  header["d_mode"] = to_string(config.d_mode);
  header["alpha"] = config.alpha;
  header["drop_threshold"] = config.drop_threshold;
  header["last_seq"] = matrix.last_seq();
  header["files"] = matrix.files();
  header["tests"] = matrix.tests();
  out << header.dump() << '\n';
  for (const auto& entry : matrix.entries()) {
    OrderedJson line;
    line["file"] = entry.file;
    line["test"] = entry.test;
    line["value"] = entry.value;
    out << line.dump() << '\n';
  }
}

SensitivityMatrix read_snapshot(std::istream& in) {
  std::string line;
  std::size_t line_number = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_number;
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        return true;
      }
    }
    return false;
  };
  if (!next_line()) {
    throw ValidationError("matrix snapshot is empty");
  }

  try {
    const Json header = Json::parse(line);
    if (header.value("kind", "") != kSnapshotKind) {
      throw ParseError(line_number, "not a flipsense matrix snapshot");
    }
    MatrixConfig config;
    config.update_mode = parse_update_mode(header.at("update_mode").get<std::string>());
    config.d_mode = parse_d_mode(header.at("d_mode").get<std::string>());
    config.alpha = header.at("alpha").get<double>();
    config.drop_threshold = header.at("drop_threshold").get<double>();
    SensitivityMatrix matrix{config};
    for (const auto& file : header.at("files")) {
      matrix.register_file(file.get<std::string>());
    }
    for (const auto& test : header.at("tests")) {
      matrix.register_test(test.get<std::string>());
    }
    const auto last_seq = header.at("last_seq").get<std::size_t>();

    while (next_line()) {
      const Json entry = Json::parse(line);
      const double value = entry.at("value").get<double>();
      if (!std::isfinite(value) || value < 0.0) {
        throw ParseError(line_number, "entry value must be finite and non-negative");
      }
      matrix.set(entry.at("file").get<std::string>(), entry.at("test").get<std::string>(), value);
    }
    matrix.set_last_seq(last_seq);
    return matrix;
  } catch (const Json::exception& e) {
    throw ParseError(line_number, std::string{"malformed snapshot: "} + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(line_number, e.what());
  }
}

}  // namespace flipsense
