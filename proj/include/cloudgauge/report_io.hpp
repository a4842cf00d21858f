// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_REPORT_IO_HPP
#define CLOUDGAUGE_REPORT_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cloudgauge/geometry_metrics.hpp"
#include "cloudgauge/stat_eval.hpp"

namespace cloudgauge {

inline constexpr int kReportSchema = 1;

/// Shortest round-trip decimal form; "null" is never produced here.
std::string format_number(double value);

/// JSON with fixed keys. Families not computed are null. An infinite PSNR is
/// written as null with "identical": true.
std::string metric_report_json(const MetricReport& report);

/// Columns bin_low, bin_high, count.
std::string histogram_csv(const Histogram& histogram);

/// Symmetric score of every computed metric, in a fixed order, keyed
/// "<family>_<pooling>" (e.g. "po2point_psnr"), plus "num_points".
std::vector<std::pair<std::string, double>> symmetric_scores(const MetricReport& report);

// -- CSV ---------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t require(std::string_view name) const;
};

/// RFC 4180 style: comma separated, optional double quotes, first line is the
/// header. Blank lines are ignored.
CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view value);

struct ManifestRow {
  std::string id;
  std::filesystem::path reference_path;
  std::filesystem::path degraded_path;
  std::string codec;
  std::string rendering;
  std::string quality;
  std::string content;
  std::optional<double> mos;
  std::optional<int> precision;
};

/// Relative cloud paths resolve against the manifest's directory. Ids must be
/// unique and quality, when given, one of L, M, H.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

struct ScoreRecord {
  ScoreEntry entry;
  /// Empty when the file has no metric column.
  std::string metric;
};

/// Header stimulus_id,codec,rendering,quality,content,objective_value,mos
/// with an optional trailing metric column.
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);
std::vector<ScoreRecord> parse_scores(std::string_view text, const std::string& source = "<memory>");

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_REPORT_IO_HPP
