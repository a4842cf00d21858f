// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_PIPELINE_HPP
#define CLOUDGAUGE_PIPELINE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cloudgauge/geometry_metrics.hpp"
#include "cloudgauge/report_io.hpp"
#include "cloudgauge/stat_eval.hpp"

namespace cloudgauge {

/// Grouping label that pools every codec.
inline constexpr const char* kAllCodecs = "all";

/// Computes the symmetric scores of every manifest row. Each distinct
/// (reference, degraded, precision) triple is compared once; reference normals
/// are estimated once per reference. Records come back sorted by metric order
/// then stimulus id, so row order in the manifest does not matter.
std::vector<ScoreRecord> score_manifest(
    const std::vector<ManifestRow>& rows, const CompareOptions& options,
    const std::function<void(const std::string&)>& progress = nullptr);

/// Records in the scores CSV layout (with the metric column).
std::string scores_csv(const std::vector<ScoreRecord>& records);

struct PlccCell {
  std::string metric;
  std::string rendering;
  /// A codec label or kAllCodecs.
  std::string grouping;
  std::vector<std::string> stimulus_ids;
  Eigen::VectorXd objective;
  Eigen::VectorXd mos;
  std::optional<MetricEvaluation> evaluation;
  /// Why `evaluation` is empty.
  std::string failure;
};

/// Logistic fit and PLCC per (metric, rendering, grouping) where grouping runs
/// over every codec plus kAllCodecs. Cells are ordered by rendering, metric
/// (first-seen order in `records`), then grouping with kAllCodecs last.
std::vector<PlccCell> plcc_table(const std::vector<ScoreRecord>& records,
                                 const LogisticOptions& options = {});

/// Wide table: metric,rendering,<codec...>,all with PLCC in percent.
std::string plcc_table_csv(const std::vector<PlccCell>& cells);

/// Long table: metric,rendering,grouping,stimulus_id,objective_value,mos,predicted,residual.
std::string residuals_csv(const std::vector<PlccCell>& cells);

struct StatsOptions {
  double alpha = 0.05;
  double residual_alpha = 0.2;
  LogisticOptions logistic;
};

/// Welch ANOVA, Levene, Games-Howell and Wilcoxon over rendering groups of
/// MOS, per codec and for all codecs; kurtosis and pairwise residual F-tests
/// over metrics when objective values are present. JSON, schema 1.
std::string significance_report(const std::vector<ScoreRecord>& records,
                                const StatsOptions& options = {});

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_PIPELINE_HPP
