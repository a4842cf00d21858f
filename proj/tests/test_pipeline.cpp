// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <map>
#include <random>

#include "cloudgauge/error.hpp"
#include "cloudgauge/pipeline.hpp"
#include "cloudgauge/ply_io.hpp"
#include "dataset_fixture.hpp"

using namespace cloudgauge;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const testsupport::Fixture& fixture() {
  static const testsupport::Fixture f =
      testsupport::make_fixture(fs::temp_directory_path() / "cloudgauge_pipeline_fixture");
  return f;
}

const std::vector<ScoreRecord>& fixture_scores() {
  static const std::vector<ScoreRecord> s = score_manifest(read_manifest(fixture().manifest), {});
  return s;
}

ScoreRecord record(std::string id, std::string codec, std::string rendering, std::string content,
                   std::string quality, double objective, double mos, std::string metric) {
  ScoreRecord r;
  r.entry.stimulus_id = std::move(id);
  r.entry.codec = std::move(codec);
  r.entry.rendering = std::move(rendering);
  r.entry.content = std::move(content);
  r.entry.quality = std::move(quality);
  r.entry.objective_value = objective;
  r.entry.mos = mos;
  r.metric = std::move(metric);
  return r;
}

// Three codecs with eighteen stimuli each; MOS is an exact logistic image of
// the objective score.
std::vector<ScoreRecord> logistic_records() {
  const Eigen::Vector4d beta(4.7, 1.2, 50.0, 9.0);
  std::vector<ScoreRecord> out;
  const char* qualities[] = {"L", "M", "H"};
  for (const char* codec : {"gpcc", "vpcc", "pcl"}) {
    for (int i = 0; i < 18; ++i) {
      const double x = 10.0 + 80.0 * i / 17.0 + (codec[0] == 'v' ? 1.5 : 0.0);
      const std::string id = std::string(codec) + "_" + std::to_string(i);
      out.push_back(record(id, codec, "RPoint", "c" + std::to_string(i / 3), qualities[i % 3], x,
                           logistic4(x, beta), "psnr"));
      out.push_back(record(id, codec, "RPoint", "c" + std::to_string(i / 3), qualities[i % 3], -x,
                           logistic4(x, beta), "neg_psnr"));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("manifest scoring produces every metric for every row") {
  const auto& scores = fixture_scores();
  CHECK(scores.size() == fixture().rows * 10);
  std::map<std::string, int> per_metric;
  for (const auto& r : scores) {
    ++per_metric[r.metric];
    CHECK(std::isfinite(r.entry.objective_value));
  }
  CHECK(per_metric.size() == 10);
  for (const auto& [m, n] : per_metric) CHECK(n == static_cast<int>(fixture().rows));
}

TEST_CASE("manifest scores equal a direct comparison") {
  const auto rows = read_manifest(fixture().manifest);
  for (const std::size_t pick : {std::size_t{0}, std::size_t{13}, rows.size() - 1}) {
    const ManifestRow& row = rows[pick];
    const PointCloud ref = read_ply(row.reference_path);
    const PointCloud deg = read_ply(row.degraded_path);
    std::optional<NormalField> normals;
    if (ref.has_normals()) normals = NormalField::from_normals(ref.normals());
    const MetricReport m = compare(ref, deg, {}, normals ? &*normals : nullptr);
    for (const auto& [name, value] : symmetric_scores(m)) {
      const auto it = std::find_if(fixture_scores().begin(), fixture_scores().end(), [&](const ScoreRecord& r) {
        return r.metric == name && r.entry.stimulus_id == row.id;
      });
      REQUIRE(it != fixture_scores().end());
      if (std::isinf(value)) {
        CHECK(std::isinf(it->entry.objective_value));
      } else {
        CHECK(it->entry.objective_value == value);
      }
    }
  }
}

TEST_CASE("row order in the manifest does not change any output") {
  const auto shuffled = score_manifest(read_manifest(testsupport::shuffled_manifest(fixture(), 3)), {});
  CHECK(scores_csv(shuffled) == scores_csv(fixture_scores()));
  const auto a = plcc_table(fixture_scores());
  const auto b = plcc_table(shuffled);
  CHECK(plcc_table_csv(a) == plcc_table_csv(b));
  CHECK(residuals_csv(a) == residuals_csv(b));
  CHECK(significance_report(fixture_scores()) == significance_report(shuffled));
}

TEST_CASE("scores csv reads back") {
  const auto text = scores_csv(fixture_scores());
  const auto back = parse_scores(text);
  REQUIRE(back.size() == fixture_scores().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto& a = back[i].entry;
    const auto& b = fixture_scores()[i].entry;
    CHECK(a.stimulus_id == b.stimulus_id);
    CHECK(back[i].metric == fixture_scores()[i].metric);
    CHECK(a.mos == b.mos);
    if (std::isfinite(b.objective_value)) {
      CHECK(a.objective_value == b.objective_value);
    } else {
      CHECK(std::isnan(a.objective_value));
    }
  }
}

TEST_CASE("missing mos is an error") {
  auto rows = read_manifest(fixture().manifest);
  rows.resize(2);
  rows[1].mos.reset();
  CHECK_THROWS_AS(score_manifest(rows, {}), DataError);
}

TEST_CASE("a metric that is a logistic image of mos gets plcc 100 everywhere") {
  const auto cells = plcc_table(logistic_records());
  CHECK(cells.size() == 2 * 4);
  for (const auto& c : cells) {
    CAPTURE(c.metric);
    CAPTURE(c.grouping);
    REQUIRE(c.evaluation);
    if (c.grouping == kAllCodecs) {
      CHECK(c.stimulus_ids.size() == 54);
    } else {
      CHECK(c.evaluation->plcc_percent == doctest::Approx(100.0).epsilon(1e-8));
      CHECK(c.evaluation->fit.residuals.size() == 18);
    }
  }
  const std::string table = plcc_table_csv(cells);
  CHECK(table.rfind("metric,rendering,gpcc,pcl,vpcc,all\n", 0) == 0);
}

TEST_CASE("residuals csv has one line per stimulus and cell") {
  const auto cells = plcc_table(logistic_records());
  const CsvTable t = parse_csv(residuals_csv(cells));
  CHECK(t.header == std::vector<std::string>{"metric", "rendering", "grouping", "stimulus_id", "objective_value",
                                             "mos", "predicted", "residual"});
  CHECK(t.rows.size() == 2 * (3 * 18 + 54));
}

TEST_CASE("significance report on identical rendering groups") {
  std::vector<ScoreRecord> recs;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int i = 0; i < 18; ++i) {
    const double mos = std::round(u(rng) * 100) / 100;
    for (const char* rendering : {"RPoint", "RColor", "RMesh"}) {
      recs.push_back(record("s" + std::to_string(i) + rendering, "pcl", rendering, "c" + std::to_string(i / 3),
                            i % 3 == 0 ? "L" : (i % 3 == 1 ? "M" : "H"), NAN, mos, ""));
    }
  }
  const Json j = Json::parse(significance_report(recs));
  CHECK(j["schema"] == 1);
  CHECK(j["alpha"] == 0.05);
  const auto& g = j["mos_tests"][0];
  CHECK(g["grouping"] == "pcl");
  CHECK(g["welch_anova"]["significant"] == false);
  CHECK(g["welch_anova"]["p_value"].get<double>() == doctest::Approx(1.0));
  CHECK(g["levene"]["significant"] == false);
  for (const auto& gh : g["games_howell"]) CHECK(gh["significant"] == false);
  // Identical MOS pairs have no nonzero difference; the failure is recorded.
  for (const auto& w : g["wilcoxon"]) {
    CHECK(w["significant"] == false);
    CHECK(w.contains("error"));
  }
  CHECK(j["residual_tests"].empty());
}

TEST_CASE("alpha override changes decisions only") {
  const auto& scores = fixture_scores();
  StatsOptions strict;
  strict.alpha = 1e-12;
  StatsOptions loose;
  loose.alpha = 0.999999;
  const Json a = Json::parse(significance_report(scores, strict));
  const Json b = Json::parse(significance_report(scores, loose));
  REQUIRE(a["mos_tests"].size() == b["mos_tests"].size());
  for (std::size_t i = 0; i < a["mos_tests"].size(); ++i) {
    const auto& wa = a["mos_tests"][i]["welch_anova"];
    const auto& wb = b["mos_tests"][i]["welch_anova"];
    CHECK(wa["p_value"] == wb["p_value"]);
    CHECK(wa["significant"] == false);
    CHECK(wb["significant"] == true);
    CHECK(wb["alpha"] == 0.999999);
  }
}

TEST_CASE("residual F tests compare metrics within a grouping") {
  const Json j = Json::parse(significance_report(fixture_scores()));
  const auto& blocks = j["residual_tests"];
  REQUIRE_FALSE(blocks.empty());
  for (const auto& block : blocks) {
    const std::size_t metrics = block["metrics"].size();
    std::size_t usable = 0;
    for (const auto& m : block["metrics"]) usable += m.contains("plcc_percent") ? 1 : 0;
    CHECK(block["f_tests"].size() == usable * (usable - 1) / 2);
    CHECK(metrics == 10);
    for (const auto& f : block["f_tests"]) {
      if (!f.contains("critical_value")) continue;
      CHECK(f["alpha"] == 0.2);
      const bool reject = f["significant"].get<bool>();
      CHECK(reject == !f["better"].is_null());
    }
  }
}
