// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <memory>
#include <set>
#include <tuple>

#include "cloudgauge/error.hpp"
#include "cloudgauge/normal_estimation.hpp"
#include "cloudgauge/ply_io.hpp"

namespace cloudgauge {

namespace {

using Json = nlohmann::ordered_json;

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

bool needs_normals(const CompareOptions& options) { return options.po2plane || options.pl2plane; }

// Metric names in first-seen order.
std::vector<std::string> metric_order(const std::vector<ScoreRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.metric) == out.end()) out.push_back(r.metric);
  }
  return out;
}

template <typename Get>
std::vector<std::string> sorted_labels(const std::vector<ScoreRecord>& records, Get&& get) {
  std::set<std::string> labels;
  for (const auto& r : records) labels.insert(get(r));
  return {labels.begin(), labels.end()};
}

}  // namespace

std::vector<ScoreRecord> score_manifest(const std::vector<ManifestRow>& rows,
                                        const CompareOptions& options,
                                        const std::function<void(const std::string&)>& progress) {
  using Key = std::tuple<std::string, std::string, int>;
  std::map<Key, std::vector<const ManifestRow*>> jobs;
  for (const auto& row : rows) {
    if (!row.mos) throw DataError("manifest row '" + row.id + "' has no mos");
    jobs[Key{row.reference_path.string(), row.degraded_path.string(), row.precision.value_or(0)}]
        .push_back(&row);
  }

  std::vector<std::string> metric_names;
  std::vector<ScoreRecord> records;
  std::string cached_reference_key;
  std::unique_ptr<PointCloud> reference;
  std::unique_ptr<NormalField> reference_normals;

  for (const auto& [key, members] : jobs) {
    const auto& [reference_path, degraded_path, precision_key] = key;
    const std::optional<int> precision =
        precision_key > 0 ? std::optional<int>(precision_key) : std::nullopt;
    const std::string reference_key = reference_path + "#" + std::to_string(precision_key);
    if (reference_key != cached_reference_key) {
      reference = std::make_unique<PointCloud>(read_ply(reference_path, precision));
      reference_normals.reset();
      if (needs_normals(options)) {
        reference_normals = std::make_unique<NormalField>(
            reference->has_normals() ? NormalField::from_normals(reference->normals())
                                     : compute_normals(*reference, options.normals));
      }
      cached_reference_key = reference_key;
    }
    const PointCloud degraded = read_ply(degraded_path, precision);
    if (progress) progress(members.front()->id);
    const MetricReport report = compare(*reference, degraded, options, reference_normals.get());
    const auto scores = symmetric_scores(report);
    if (metric_names.empty()) {
      for (const auto& s : scores) metric_names.push_back(s.first);
    }
    for (const ManifestRow* row : members) {
      for (const auto& [name, value] : scores) {
        ScoreRecord rec;
        rec.metric = name;
        rec.entry.stimulus_id = row->id;
        rec.entry.objective_value = value;
        rec.entry.mos = *row->mos;
        rec.entry.codec = row->codec;
        rec.entry.rendering = row->rendering;
        rec.entry.quality = row->quality;
        rec.entry.content = row->content;
        records.push_back(std::move(rec));
      }
    }
  }

  const auto rank = [&](const std::string& metric) {
    return std::find(metric_names.begin(), metric_names.end(), metric) - metric_names.begin();
  };
  std::sort(records.begin(), records.end(), [&](const ScoreRecord& a, const ScoreRecord& b) {
    const auto ra = rank(a.metric);
    const auto rb = rank(b.metric);
    if (ra != rb) return ra < rb;
    return a.entry.stimulus_id < b.entry.stimulus_id;
  });
  return records;
}

std::string scores_csv(const std::vector<ScoreRecord>& records) {
  std::string out = "stimulus_id,codec,rendering,quality,content,objective_value,mos,metric\n";
  for (const auto& r : records) {
    const auto& e = r.entry;
    out += csv_field(e.stimulus_id) + "," + csv_field(e.codec) + "," + csv_field(e.rendering) + "," +
           csv_field(e.quality) + "," + csv_field(e.content) + "," +
           (std::isfinite(e.objective_value) ? format_number(e.objective_value) : std::string()) +
           "," + format_number(e.mos) + "," + csv_field(r.metric) + "\n";
  }
  return out;
}

std::vector<PlccCell> plcc_table(const std::vector<ScoreRecord>& records,
                                 const LogisticOptions& options) {
  const auto metrics = metric_order(records);
  const auto renderings = sorted_labels(records, [](const ScoreRecord& r) { return r.entry.rendering; });
  auto groupings = sorted_labels(records, [](const ScoreRecord& r) { return r.entry.codec; });
  groupings.erase(std::remove(groupings.begin(), groupings.end(), kAllCodecs), groupings.end());
  groupings.emplace_back(kAllCodecs);

  std::vector<PlccCell> cells;
  for (const auto& rendering : renderings) {
    for (const auto& metric : metrics) {
      for (const auto& grouping : groupings) {
        std::vector<const ScoreEntry*> members;
        for (const auto& r : records) {
          if (r.metric != metric || r.entry.rendering != rendering) continue;
          if (grouping != kAllCodecs && r.entry.codec != grouping) continue;
          members.push_back(&r.entry);
        }
        if (members.empty()) continue;
        std::sort(members.begin(), members.end(), [](const ScoreEntry* a, const ScoreEntry* b) {
          return a->stimulus_id < b->stimulus_id;
        });
        PlccCell cell;
        cell.metric = metric;
        cell.rendering = rendering;
        cell.grouping = grouping;
        const auto n = static_cast<Eigen::Index>(members.size());
        cell.objective.resize(n);
        cell.mos.resize(n);
        std::vector<ScoreEntry> entries;
        for (Eigen::Index i = 0; i < n; ++i) {
          const ScoreEntry& e = *members[static_cast<std::size_t>(i)];
          cell.stimulus_ids.push_back(e.stimulus_id);
          cell.objective[i] = e.objective_value;
          cell.mos[i] = e.mos;
          entries.push_back(e);
        }
        try {
          if (!cell.objective.allFinite()) {
            throw DataError("non-finite objective values (identical clouds or missing scores)");
          }
          cell.evaluation = evaluate_metric(ScorePairSet(std::move(entries)), options);
        } catch (const Error& e) {
          cell.failure = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::string plcc_table_csv(const std::vector<PlccCell>& cells) {
  std::vector<std::string> groupings;
  for (const auto& c : cells) {
    if (c.grouping != kAllCodecs &&
        std::find(groupings.begin(), groupings.end(), c.grouping) == groupings.end()) {
      groupings.push_back(c.grouping);
    }
  }
  std::sort(groupings.begin(), groupings.end());
  groupings.emplace_back(kAllCodecs);

  std::string out = "metric,rendering";
  for (const auto& g : groupings) out += "," + csv_field(g);
  out += "\n";
  std::size_t i = 0;
  while (i < cells.size()) {
    const std::string& metric = cells[i].metric;
    const std::string& rendering = cells[i].rendering;
    std::map<std::string, std::string> row;
    for (; i < cells.size() && cells[i].metric == metric && cells[i].rendering == rendering; ++i) {
      if (cells[i].evaluation) row[cells[i].grouping] = format_number(cells[i].evaluation->plcc_percent);
    }
    out += csv_field(metric) + "," + csv_field(rendering);
    for (const auto& g : groupings) out += "," + row[g];
    out += "\n";
  }
  return out;
}

std::string residuals_csv(const std::vector<PlccCell>& cells) {
  std::string out = "metric,rendering,grouping,stimulus_id,objective_value,mos,predicted,residual\n";
  for (const auto& c : cells) {
    if (!c.evaluation) continue;
    const LogisticFit& fit = c.evaluation->fit;
    for (std::size_t i = 0; i < c.stimulus_ids.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out += csv_field(c.metric) + "," + csv_field(c.rendering) + "," + csv_field(c.grouping) + "," +
             csv_field(c.stimulus_ids[i]) + "," + format_number(c.objective[k]) + "," +
             format_number(c.mos[k]) + "," + format_number(fit.predicted[k]) + "," +
             format_number(fit.residuals[k]) + "\n";
    }
  }
  return out;
}

// -- significance report -------------------------------------------------------

namespace {

Json result_json(const SignificanceResult& r) {
  Json j;
  j["test"] = r.test;
  j["statistic"] = number_or_null(r.statistic);
  j["df1"] = r.df1;
  j["df2"] = r.df2;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  j["significant"] = r.significant;
  return j;
}

Json failure_json(const std::string& test, const std::string& message) {
  Json j;
  j["test"] = test;
  j["error"] = message;
  j["significant"] = false;
  return j;
}

template <typename F>
Json guarded(const std::string& test, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return failure_json(test, e.what());
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string pairing_key(const ScoreEntry& e) { return e.codec + "\x1f" + e.content + "\x1f" + e.quality; }

}  // namespace

std::string significance_report(const std::vector<ScoreRecord>& records,
                                const StatsOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0) ||
      !(options.residual_alpha > 0.0 && options.residual_alpha < 1.0)) {
    throw UsageError("significance levels must be in (0, 1)");
  }
  // One MOS per stimulus regardless of how many metrics the file carries.
  std::map<std::string, ScoreEntry> stimuli;
  for (const auto& r : records) {
    const auto [it, inserted] = stimuli.emplace(r.entry.stimulus_id, r.entry);
    if (!inserted) {
      const ScoreEntry& e = it->second;
      if (e.mos != r.entry.mos || e.codec != r.entry.codec || e.rendering != r.entry.rendering ||
          e.quality != r.entry.quality || e.content != r.entry.content) {
        throw DataError("stimulus '" + r.entry.stimulus_id + "' has inconsistent rows");
      }
    }
  }
  std::set<std::string> rendering_set;
  std::set<std::string> codec_set;
  for (const auto& [id, e] : stimuli) {
    rendering_set.insert(e.rendering);
    codec_set.insert(e.codec);
  }
  const std::vector<std::string> renderings(rendering_set.begin(), rendering_set.end());
  std::vector<std::string> groupings(codec_set.begin(), codec_set.end());
  groupings.erase(std::remove(groupings.begin(), groupings.end(), kAllCodecs), groupings.end());
  groupings.emplace_back(kAllCodecs);

  Json report;
  report["schema"] = kReportSchema;
  report["alpha"] = options.alpha;
  report["residual_alpha"] = options.residual_alpha;
  report["renderings"] = renderings;

  Json mos_tests = Json::array();
  for (const auto& grouping : groupings) {
    std::vector<std::vector<double>> values(renderings.size());
    std::vector<std::map<std::string, double>> keyed(renderings.size());
    std::vector<bool> ambiguous(renderings.size(), false);
    for (const auto& [id, e] : stimuli) {
      if (grouping != kAllCodecs && e.codec != grouping) continue;
      const auto r = static_cast<std::size_t>(
          std::find(renderings.begin(), renderings.end(), e.rendering) - renderings.begin());
      values[r].push_back(e.mos);
      if (!keyed[r].emplace(pairing_key(e), e.mos).second) ambiguous[r] = true;
    }
    Groups groups;
    std::vector<std::string> labels;
    std::vector<std::size_t> source;
    for (std::size_t r = 0; r < renderings.size(); ++r) {
      if (values[r].empty()) continue;
      groups.push_back(to_vector(values[r]));
      labels.push_back(renderings[r]);
      source.push_back(r);
    }

    Json g;
    g["grouping"] = grouping;
    g["renderings"] = labels;
    Json counts = Json::array();
    Json means = Json::array();
    for (const auto& v : groups) {
      counts.push_back(v.size());
      means.push_back(v.mean());
    }
    g["counts"] = counts;
    g["means"] = means;
    g["welch_anova"] = guarded("welch_anova", [&] { return result_json(welch_anova(groups, options.alpha)); });
    g["levene"] = guarded("levene_brown_forsythe", [&] { return result_json(levene_test(groups, options.alpha)); });

    Json gh = Json::array();
    try {
      for (const auto& r : games_howell(groups, options.alpha)) {
        Json j = result_json(r);
        j["pair"] = {labels[static_cast<std::size_t>(r.pair->first)],
                     labels[static_cast<std::size_t>(r.pair->second)]};
        gh.push_back(j);
      }
    } catch (const Error& e) {
      gh = Json::array({failure_json("games_howell", e.what())});
    }
    g["games_howell"] = gh;

    Json wilcoxon = Json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        const std::size_t ri = source[i];
        const std::size_t rj = source[j];
        Json w = guarded("wilcoxon_signed_rank", [&] {
          if (ambiguous[ri] || ambiguous[rj]) {
            throw DataError("stimuli cannot be paired: (codec, content, quality) is not unique");
          }
          std::vector<double> a;
          std::vector<double> b;
          for (const auto& [key, mos] : keyed[ri]) {
            const auto hit = keyed[rj].find(key);
            if (hit == keyed[rj].end()) continue;
            a.push_back(mos);
            b.push_back(hit->second);
          }
          Json out = result_json(wilcoxon_signed_rank(to_vector(a), to_vector(b), options.alpha));
          out["paired"] = a.size();
          return out;
        });
        w["pair"] = {labels[i], labels[j]};
        wilcoxon.push_back(w);
      }
    }
    g["wilcoxon"] = wilcoxon;
    mos_tests.push_back(g);
  }
  report["mos_tests"] = mos_tests;

  // Residual analysis needs objective values.
  std::vector<ScoreRecord> scored;
  for (const auto& r : records) {
    if (std::isfinite(r.entry.objective_value)) scored.push_back(r);
  }
  Json residual_tests = Json::array();
  if (!scored.empty()) {
    for (auto& r : scored) {
      if (r.metric.empty()) r.metric = "objective";
    }
    const auto cells = plcc_table(scored, options.logistic);
    std::size_t i = 0;
    while (i < cells.size()) {
      // Gather every metric for one (rendering, grouping).
      const std::string rendering = cells[i].rendering;
      std::size_t end = i;
      while (end < cells.size() && cells[end].rendering == rendering) ++end;
      std::vector<std::string> grouping_order;
      for (std::size_t c = i; c < end; ++c) {
        if (std::find(grouping_order.begin(), grouping_order.end(), cells[c].grouping) ==
            grouping_order.end()) {
          grouping_order.push_back(cells[c].grouping);
        }
      }
      for (const auto& grouping : grouping_order) {
        std::vector<const PlccCell*> members;
        for (std::size_t c = i; c < end; ++c) {
          if (cells[c].grouping == grouping) members.push_back(&cells[c]);
        }
        Json block;
        block["rendering"] = rendering;
        block["grouping"] = grouping;
        Json metrics = Json::array();
        for (const PlccCell* cell : members) {
          Json m;
          m["metric"] = cell->metric;
          m["count"] = cell->stimulus_ids.size();
          if (!cell->evaluation) {
            m["error"] = cell->failure;
          } else {
            const auto& ev = *cell->evaluation;
            m["plcc_percent"] = ev.plcc_percent;
            m["converged"] = ev.fit.converged;
            m["residual_variance"] = sample_variance(ev.fit.residuals);
            try {
              const KurtosisResult k = kurtosis_normality(ev.fit.residuals);
              m["kurtosis"] = k.kurtosis;
              m["gaussian"] = k.is_gaussian;
            } catch (const Error& e) {
              m["kurtosis"] = nullptr;
              m["gaussian"] = nullptr;
              m["kurtosis_error"] = e.what();
            }
          }
          metrics.push_back(m);
        }
        block["metrics"] = metrics;
        Json f_tests = Json::array();
        for (std::size_t a = 0; a < members.size(); ++a) {
          for (std::size_t b = a + 1; b < members.size(); ++b) {
            if (!members[a]->evaluation || !members[b]->evaluation) continue;
            Json f = guarded("residual_f_test", [&] {
              const ResidualFTest t = residual_f_test(members[a]->evaluation->fit.residuals,
                                                      members[b]->evaluation->fit.residuals,
                                                      options.residual_alpha);
              Json out = result_json(t.result);
              out["critical_value"] = t.critical_value;
              out["better"] = t.better ? Json(members[*t.better == 0 ? a : b]->metric) : Json(nullptr);
              return out;
            });
            f["metrics"] = {members[a]->metric, members[b]->metric};
            f_tests.push_back(f);
          }
        }
        block["f_tests"] = f_tests;
        residual_tests.push_back(block);
      }
      i = end;
    }
  }
  report["residual_tests"] = residual_tests;
  return report.dump(2) + "\n";
}

}  // namespace cloudgauge
