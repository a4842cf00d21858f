// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/report_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "cloudgauge/error.hpp"

namespace cloudgauge {

namespace {

using Json = nlohmann::ordered_json;

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json point_json(const PointMetrics& m) {
  Json j;
  j["mse"] = number_or_null(m.mse);
  j["haus"] = number_or_null(m.haus);
  j["psnr_db"] = number_or_null(m.psnr_db);
  j["identical"] = std::isinf(m.psnr_db) && m.psnr_db > 0.0;
  return j;
}

Json angular_json(const AngularPooling& m) {
  Json j;
  j["mad"] = m.mad;
  j["msad"] = m.msad;
  j["rmsad"] = m.rmsad;
  return j;
}

template <typename Pooled, typename ToJson>
Json family_json(const std::optional<FamilyMetrics<Pooled>>& family, ToJson&& to_json) {
  if (!family) return Json(nullptr);
  Json j;
  j["reference_to_degraded"] = to_json(family->reference_to_degraded);
  j["degraded_to_reference"] = to_json(family->degraded_to_reference);
  j["symmetric"] = to_json(family->symmetric);
  j["skipped"] = {{"reference_to_degraded", family->skipped_reference_to_degraded},
                  {"degraded_to_reference", family->skipped_degraded_to_reference}};
  return j;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataError(where + ": '" + text + "' is not a finite number");
  }
  return value;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) throw NumericError("cannot format a non-finite number");
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw NumericError("number formatting failed");
  return {buffer.data(), ptr};
}

std::string metric_report_json(const MetricReport& report) {
  Json j;
  j["schema"] = kReportSchema;
  j["reference_points"] = report.reference_points;
  j["degraded_points"] = report.degraded_points;
  j["num_points_ratio"] = report.num_points_ratio;
  j["precision"] = report.precision;
  j["peak"] = report.peak;
  j["normalized"] = report.normalized;
  j["po2point"] = family_json(report.po2point, point_json);
  j["po2plane"] = family_json(report.po2plane, point_json);
  j["pl2plane"] = family_json(report.pl2plane, angular_json);
  return j.dump(2) + "\n";
}

std::string histogram_csv(const Histogram& histogram) {
  std::string out = "bin_low,bin_high,count\n";
  for (std::size_t b = 0; b < histogram.counts.size(); ++b) {
    out += format_number(histogram.edges[b]) + "," + format_number(histogram.edges[b + 1]) + "," +
           std::to_string(histogram.counts[b]) + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, double>> symmetric_scores(const MetricReport& report) {
  std::vector<std::pair<std::string, double>> out;
  const auto add_point = [&](const std::string& family,
                             const std::optional<FamilyMetrics<PointMetrics>>& f) {
    if (!f) return;
    out.emplace_back(family + "_mse", f->symmetric.mse);
    out.emplace_back(family + "_haus", f->symmetric.haus);
    out.emplace_back(family + "_psnr", f->symmetric.psnr_db);
  };
  add_point("po2point", report.po2point);
  add_point("po2plane", report.po2plane);
  if (report.pl2plane) {
    out.emplace_back("pl2plane_mad", report.pl2plane->symmetric.mad);
    out.emplace_back("pl2plane_msad", report.pl2plane->symmetric.msad);
    out.emplace_back("pl2plane_rmsad", report.pl2plane->symmetric.rmsad);
  }
  out.emplace_back("num_points", report.num_points_ratio);
  return out;
}

// -- CSV -----------------------------------------------------------------------

std::optional<std::size_t> CsvTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require(std::string_view name) const {
  const auto i = find(name);
  if (!i) throw DataError("CSV is missing column '" + std::string(name) + "'");
  return *i;
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  const auto end_field = [&] {
    record.push_back(field_was_quoted ? field : trim(field));
    field.clear();
    field_was_quoted = false;
  };
  const auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (!trim(field).empty()) {
        throw DataError(source + ":" + std::to_string(line) + ": stray quote inside field");
      }
      field.clear();
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
      ++line;
    } else if (field_was_quoted) {
      if (c != ' ' && c != '\t' && c != '\r') {
        throw DataError(source + ":" + std::to_string(line) + ": text after closing quote");
      }
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError(source + ": unterminated quoted field");
  if (!field.empty() || !record.empty() || field_was_quoted) end_record();

  if (records.empty()) throw DataError(source + ": empty CSV");
  CsvTable table;
  table.header = std::move(records.front());
  std::set<std::string> names;
  for (const auto& h : table.header) {
    if (h.empty()) throw DataError(source + ": empty column name in header");
    if (!names.insert(h).second) throw DataError(source + ": duplicate column '" + h + "'");
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError(source + ": record " + std::to_string(r) + " has " +
                      std::to_string(records[r].size()) + " fields, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path), path.string());
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::string src = path.string();
  const std::size_t c_id = table.require("id");
  const std::size_t c_ref = table.require("reference_path");
  const std::size_t c_deg = table.require("degraded_path");
  const std::size_t c_codec = table.require("codec");
  const std::size_t c_rendering = table.require("rendering");
  const std::size_t c_quality = table.require("quality");
  const std::size_t c_mos = table.require("mos");
  const auto c_content = table.find("content");
  const auto c_precision = table.find("precision");
  const std::filesystem::path base = path.parent_path();

  std::vector<ManifestRow> rows;
  std::set<std::string> ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::string where = src + ": row " + std::to_string(r + 1);
    ManifestRow row;
    row.id = f[c_id];
    if (row.id.empty()) throw DataError(where + ": empty id");
    if (!ids.insert(row.id).second) throw DataError(where + ": duplicate id '" + row.id + "'");
    const auto resolve = [&](const std::string& p) {
      if (p.empty()) throw DataError(where + ": empty path");
      const std::filesystem::path fp(p);
      return fp.is_absolute() ? fp : base / fp;
    };
    row.reference_path = resolve(f[c_ref]);
    row.degraded_path = resolve(f[c_deg]);
    row.codec = f[c_codec];
    row.rendering = f[c_rendering];
    row.quality = f[c_quality];
    if (!row.quality.empty() && row.quality != "L" && row.quality != "M" && row.quality != "H") {
      throw DataError(where + ": quality must be L, M or H");
    }
    if (c_content) row.content = f[*c_content];
    if (!f[c_mos].empty()) row.mos = parse_double(f[c_mos], where + " mos");
    if (c_precision && !f[*c_precision].empty()) {
      const double p = parse_double(f[*c_precision], where + " precision");
      if (p != std::floor(p) || p < 1 || p > 30) throw DataError(where + ": bad precision");
      row.precision = static_cast<int>(p);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScoreRecord> parse_scores(std::string_view text, const std::string& source) {
  const CsvTable table = parse_csv(text, source);
  const std::size_t c_id = table.require("stimulus_id");
  const std::size_t c_codec = table.require("codec");
  const std::size_t c_rendering = table.require("rendering");
  const std::size_t c_quality = table.require("quality");
  const std::size_t c_content = table.require("content");
  const std::size_t c_value = table.require("objective_value");
  const std::size_t c_mos = table.require("mos");
  const auto c_metric = table.find("metric");

  std::vector<ScoreRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::string where = source + ": row " + std::to_string(r + 1);
    ScoreRecord rec;
    rec.entry.stimulus_id = f[c_id];
    rec.entry.codec = f[c_codec];
    rec.entry.rendering = f[c_rendering];
    rec.entry.quality = f[c_quality];
    rec.entry.content = f[c_content];
    rec.entry.objective_value =
        f[c_value].empty() ? std::nan("") : parse_double(f[c_value], where + " objective_value");
    rec.entry.mos = parse_double(f[c_mos], where + " mos");
    if (!(rec.entry.mos >= 1.0 && rec.entry.mos <= 5.0)) throw DataError(where + ": mos outside [1, 5]");
    if (c_metric) rec.metric = f[*c_metric];
    if (rec.entry.stimulus_id.empty()) throw DataError(where + ": empty stimulus_id");
    if (!seen.insert({rec.metric, rec.entry.stimulus_id}).second) {
      throw DataError(where + ": duplicate stimulus_id '" + rec.entry.stimulus_id + "'");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  return parse_scores(read_text(path), path.string());
}

}  // namespace cloudgauge
