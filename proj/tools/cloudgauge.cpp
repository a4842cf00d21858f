// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: codec runs, metric computation, dataset evaluation
// and significance testing.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <json.hpp>
#include <map>
#include <new>
#include <sstream>
#include <string>

#include "cloudgauge/attribute_transfer.hpp"
#include "cloudgauge/error.hpp"
#include "cloudgauge/geometry_metrics.hpp"
#include "cloudgauge/normal_estimation.hpp"
#include "cloudgauge/octree_codec.hpp"
#include "cloudgauge/pipeline.hpp"
#include "cloudgauge/ply_io.hpp"
#include "cloudgauge/report_io.hpp"

namespace cg = cloudgauge;
using Json = nlohmann::ordered_json;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cg::DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw cg::DataError("write to '" + path + "' failed");
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cg::DataError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

cg::PlyFormat ply_format(bool ascii) {
  return ascii ? cg::PlyFormat::kAscii : cg::PlyFormat::kBinaryLittleEndian;
}

// Turns "po2point,pl2plane" or "all" into option flags.
void select_metrics(const std::string& list, cg::CompareOptions& options) {
  options.po2point = options.po2plane = options.pl2plane = false;
  std::stringstream ss(list);
  std::string item;
  bool any = false;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      options.po2point = options.po2plane = options.pl2plane = true;
    } else if (item == "po2point") {
      options.po2point = true;
    } else if (item == "po2plane") {
      options.po2plane = true;
    } else if (item == "pl2plane") {
      options.pl2plane = true;
    } else {
      throw cg::UsageError("unknown metric '" + item + "'");
    }
    any = true;
  }
  if (!any) throw cg::UsageError("--metrics selects nothing");
}

struct MetricFlags {
  std::string metrics = "all";
  std::optional<int> precision;
  long k_avg = 3;
  double radius_multiplier = 4.0;
  std::string projection = "source";
  bool no_normalize = false;
  double max_skipped = 0.10;

  void attach(CLI::App* app) {
    app->add_option("--metrics", metrics, "po2point,po2plane,pl2plane or all")->capture_default_str();
    app->add_option("--precision", precision, "reference bit depth (overrides the file)")
        ->check(CLI::Range(1, 30));
    app->add_option("--k-avg", k_avg, "reference normals averaged for degraded->reference point-to-plane")
        ->capture_default_str();
    app->add_option("--radius-multiplier", radius_multiplier, "normal search radius factor")
        ->capture_default_str();
    app->add_option("--projection", projection, "point-to-plane normal: source or matched")
        ->capture_default_str();
    app->add_flag("--no-normalize", no_normalize, "keep grid units for MSE/HAUS/plane-to-plane");
    app->add_option("--max-skipped", max_skipped, "largest tolerated share of points without normals")
        ->capture_default_str();
  }

  cg::CompareOptions options() const {
    cg::CompareOptions o;
    select_metrics(metrics, o);
    o.precision = precision;
    o.k_avg = k_avg;
    o.normals.radius_multiplier = radius_multiplier;
    o.normalize = !no_normalize;
    o.max_skipped_fraction = max_skipped;
    if (projection == "source") {
      o.projection = cg::ProjectionNormal::kSourceSide;
    } else if (projection == "matched") {
      o.projection = cg::ProjectionNormal::kMatchedPoint;
    } else {
      throw cg::UsageError("--projection must be source or matched");
    }
    return o;
  }
};

Json header_json(const cg::OctreeHeader& h) {
  Json j;
  j["origin"] = {h.origin.x(), h.origin.y(), h.origin.z()};
  j["side"] = h.side;
  j["depth"] = h.depth;
  j["leaf_size"] = h.leaf_size();
  j["entropy"] = h.entropy == cg::EntropyMode::kRange ? "range" : "raw";
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cloudgauge: point cloud geometry quality toolkit"};
  app.require_subcommand(1);

  // encode
  std::string enc_in, enc_out, entropy = "raw";
  std::optional<int> enc_depth, enc_precision;
  auto* encode = app.add_subcommand("encode", "octree-encode a PLY cloud");
  encode->add_option("input", enc_in, "input PLY")->required();
  encode->add_option("output", enc_out, "output stream")->required();
  encode->add_option("--depth", enc_depth, "octree depth (default: the cloud's precision)")
      ->check(CLI::Range(1, cg::kMaxOctreeDepth));
  encode->add_option("--entropy", entropy, "raw or range")->capture_default_str();
  encode->add_option("--precision", enc_precision, "input bit depth")->check(CLI::Range(1, 30));

  // decode
  std::string dec_in, dec_out;
  bool dec_ascii = false;
  auto* decode = app.add_subcommand("decode", "decode an octree stream to PLY");
  decode->add_option("input", dec_in, "input stream")->required();
  decode->add_option("output", dec_out, "output PLY")->required();
  decode->add_flag("--ascii", dec_ascii, "write ascii PLY");

  // recolor
  std::string rc_ref, rc_deg, rc_out;
  int rc_neighbours = 1;
  std::optional<int> rc_precision;
  bool rc_ascii = false;
  auto* recolor = app.add_subcommand("recolor", "copy reference colors onto degraded points");
  recolor->add_option("reference", rc_ref, "colored reference PLY")->required();
  recolor->add_option("degraded", rc_deg, "degraded PLY")->required();
  recolor->add_option("output", rc_out, "output PLY")->required();
  recolor->add_option("--neighbours", rc_neighbours, "reference points averaged per degraded point")
      ->capture_default_str();
  recolor->add_option("--precision", rc_precision, "bit depth of both clouds")->check(CLI::Range(1, 30));
  recolor->add_flag("--ascii", rc_ascii, "write ascii PLY");

  // normals
  std::string nm_in, nm_out;
  double nm_mult = 4.0;
  std::optional<int> nm_precision;
  bool nm_no_orient = false, nm_ascii = false;
  auto* normals = app.add_subcommand("normals", "estimate and orient normals");
  normals->add_option("input", nm_in, "input PLY")->required();
  normals->add_option("output", nm_out, "output PLY with normals")->required();
  normals->add_option("--radius-multiplier", nm_mult, "search radius factor")->capture_default_str();
  normals->add_option("--precision", nm_precision, "input bit depth")->check(CLI::Range(1, 30));
  normals->add_flag("--no-orient", nm_no_orient, "skip MST orientation");
  normals->add_flag("--ascii", nm_ascii, "write ascii PLY");

  // compare
  std::string cmp_ref, cmp_deg, cmp_out, hist_out, hist_direction = "degraded_to_reference";
  int hist_bins = 0;
  bool estimate = false;
  MetricFlags cmp_flags;
  auto* cmpc = app.add_subcommand("compare", "full-reference geometry metrics");
  cmpc->add_option("reference", cmp_ref, "reference PLY")->required();
  cmpc->add_option("degraded", cmp_deg, "degraded PLY")->required();
  cmp_flags.attach(cmpc);
  cmpc->add_option("--output,-o", cmp_out, "JSON report path (default stdout)");
  cmpc->add_option("--hist", hist_bins, "point-to-point RMSE histogram bins");
  cmpc->add_option("--hist-out", hist_out, "histogram CSV path");
  cmpc->add_option("--hist-direction", hist_direction,
                   "degraded_to_reference or reference_to_degraded")
      ->capture_default_str();
  cmpc->add_flag("--estimate-normals", estimate, "ignore normals stored in the files");

  // evaluate
  std::string ev_manifest, ev_out, ev_residuals, ev_scores;
  MetricFlags ev_flags;
  auto* evaluate = app.add_subcommand("evaluate", "PLCC table over a dataset manifest");
  evaluate->add_option("manifest", ev_manifest, "manifest CSV")->required();
  ev_flags.attach(evaluate);
  evaluate->add_option("--output,-o", ev_out, "PLCC table CSV (default stdout)");
  evaluate->add_option("--residuals", ev_residuals, "prediction residuals CSV");
  evaluate->add_option("--scores", ev_scores, "per-stimulus scores CSV");

  // stats
  std::string st_scores, st_out;
  double st_alpha = 0.05, st_ralpha = 0.2;
  auto* stats = app.add_subcommand("stats", "significance tests over MOS and residuals");
  stats->add_option("scores", st_scores, "scores CSV")->required();
  stats->add_option("--alpha", st_alpha, "significance level of the MOS tests")->capture_default_str();
  stats->add_option("--residual-alpha", st_ralpha, "significance level of the residual F-tests")
      ->capture_default_str();
  stats->add_option("--output,-o", st_out, "JSON report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cg::Error::Category::kUsage);
  }

  try {
    if (*encode) {
      cg::EntropyMode mode;
      if (entropy == "raw") {
        mode = cg::EntropyMode::kRaw;
      } else if (entropy == "range") {
        mode = cg::EntropyMode::kRange;
      } else {
        throw cg::UsageError("--entropy must be raw or range");
      }
      const cg::PointCloud cloud = cg::read_ply(enc_in, enc_precision);
      if (!enc_depth && !cloud.precision()) {
        throw cg::UsageError("--depth is required when precision is unknown");
      }
      const int depth = enc_depth ? *enc_depth : *cloud.precision();
      const cg::OctreeStream stream = cg::octree_encode(cloud, depth, mode);
      const auto bytes = stream.serialize();
      write_text(enc_out, std::string(bytes.begin(), bytes.end()));
      const cg::Rate rate = cg::rate_bits(stream);
      Json j = header_json(stream.header);
      j["points"] = cloud.size();
      j["bytes"] = bytes.size();
      j["bits_per_point"] = rate.bits_per_input_point;
      write_text("", j.dump(2) + "\n");
    } else if (*decode) {
      const auto stream = cg::OctreeStream::parse(read_bytes(dec_in));
      const cg::PointCloud cloud = cg::octree_decode(stream);
      cg::write_ply(cloud, dec_out, ply_format(dec_ascii));
      Json j = header_json(stream.header);
      j["points"] = cloud.size();
      j["precision"] = cloud.precision() ? Json(*cloud.precision()) : Json(nullptr);
      write_text("", j.dump(2) + "\n");
    } else if (*recolor) {
      const auto p = rc_precision;
      const cg::PointCloud out = cg::recolor(cg::read_ply(rc_ref, p), cg::read_ply(rc_deg, p),
                                             cg::RecolorOptions{rc_neighbours});
      cg::write_ply(out, rc_out, ply_format(rc_ascii));
      Json j;
      j["points"] = out.size();
      write_text("", j.dump(2) + "\n");
    } else if (*normals) {
      const cg::PointCloud cloud = cg::read_ply(nm_in, nm_precision);
      cg::NormalEstimationOptions o;
      o.radius_multiplier = nm_mult;
      o.orient = !nm_no_orient;
      const cg::NormalField field = cg::compute_normals(cloud, o);
      cg::write_ply(cloud.with_normals(field.normals), nm_out, ply_format(nm_ascii));
      Json j;
      j["points"] = cloud.size();
      j["radius"] = field.radius;
      j["valid"] = field.valid_count();
      j["components"] = field.seeds.size();
      write_text("", j.dump(2) + "\n");
    } else if (*cmpc) {
      if (hist_bins < 0) throw cg::UsageError("--hist must be positive");
      if (hist_bins > 0 && hist_out.empty()) throw cg::UsageError("--hist needs --hist-out");
      cg::Direction hist_dir;
      if (hist_direction == "degraded_to_reference") {
        hist_dir = cg::Direction::kDegradedToReference;
      } else if (hist_direction == "reference_to_degraded") {
        hist_dir = cg::Direction::kReferenceToDegraded;
      } else {
        throw cg::UsageError("unknown --hist-direction");
      }
      const cg::CompareOptions options = cmp_flags.options();
      const cg::PointCloud reference = cg::read_ply(cmp_ref, options.precision);
      const cg::PointCloud degraded = cg::read_ply(cmp_deg, options.precision);
      std::optional<cg::NormalField> rn;
      std::optional<cg::NormalField> dn;
      if (!estimate && reference.has_normals()) rn = cg::NormalField::from_normals(reference.normals());
      if (!estimate && degraded.has_normals()) dn = cg::NormalField::from_normals(degraded.normals());
      const cg::MetricReport report =
          cg::compare(reference, degraded, options, rn ? &*rn : nullptr, dn ? &*dn : nullptr);
      write_text(cmp_out, cg::metric_report_json(report));
      if (hist_bins > 0) {
        const auto errors = cg::po2point_errors(reference, degraded, hist_dir);
        write_text(hist_out, cg::histogram_csv(cg::error_histogram(errors, hist_bins)));
      }
    } else if (*evaluate) {
      const cg::CompareOptions options = ev_flags.options();
      const auto rows = cg::read_manifest(ev_manifest);
      const auto records = cg::score_manifest(rows, options, [](const std::string& id) {
        std::clog << "scoring " << id << "\n";
      });
      const auto cells = cg::plcc_table(records);
      for (const auto& c : cells) {
        if (!c.evaluation) {
          std::clog << "warning: " << c.metric << " / " << c.rendering << " / " << c.grouping << ": "
                    << c.failure << "\n";
        } else if (!c.evaluation->fit.converged) {
          std::clog << "warning: " << c.metric << " / " << c.rendering << " / " << c.grouping
                    << ": logistic fit did not converge; best-so-far used\n";
        }
      }
      if (!ev_scores.empty()) write_text(ev_scores, cg::scores_csv(records));
      if (!ev_residuals.empty()) write_text(ev_residuals, cg::residuals_csv(cells));
      write_text(ev_out, cg::plcc_table_csv(cells));
    } else if (*stats) {
      cg::StatsOptions o;
      o.alpha = st_alpha;
      o.residual_alpha = st_ralpha;
      write_text(st_out, cg::significance_report(cg::read_scores(st_scores), o));
    }
  } catch (const cg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cg::Error::Category::kData);
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return static_cast<int>(cg::Error::Category::kNumeric);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cg::Error::Category::kNumeric);
  }
  return 0;
}
