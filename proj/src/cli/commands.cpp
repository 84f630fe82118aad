#include "mdemap/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "../detail/text.hpp"
#include "mdemap/eval.hpp"
#include "mdemap/io.hpp"
#include "mdemap/multiscale.hpp"
#include "mdemap/synth.hpp"

namespace mdemap::cli {

namespace fs = std::filesystem;
using detail::format_double;

namespace {

/// Machine-readable record written next to every command's outputs.
struct Summary {
  std::string command;
  std::size_t points_read = 0;
  std::size_t points_skipped = 0;
  std::size_t vectors_extracted = 0;
  std::size_t vectors_dropped = 0;
  std::map<std::string, std::size_t> meshes_defined;
  nlohmann::json extra = nlohmann::json::object();
  std::vector<std::string> outputs;

  nlohmann::json to_json(int exit_code, const std::string& error) const {
    nlohmann::json j;
    j["command"] = command;
    j["exit_code"] = exit_code;
    if (!error.empty()) j["error"] = error;
    j["points_read"] = points_read;
    j["points_skipped"] = points_skipped;
    j["vectors_extracted"] = vectors_extracted;
    j["vectors_dropped"] = vectors_dropped;
    j["meshes_defined"] = meshes_defined;
    j["details"] = extra;
    j["outputs"] = outputs;
    return j;
  }
};

struct Common {
  std::vector<double> aoi{139.3, 140.0, 35.5, 35.85};
  std::string out_dir = ".";
};

struct ComputeOptions {
  std::string input;
  std::string format;
  std::vector<double> scales{100.0, 1000.0, 2000.0, 4000.0};
  std::string window = "all";
  double min_displacement = 10.0;
  double max_gap = 1800.0;
  std::size_t min_samples = kDefaultMinSamples;
  std::string direction = "consecutive";
  bool strict = false;
};

struct CombineOptions {
  std::vector<std::string> fields;
  std::string mode = "mean";
  double base_scale = 0.0;
  double peak_percentile = kDefaultPeakPercentile;
};

struct EvaluateOptions {
  std::vector<std::string> fields;
  std::string stations;
  std::vector<std::string> top_k;
  std::vector<double> radii = default_radii_km();
  std::vector<double> thresholds = default_thresholds_m();
  std::vector<std::size_t> x_values;
};

struct SynthOptions {
  std::uint64_t seed = 42;
  std::size_t users = 50'000;
  std::size_t fixes = 20;
  double background = 0.05;
  std::string format = "csv";
};

struct ExportOptions {
  std::string input;
  std::string output;
  std::string format = "geojson";
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::kConfig, msg); }

AreaOfInterest make_aoi(const std::vector<double>& v) {
  if (v.size() != 4) config_error("--aoi expects lon_min,lon_max,lat_min,lat_max");
  return AreaOfInterest::from_bounds(v[0], v[1], v[2], v[3]);
}

std::string scale_tag(MeshScale s) { return format_double(s.delta()) + "m"; }

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  return in;
}

template <typename Fn>
void write_file(const fs::path& path, Summary& summary, Fn&& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
  summary.outputs.push_back(path.filename().string());
}

void require_distinct(const std::vector<std::string>& inputs, const std::vector<fs::path>& outputs) {
  for (const auto& in : inputs) {
    std::error_code ec;
    for (const auto& out : outputs) {
      if (fs::exists(out, ec) && fs::equivalent(in, out, ec)) {
        config_error("output path '" + out.string() + "' would overwrite input '" + in + "'");
      }
    }
  }
}

std::vector<MeshScale> make_scales(const std::vector<double>& values) {
  if (values.empty()) config_error("--scales must list at least one scale");
  std::vector<MeshScale> scales;
  for (const double v : values) {
    if (!(v > 0.0)) config_error("--scales values must be positive");
    scales.emplace_back(v);
  }
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  return scales;
}

std::vector<MdeField> read_fields(const std::vector<std::string>& paths) {
  if (paths.empty()) config_error("--fields must name at least one field CSV");
  std::vector<MdeField> fields;
  for (const auto& p : paths) {
    auto in = open_in(p);
    fields.push_back(read_field_csv(in));
  }
  return fields;
}

void run_compute(const Common& common, const ComputeOptions& opt, Summary& summary) {
  const AreaOfInterest aoi = make_aoi(common.aoi);
  const auto scales = make_scales(opt.scales);
  if (!(opt.min_displacement > 0.0)) config_error("--min-displacement must be positive");
  if (!(opt.max_gap > 0.0)) config_error("--max-gap must be positive");
  if (opt.min_samples < 1) config_error("--min-samples must be positive");
  std::optional<double> window_width;
  if (opt.window != "all") {
    const auto w = detail::to_double(opt.window);
    if (!w || !(*w > 0.0)) config_error("--window must be 'all' or a positive number of seconds");
    window_width = *w;
  }
  std::string format = opt.format;
  if (format.empty()) {
    const auto ext = fs::path(opt.input).extension().string();
    format = (ext == ".ndjson" || ext == ".jsonl") ? "ndjson" : "csv";
  }
  const PointFormat point_format = parse_point_format(format);
  ExtractOptions extract;
  extract.min_displacement = opt.min_displacement;
  extract.max_gap = opt.max_gap;
  extract.source = parse_direction_source(opt.direction);

  const fs::path out_dir = prepare_out_dir(common.out_dir);
  auto in = open_in(opt.input);
  ParseOptions parse;
  parse.strict = opt.strict;
  const ParseResult parsed = parse_points(in, point_format, parse);
  summary.points_read = parsed.points.size();
  summary.points_skipped = parsed.skipped;

  const ExtractResult extracted = extract_movements(parsed.points, aoi, extract);
  summary.vectors_extracted = extracted.vectors.size();
  summary.vectors_dropped = extracted.stats.dropped();
  summary.extra["duplicate_fixes"] = extracted.stats.duplicates;
  summary.extra["dropped_short"] = extracted.stats.dropped_short;
  summary.extra["dropped_gap"] = extracted.stats.dropped_gap;
  summary.extra["missing_heading"] = extracted.stats.missing_heading;

  if (parsed.points.empty()) throw Error(ErrorKind::kEmptyField, "input contains no valid points");
  if (extracted.vectors.empty()) throw Error(ErrorKind::kEmptyField, "no movement vectors could be extracted");

  std::vector<TimeWindow> windows{TimeWindow::all()};
  if (window_width) windows = tile_windows(extracted.vectors, *window_width);

  std::vector<std::pair<fs::path, MdeField>> fields;
  std::size_t any_defined = 0;
  for (const auto& scale : scales) {
    std::size_t defined = 0;
    for (const auto& window : windows) {
      RoutingStats routing;
      MdeField field = compute_field(extracted.vectors, aoi, scale, window, opt.min_samples, &routing);
      defined += field.defined_count();
      summary.extra["outside_area"] = routing.outside_area;
      std::string name = "field_" + scale_tag(scale);
      if (!window.is_all()) name += "_t" + format_double(window.start);
      fields.emplace_back(out_dir / (name + ".csv"), std::move(field));
    }
    summary.meshes_defined[format_double(scale.delta())] = defined;
    any_defined += defined;
  }
  if (any_defined == 0) {
    throw Error(ErrorKind::kEmptyField, "no mesh reached min_samples at any scale");
  }
  std::vector<fs::path> outputs;
  for (const auto& f : fields) outputs.push_back(f.first);
  require_distinct({opt.input}, outputs);
  for (const auto& [path, field] : fields) {
    write_file(path, summary, [&](std::ostream& os) { write_field_csv(os, field, aoi); });
  }
}

void run_combine(const Common& common, const CombineOptions& opt, Summary& summary) {
  const AreaOfInterest aoi = make_aoi(common.aoi);
  const CombineMode mode = parse_combine_mode(opt.mode);
  if (!(opt.peak_percentile >= 0.0 && opt.peak_percentile <= 100.0)) {
    config_error("--peak-percentile must be in [0, 100]");
  }
  const fs::path out_dir = prepare_out_dir(common.out_dir);
  const auto fields = read_fields(opt.fields);

  std::vector<NormalizedLayer> layers;
  MeshScale base = fields.front().scale;
  for (const auto& f : fields) {
    summary.meshes_defined[format_double(f.scale.delta())] = f.defined_count();
    if (f.scale < base) base = f.scale;
    if (f.defined_count() == 0) continue;
    layers.push_back(normalize(f));
  }
  if (opt.base_scale > 0.0) base = MeshScale(opt.base_scale);
  if (layers.empty()) throw Error(ErrorKind::kEmptyField, "no field has a defined mesh");

  const CombinedMap map = combine(layers, base, mode);
  const auto peaks = find_local_peaks(map, opt.peak_percentile);
  const MdeField* base_field = nullptr;
  for (const auto& f : fields) {
    if (f.scale == base) base_field = &f;
  }
  summary.extra["combined_meshes"] = map.scores.size();
  summary.extra["peaks"] = peaks.size();
  summary.extra["base_scale_m"] = base.delta();
  summary.extra["mode"] = opt.mode;

  const auto combined_path = out_dir / "combined.csv";
  const auto peaks_path = out_dir / "peaks.csv";
  require_distinct(opt.fields, {combined_path, peaks_path});
  write_file(combined_path, summary,
             [&](std::ostream& os) { write_combined_csv(os, map, base_field, aoi); });
  write_file(peaks_path, summary,
             [&](std::ostream& os) { write_peaks_csv(os, peaks, map.scores, aoi); });
}

std::map<double, std::size_t> parse_top_k(const std::vector<std::string>& items) {
  std::map<double, std::size_t> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    std::size_t k = 0;
    const auto scale = detail::to_double(item.substr(0, eq));
    if (eq == std::string::npos || !scale || !detail::to_int(item.substr(eq + 1), k) || k == 0) {
      config_error("--top-k expects scale=K pairs, got '" + item + "'");
    }
    out[*scale] = k;
  }
  return out;
}

void run_evaluate(const Common& common, const EvaluateOptions& opt, Summary& summary) {
  const AreaOfInterest aoi = make_aoi(common.aoi);
  const auto k_overrides = parse_top_k(opt.top_k);
  if (opt.stations.empty()) config_error("--stations is required");
  for (const double r : opt.radii) {
    if (!(r > 0.0)) config_error("--radii must be positive");
  }
  for (const double d : opt.thresholds) {
    if (!(d > 0.0)) config_error("--thresholds must be positive");
  }
  const fs::path out_dir = prepare_out_dir(common.out_dir);
  auto station_in = open_in(opt.stations);
  const auto stations = read_stations_csv(station_in);
  if (stations.empty()) throw Error(ErrorKind::kEmptyField, "station file lists no stations");
  const auto fields = read_fields(opt.fields);

  nlohmann::json ks = nlohmann::json::object();
  std::vector<std::pair<fs::path, std::function<void(std::ostream&)>>> writers;
  for (const auto& field : fields) {
    const std::string tag = scale_tag(field.scale);
    summary.meshes_defined[format_double(field.scale.delta())] = field.defined_count();
    const auto it = k_overrides.find(field.scale.delta());
    const std::size_t k = it != k_overrides.end() ? it->second : default_top_k(field.scale);
    ks[format_double(field.scale.delta())] = k;

    auto selection = std::make_shared<TopKSelection>(top_k(field, k, aoi));
    auto recall = std::make_shared<RecallCurve>(recall_curve(*selection, stations, opt.radii));
    const auto xs = opt.x_values.empty() ? default_x_values(k) : opt.x_values;
    auto precision = std::make_shared<std::vector<PrecisionCurve>>(
        precision_curve(field, aoi, stations, opt.thresholds, xs));

    writers.emplace_back(out_dir / ("topk_" + tag + ".csv"),
                         [selection](std::ostream& os) { write_top_k_csv(os, *selection); });
    writers.emplace_back(out_dir / ("recall_" + tag + ".csv"),
                         [recall](std::ostream& os) { write_recall_csv(os, *recall); });
    for (std::size_t ti = 0; ti < opt.thresholds.size(); ++ti) {
      writers.emplace_back(
          out_dir / ("precision_" + tag + "_" + format_double(opt.thresholds[ti]) + "m.csv"),
          [precision, ti](std::ostream& os) { write_precision_csv(os, *precision, ti); });
    }
  }
  summary.extra["top_k"] = ks;
  summary.extra["thresholds_m"] = opt.thresholds;
  summary.extra["radii_km"] = opt.radii;
  summary.extra["stations"] = stations.size();

  std::vector<std::string> inputs = opt.fields;
  inputs.push_back(opt.stations);
  std::vector<fs::path> outputs;
  for (const auto& w : writers) outputs.push_back(w.first);
  require_distinct(inputs, outputs);
  for (const auto& [path, fn] : writers) write_file(path, summary, fn);
}

void run_synth(const Common& common, const SynthOptions& opt, Summary& summary) {
  SynthConfig cfg = SynthConfig::defaults();
  const AreaOfInterest aoi = make_aoi(common.aoi);
  if (!(aoi == cfg.aoi)) {
    // Planted regions are laid out for the default AOI; re-anchor them by
    // their relative position inside the requested one.
    const auto move = [&](GeoPoint p) {
      const double fx = (p.lon - cfg.aoi.south_west().lon) / (cfg.aoi.north_east().lon - cfg.aoi.south_west().lon);
      const double fy = (p.lat - cfg.aoi.south_west().lat) / (cfg.aoi.north_east().lat - cfg.aoi.south_west().lat);
      return GeoPoint{aoi.south_west().lat + fy * (aoi.north_east().lat - aoi.south_west().lat),
                      aoi.south_west().lon + fx * (aoi.north_east().lon - aoi.south_west().lon)};
    };
    for (auto& h : cfg.hubs) h.center = move(h.center);
    for (auto& c : cfg.corridors) c.center = move(c.center);
    cfg.aoi = aoi;
  }
  cfg.seed = opt.seed;
  cfg.n_users = opt.users;
  cfg.fixes_per_user = opt.fixes;
  cfg.background_rate = opt.background;
  const PointFormat format = parse_point_format(opt.format);

  const fs::path out_dir = prepare_out_dir(common.out_dir);
  const SynthOutput generated = generate(cfg);
  summary.points_read = 0;
  summary.extra["points_written"] = generated.points.size();
  summary.extra["seed"] = cfg.seed;
  summary.extra["hubs"] = cfg.hubs.size();
  summary.extra["corridors"] = cfg.corridors.size();

  const auto points_path =
      out_dir / (format == PointFormat::kCsv ? "points.csv" : "points.ndjson");
  write_file(points_path, summary,
             [&](std::ostream& os) { write_points(os, generated.points, format); });
  const auto stations = generated.truth.as_stations();
  write_file(out_dir / "stations.csv", summary,
             [&](std::ostream& os) { write_stations_csv(os, stations); });
}

void run_export(const Common& common, const ExportOptions& opt, Summary& summary) {
  const AreaOfInterest aoi = make_aoi(common.aoi);
  if (opt.format != "geojson") config_error("export supports --format geojson only");
  const fs::path out_dir = prepare_out_dir(common.out_dir);
  auto in = open_in(opt.input);
  const GridTable table = read_grid_csv(in);
  if (table.rows.empty()) throw Error(ErrorKind::kEmptyField, "grid file contains no meshes");
  std::map<std::string, std::size_t> defined;
  for (const auto& row : table.rows) {
    if (row.entropy || row.score) ++defined[format_double(row.mesh.scale.delta())];
  }
  summary.meshes_defined = defined;
  summary.extra["features"] = table.rows.size();

  const fs::path out = opt.output.empty()
                           ? out_dir / (fs::path(opt.input).stem().string() + ".geojson")
                           : fs::path(opt.output);
  require_distinct({opt.input}, {out});
  write_file(out, summary, [&](std::ostream& os) { write_geojson(os, table, aoi); });
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--aoi", common.aoi, "lon_min,lon_max,lat_min,lat_max")
      ->delimiter(',')
      ->expected(4)
      ->capture_default_str();
  sub->add_option("-o,--out-dir", common.out_dir, "Output directory")->capture_default_str();
}

void write_summary(const std::string& out_dir, const Summary& summary, int code,
                   const std::string& error) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) return;
  std::ofstream out(fs::path(out_dir) / (summary.command + "_summary.json"), std::ios::trunc);
  if (out) out << summary.to_json(code, error).dump(2) << '\n';
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidScale:
      return kExitUsage;
    case ErrorKind::kIo:
      return kExitIo;
    default:
      return kExitData;
  }
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Multiscale moving-direction entropy maps from GPS trajectories", "mdemap"};
  app.set_config("--config", "", "Keyed configuration file (TOML/INI); flags take precedence");
  app.require_subcommand(1);

  Common common;
  ComputeOptions compute;
  CombineOptions combine_opt;
  EvaluateOptions evaluate;
  SynthOptions synth;
  ExportOptions export_opt;

  auto* c = app.add_subcommand("compute", "Compute one MDE field CSV per scale from a points file");
  add_common(c, common);
  c->add_option("-i,--input", compute.input, "Points file (CSV or NDJSON)")->required();
  c->add_option("--format", compute.format, "csv|ndjson (default: from extension)");
  c->add_option("--scales", compute.scales, "Mesh sizes in meters")->delimiter(',')->capture_default_str();
  c->add_option("--window", compute.window, "all, or a window width in seconds")->capture_default_str();
  c->add_option("--min-displacement", compute.min_displacement, "Meters")->capture_default_str();
  c->add_option("--max-gap", compute.max_gap, "Seconds")->capture_default_str();
  c->add_option("--min-samples", compute.min_samples, "Samples needed for a defined mesh")->capture_default_str();
  c->add_option("--direction", compute.direction, "consecutive|heading")->capture_default_str();
  c->add_flag("--strict", compute.strict, "Abort on the first malformed row");

  auto* m = app.add_subcommand("combine", "Fuse per-scale fields into one map and extract peaks");
  add_common(m, common);
  m->add_option("--fields", combine_opt.fields, "Field CSVs")->required()->delimiter(',');
  m->add_option("--mode", combine_opt.mode, "mean|max")->capture_default_str();
  m->add_option("--base-scale", combine_opt.base_scale, "Base grid in meters (default: finest field)");
  m->add_option("--peak-percentile", combine_opt.peak_percentile, "Percentile floor for peaks")->capture_default_str();

  auto* e = app.add_subcommand("evaluate", "Recall and precision curves against a station list");
  add_common(e, common);
  e->add_option("--fields", evaluate.fields, "Field CSVs")->required()->delimiter(',');
  e->add_option("--stations", evaluate.stations, "Stations CSV (name,lat,lon,rank)")->required();
  e->add_option("--top-k", evaluate.top_k, "scale=K overrides, e.g. 100=300,1000=60")->delimiter(',');
  e->add_option("--radii", evaluate.radii, "Recall radii in km")->delimiter(',')->capture_default_str();
  e->add_option("--thresholds", evaluate.thresholds, "Precision thresholds in meters")->delimiter(',')->capture_default_str();
  e->add_option("--x-values", evaluate.x_values, "Top-mesh counts for precision (default 10,20,...,K)")->delimiter(',');

  auto* s = app.add_subcommand("synth", "Generate synthetic trajectories with planted hubs");
  add_common(s, common);
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--users", synth.users)->capture_default_str();
  s->add_option("--fixes", synth.fixes, "Fixes per user")->capture_default_str();
  s->add_option("--background", synth.background, "Fraction of uniformly placed fixes")->capture_default_str();
  s->add_option("--format", synth.format, "csv|ndjson")->capture_default_str();

  auto* x = app.add_subcommand("export", "Convert a field or combined CSV to GeoJSON");
  add_common(x, common);
  x->add_option("-i,--input", export_opt.input, "Field or combined CSV")->required();
  x->add_option("--output", export_opt.output, "GeoJSON path (default: <out-dir>/<input stem>.geojson)");
  x->add_option("--format", export_opt.format, "geojson")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Summary summary;
  summary.command = app.get_subcommands().front()->get_name();
  int code = kExitOk;
  std::string message;
  try {
    if (*c) run_compute(common, compute, summary);
    else if (*m) run_combine(common, combine_opt, summary);
    else if (*e) run_evaluate(common, evaluate, summary);
    else if (*s) run_synth(common, synth, summary);
    else if (*x) run_export(common, export_opt, summary);
  } catch (const Error& err) {
    code = exit_code_for(err.kind());
    message = err.what();
  } catch (const std::exception& err) {
    code = kExitData;
    message = err.what();
  }
  if (code != kExitOk) std::cerr << "mdemap " << summary.command << ": " << message << '\n';
  write_summary(common.out_dir, summary, code, message);
  return code;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mdemap"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mdemap::cli
