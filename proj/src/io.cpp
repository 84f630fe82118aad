#include "mdemap/io.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

#include "detail/text.hpp"

namespace mdemap {

namespace {

using detail::csv_escape;
using detail::format_double;
using detail::split_csv;
using detail::to_double;
using detail::to_int;
using detail::trim;

constexpr const char* kFieldHeader =
    "scale_m,col,row,center_lat,center_lon,count,entropy_nats,entropy_norm";

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
  throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + msg);
}

// Reads a header line and maps column names to positions.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      split_csv(line, fields_);
      for (std::size_t i = 0; i < fields_.size(); ++i) columns_[std::string(trim(fields_[i]))] = i;
      return;
    }
    header_missing_ = true;
  }

  bool header_missing() const { return header_missing_; }
  bool has(const std::string& name) const { return columns_.count(name) > 0; }
  void require(std::initializer_list<const char*> names) const {
    for (const char* n : names) {
      if (!has(n)) parse_fail(1, std::string("missing column '") + n + "'");
    }
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      if (!split_csv(line, fields_)) parse_fail(line_no_, "unterminated quote");
      return true;
    }
    if (in_.bad()) throw Error(ErrorKind::kIo, "read failure");
    return false;
  }

  std::size_t line_no() const { return line_no_; }

  std::string_view text(const std::string& name) const {
    const auto idx = columns_.at(name);
    if (idx >= fields_.size()) parse_fail(line_no_, "too few columns");
    return trim(fields_[idx]);
  }

  double number(const std::string& name) const {
    const auto v = to_double(text(name));
    if (!v) parse_fail(line_no_, "invalid number in column '" + name + "'");
    return *v;
  }

  std::optional<double> optional_number(const std::string& name) const {
    if (!has(name) || text(name).empty()) return std::nullopt;
    return number(name);
  }

  std::int64_t integer(const std::string& name) const {
    std::int64_t v = 0;
    if (!to_int(text(name), v)) parse_fail(line_no_, "invalid integer in column '" + name + "'");
    return v;
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
  std::vector<std::string> fields_;
  std::map<std::string, std::size_t> columns_;
  bool header_missing_ = false;
};

void write_grid_prefix(std::ostream& out, const MeshId& id, const AreaOfInterest& aoi) {
  const GeoPoint c = mesh_center(id, aoi);
  out << format_double(id.scale.delta()) << ',' << id.col << ',' << id.row << ','
      << format_double(c.lat) << ',' << format_double(c.lon) << ',';
}

}  // namespace

void write_field_csv(std::ostream& out, const MdeField& field, const AreaOfInterest& aoi) {
  out << kFieldHeader << '\n';
  for (const auto& [id, stats] : field.entries) {
    write_grid_prefix(out, id, aoi);
    out << stats.count << ',' << opt(stats.entropy) << ',' << opt(stats.normalized()) << '\n';
  }
}

GridTable read_grid_csv(std::istream& in) {
  CsvReader reader(in);
  GridTable table;
  if (reader.header_missing()) return table;
  reader.require({"scale_m", "col", "row"});
  table.has_score = reader.has("score");
  while (reader.next()) {
    GridRow row;
    const std::int64_t col = reader.integer("col");
    const std::int64_t r = reader.integer("row");
    if (col < 0 || r < 0) parse_fail(reader.line_no(), "negative mesh index");
    try {
      row.mesh = {MeshScale(reader.number("scale_m")), col, r};
    } catch (const Error& e) {
      parse_fail(reader.line_no(), e.what());
    }
    if (reader.has("count") && !reader.text("count").empty()) {
      std::uint64_t c = 0;
      if (!to_int(reader.text("count"), c)) parse_fail(reader.line_no(), "invalid count");
      row.count = c;
    }
    row.entropy = reader.optional_number("entropy_nats");
    row.entropy_norm = reader.optional_number("entropy_norm");
    row.score = reader.optional_number("score");
    table.rows.push_back(row);
  }
  return table;
}

MdeField read_field_csv(std::istream& in) {
  const GridTable table = read_grid_csv(in);
  if (table.rows.empty()) throw Error(ErrorKind::kEmptyField, "field file contains no meshes");
  MdeField field{table.rows.front().mesh.scale, TimeWindow::all(), {}};
  for (const auto& row : table.rows) {
    if (!(row.mesh.scale == field.scale)) {
      throw Error(ErrorKind::kParse, "field file mixes several mesh scales");
    }
    if (!row.count) throw Error(ErrorKind::kParse, "field row without a count");
    if (!field.entries.emplace(row.mesh, MeshStats{*row.count, row.entropy}).second) {
      throw Error(ErrorKind::kParse, "duplicate mesh in field file");
    }
  }
  return field;
}

void write_combined_csv(std::ostream& out, const CombinedMap& map, const MdeField* base_field,
                        const AreaOfInterest& aoi) {
  out << kFieldHeader << ",score\n";
  for (const auto& [id, score] : map.scores) {
    write_grid_prefix(out, id, aoi);
    const MeshStats* stats = nullptr;
    if (base_field && base_field->scale == id.scale) {
      const auto it = base_field->entries.find(id);
      if (it != base_field->entries.end()) stats = &it->second;
    }
    if (stats) {
      out << stats->count << ',' << opt(stats->entropy) << ',' << opt(stats->normalized());
    } else {
      out << ",,";
    }
    out << ',' << format_double(score) << '\n';
  }
}

CombinedMap combined_from_table(const GridTable& table) {
  if (!table.has_score) throw Error(ErrorKind::kParse, "grid file has no score column");
  if (table.rows.empty()) throw Error(ErrorKind::kEmptyField, "combined map contains no meshes");
  CombinedMap map{table.rows.front().mesh.scale, {}, {}};
  for (const auto& row : table.rows) {
    if (!row.score) continue;
    map.scores.emplace(row.mesh, *row.score);
  }
  return map;
}

void write_geojson(std::ostream& out, const GridTable& table, const AreaOfInterest& aoi) {
  using nlohmann::ordered_json;
  out << "{\"type\":\"FeatureCollection\",\"features\":[";
  bool first = true;
  for (const auto& row : table.rows) {
    const double d = row.mesh.scale.delta();
    const double x0 = static_cast<double>(row.mesh.col) * d;
    const double y0 = static_cast<double>(row.mesh.row) * d;
    const LocalCoord corners[] = {{x0, y0}, {x0 + d, y0}, {x0 + d, y0 + d}, {x0, y0 + d}, {x0, y0}};
    ordered_json ring = ordered_json::array();
    for (const auto& c : corners) {
      const GeoPoint g = inverse_project(c, aoi);
      ring.push_back({g.lon, g.lat});
    }

    ordered_json props;
    props["scale_m"] = d;
    props["col"] = row.mesh.col;
    props["row"] = row.mesh.row;
    props["count"] = row.count ? ordered_json(*row.count) : ordered_json(nullptr);
    const auto num = [](const std::optional<double>& v) {
      return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    if (table.has_score) {
      props["score"] = num(row.score);
    } else {
      props["entropy_nats"] = num(row.entropy);
      props["entropy_norm"] = num(row.entropy_norm);
    }

    ordered_json feature;
    feature["type"] = "Feature";
    feature["geometry"] = {{"type", "Polygon"}, {"coordinates", ordered_json::array({ring})}};
    feature["properties"] = std::move(props);
    out << (first ? "\n" : ",\n") << feature.dump();
    first = false;
  }
  out << "\n]}\n";
}

std::vector<Station> read_stations_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<Station> stations;
  if (reader.header_missing()) return stations;
  reader.require({"name", "lat", "lon", "rank"});
  while (reader.next()) {
    Station s;
    s.name = std::string(reader.text("name"));
    s.pos = {reader.number("lat"), reader.number("lon")};
    std::int64_t rank = 0;
    if (!to_int(reader.text("rank"), rank)) parse_fail(reader.line_no(), "invalid rank");
    s.rank = static_cast<int>(rank);
    stations.push_back(std::move(s));
  }
  validate_stations(stations);
  return stations;
}

void write_stations_csv(std::ostream& out, std::span<const Station> stations) {
  out << "name,lat,lon,rank\n";
  for (const auto& s : stations) {
    out << csv_escape(s.name) << ',' << format_double(s.pos.lat) << ','
        << format_double(s.pos.lon) << ',' << s.rank << '\n';
  }
}

void write_points(std::ostream& out, std::span<const TrajectoryPoint> points, PointFormat format) {
  if (format == PointFormat::kNdjson) {
    for (const auto& p : points) {
      nlohmann::ordered_json obj;
      obj["user_id"] = p.user_id;
      obj["timestamp"] = p.t;
      obj["lat"] = p.pos.lat;
      obj["lon"] = p.pos.lon;
      if (p.heading) obj["heading"] = *p.heading;
      if (p.speed) obj["speed"] = *p.speed;
      out << obj.dump() << '\n';
    }
    return;
  }
  bool extended = false;
  for (const auto& p : points) extended = extended || p.heading || p.speed;
  out << "user_id,timestamp,lat,lon" << (extended ? ",heading,speed" : "") << '\n';
  for (const auto& p : points) {
    out << csv_escape(p.user_id) << ',' << format_double(p.t) << ',' << format_double(p.pos.lat)
        << ',' << format_double(p.pos.lon);
    if (extended) out << ',' << opt(p.heading) << ',' << opt(p.speed);
    out << '\n';
  }
}

void write_recall_csv(std::ostream& out, const RecallCurve& curve) {
  out << "x,value\n";
  for (std::size_t i = 0; i < curve.radii_km.size(); ++i) {
    out << format_double(curve.radii_km[i]) << ',' << curve.counts[i] << '\n';
  }
}

void write_precision_csv(std::ostream& out, std::span<const PrecisionCurve> curves,
                         std::size_t threshold_index) {
  out << "x,value\n";
  for (const auto& c : curves) {
    out << c.x << ',' << format_double(c.percentages.at(threshold_index)) << '\n';
  }
}

void write_top_k_csv(std::ostream& out, const TopKSelection& selection) {
  out << "rank,col,row,center_lat,center_lon,entropy_nats\n";
  std::size_t rank = 1;
  for (const auto& e : selection.entries) {
    out << rank++ << ',' << e.mesh.col << ',' << e.mesh.row << ',' << format_double(e.center.lat)
        << ',' << format_double(e.center.lon) << ',' << format_double(e.entropy) << '\n';
  }
}

void write_peaks_csv(std::ostream& out, std::span<const MeshId> peaks, const ScoreMap& scores,
                     const AreaOfInterest& aoi) {
  out << "rank,col,row,center_lat,center_lon,score\n";
  std::size_t rank = 1;
  for (const auto& id : peaks) {
    const GeoPoint c = mesh_center(id, aoi);
    out << rank++ << ',' << id.col << ',' << id.row << ',' << format_double(c.lat) << ','
        << format_double(c.lon) << ',' << format_double(scores.at(id)) << '\n';
  }
}

}  // namespace mdemap
