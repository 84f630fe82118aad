#include "mdemap/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>

#include <json.hpp>

#include "detail/text.hpp"

namespace mdemap {

namespace {

using detail::split_csv;
using detail::to_double;
using detail::to_int;
using detail::trim;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_point(const TrajectoryPoint& p) {
  if (p.user_id.empty()) throw Error(ErrorKind::kParse, "empty user_id");
  if (!std::isfinite(p.t)) throw Error(ErrorKind::kParse, "non-finite timestamp");
  if (!p.pos.valid()) throw Error(ErrorKind::kParse, "latitude/longitude out of range");
  if (p.heading && !(std::isfinite(*p.heading) && *p.heading >= 0.0 && *p.heading < kTwoPi)) {
    throw Error(ErrorKind::kParse, "heading outside [0, 2pi)");
  }
  if (p.speed && !(std::isfinite(*p.speed) && *p.speed >= 0.0)) {
    throw Error(ErrorKind::kParse, "speed must be a non-negative number");
  }
}

double required_number(std::string_view field, const char* name) {
  auto v = to_double(field);
  if (!v) throw Error(ErrorKind::kParse, std::string("invalid ") + name + " value");
  return *v;
}

std::optional<double> optional_number(std::string_view field, const char* name) {
  if (trim(field).empty()) return std::nullopt;
  return required_number(field, name);
}

struct CsvColumns {
  int user_id = -1;
  int timestamp = -1;
  int lat = -1;
  int lon = -1;
  int heading = -1;
  int speed = -1;
};

CsvColumns read_header(const std::vector<std::string>& names) {
  CsvColumns cols;
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    const auto name = trim(names[i]);
    if (name == "user_id") cols.user_id = i;
    else if (name == "timestamp") cols.timestamp = i;
    else if (name == "lat") cols.lat = i;
    else if (name == "lon") cols.lon = i;
    else if (name == "heading") cols.heading = i;
    else if (name == "speed") cols.speed = i;
  }
  if (cols.user_id < 0 || cols.timestamp < 0 || cols.lat < 0 || cols.lon < 0) {
    throw Error(ErrorKind::kParse,
                "line 1: CSV header must contain user_id,timestamp,lat,lon");
  }
  return cols;
}

TrajectoryPoint csv_row(const std::vector<std::string>& f, const CsvColumns& cols) {
  const auto width = static_cast<int>(f.size());
  const int needed = std::max({cols.user_id, cols.timestamp, cols.lat, cols.lon});
  if (width <= needed) throw Error(ErrorKind::kParse, "too few columns");
  TrajectoryPoint p;
  p.user_id = std::string(trim(f[cols.user_id]));
  p.t = parse_timestamp(f[cols.timestamp]);
  p.pos.lat = required_number(f[cols.lat], "lat");
  p.pos.lon = required_number(f[cols.lon], "lon");
  if (cols.heading >= 0 && cols.heading < width) p.heading = optional_number(f[cols.heading], "heading");
  if (cols.speed >= 0 && cols.speed < width) p.speed = optional_number(f[cols.speed], "speed");
  validate_point(p);
  return p;
}

std::optional<double> json_optional_number(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) return optional_number(it->get_ref<const std::string&>(), key);
  throw Error(ErrorKind::kParse, std::string("invalid ") + key + " value");
}

TrajectoryPoint json_row(std::string_view line) {
  const auto obj = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw Error(ErrorKind::kParse, "invalid JSON object");
  TrajectoryPoint p;
  const auto uid = obj.find("user_id");
  if (uid == obj.end()) throw Error(ErrorKind::kParse, "missing user_id");
  p.user_id = uid->is_string() ? uid->get<std::string>() : uid->dump();
  const auto ts = obj.find("timestamp");
  if (ts == obj.end()) throw Error(ErrorKind::kParse, "missing timestamp");
  if (ts->is_number()) p.t = ts->get<double>();
  else if (ts->is_string()) p.t = parse_timestamp(ts->get_ref<const std::string&>());
  else throw Error(ErrorKind::kParse, "invalid timestamp");
  auto lat = json_optional_number(obj, "lat");
  auto lon = json_optional_number(obj, "lon");
  if (!lat || !lon) throw Error(ErrorKind::kParse, "missing lat/lon");
  p.pos = {*lat, *lon};
  p.heading = json_optional_number(obj, "heading");
  p.speed = json_optional_number(obj, "speed");
  validate_point(p);
  return p;
}

[[noreturn]] void rethrow_with_line(const Error& e, std::size_t line_no) {
  throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
}

}  // namespace

PointFormat parse_point_format(std::string_view name) {
  if (name == "csv") return PointFormat::kCsv;
  if (name == "ndjson" || name == "jsonl") return PointFormat::kNdjson;
  throw Error(ErrorKind::kConfig, "unknown point format '" + std::string(name) + "'");
}

DirectionSource parse_direction_source(std::string_view name) {
  if (name == "consecutive") return DirectionSource::kConsecutive;
  if (name == "heading") return DirectionSource::kHeading;
  throw Error(ErrorKind::kConfig, "unknown direction source '" + std::string(name) + "'");
}

double parse_timestamp(std::string_view text) {
  const auto s = trim(text);
  if (auto v = to_double(s)) {
    if (!std::isfinite(*v)) throw Error(ErrorKind::kParse, "non-finite timestamp");
    return *v;
  }
  // YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)
  const auto fail = [&]() -> double {
    throw Error(ErrorKind::kParse, "unrecognised timestamp '" + std::string(s) + "'");
  };
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || s[13] != ':' || s[16] != ':') return fail();
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return fail();
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!to_int(s.substr(0, 4), year) || !to_int(s.substr(5, 2), month) ||
      !to_int(s.substr(8, 2), day) || !to_int(s.substr(11, 2), hour) ||
      !to_int(s.substr(14, 2), minute) || !to_int(s.substr(17, 2), second)) {
    return fail();
  }
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) return fail();

  std::size_t pos = 19;
  double fraction = 0.0;
  if (pos < s.size() && s[pos] == '.') {
    std::size_t end = pos + 1;
    while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
    if (end == pos + 1) return fail();
    fraction = *to_double(std::string("0") + std::string(s.substr(pos, end - pos)));
    pos = end;
  }
  if (pos >= s.size()) return fail();
  long offset_s = 0;
  const auto zone = s.substr(pos);
  if (zone == "Z" || zone == "z") {
    offset_s = 0;
  } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    unsigned oh = 0, om = 0;
    if (!to_int(zone.substr(1, 2), oh) || !to_int(zone.substr(4, 2), om) || oh > 23 || om > 59) {
      return fail();
    }
    offset_s = static_cast<long>(oh * 3600 + om * 60) * (zone[0] == '-' ? -1 : 1);
  } else {
    return fail();
  }
  const auto days = std::chrono::sys_days(ymd).time_since_epoch().count();
  const double whole = static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 +
                       second - static_cast<double>(offset_s);
  return whole + fraction;
}

ParseResult parse_points(std::istream& in, PointFormat format, const ParseOptions& options) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  std::optional<CsvColumns> cols;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (format == PointFormat::kCsv && !cols) {
      if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
      }
      split_csv(line, fields);
      cols = read_header(fields);
      continue;
    }
    try {
      if (format == PointFormat::kCsv) {
        if (!split_csv(line, fields)) throw Error(ErrorKind::kParse, "unterminated quote");
        result.points.push_back(csv_row(fields, *cols));
      } else {
        result.points.push_back(json_row(line));
      }
    } catch (const Error& e) {
      if (options.strict) rethrow_with_line(e, line_no);
      ++result.skipped;
    }
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "failed reading point input");
  return result;
}

double direction_of(double dx_east, double dy_north) {
  if (dx_east == 0.0 && dy_north == 0.0) {
    throw Error(ErrorKind::kUndefinedDirection, "direction of a zero displacement is undefined");
  }
  double theta = -std::atan2(dx_east, dy_north);
  if (theta < 0.0) theta += kTwoPi;
  // -0.0 and the rounding of tiny negatives onto 2π both belong to north
  if (theta >= kTwoPi || theta == 0.0) theta = 0.0;
  return theta;
}

ExtractResult extract_movements(std::span<const TrajectoryPoint> points,
                                const AreaOfInterest& aoi, const ExtractOptions& options) {
  ExtractResult result;
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Index is the final key so the first occurrence of a duplicate comes first.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = points[a];
    const auto& pb = points[b];
    if (const int c = pa.user_id.compare(pb.user_id); c != 0) return c < 0;
    if (pa.t != pb.t) return pa.t < pb.t;
    return a < b;
  });

  std::vector<std::size_t> unique;
  unique.reserve(order.size());
  for (const std::size_t idx : order) {
    if (!unique.empty()) {
      const auto& prev = points[unique.back()];
      if (prev.user_id == points[idx].user_id && prev.t == points[idx].t) {
        ++result.stats.duplicates;
        continue;
      }
    }
    unique.push_back(idx);
  }

  auto& out = result.vectors;
  if (options.source == DirectionSource::kHeading) {
    for (const std::size_t idx : unique) {
      const auto& p = points[idx];
      if (!p.heading) {
        ++result.stats.missing_heading;
        continue;
      }
      const double travelled = p.speed.value_or(0.0) * 1.0;
      out.push_back({p.user_id, p.t, p.pos, *p.heading,
                     std::max(travelled, options.min_displacement), 1.0});
    }
    return result;
  }

  for (std::size_t i = 1; i < unique.size(); ++i) {
    const auto& a = points[unique[i - 1]];
    const auto& b = points[unique[i]];
    if (a.user_id != b.user_id) continue;
    const double duration = b.t - a.t;
    if (duration > options.max_gap) {
      ++result.stats.dropped_gap;
      continue;
    }
    const LocalCoord la = to_local(a.pos, aoi);
    const LocalCoord lb = to_local(b.pos, aoi);
    const double dx = lb.x - la.x;
    const double dy = lb.y - la.y;
    const double displacement = std::hypot(dx, dy);
    if (displacement < options.min_displacement || displacement == 0.0) {
      ++result.stats.dropped_short;
      continue;
    }
    out.push_back({b.user_id, b.t, a.pos, direction_of(dx, dy), displacement, duration});
  }
  return result;
}

}  // namespace mdemap
