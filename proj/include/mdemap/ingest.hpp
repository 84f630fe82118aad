#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdemap/geo_mesh.hpp"

namespace mdemap {

struct TrajectoryPoint {
  std::string user_id;
  double t = 0.0;  // UTC seconds
  GeoPoint pos;
  std::optional<double> heading;  // radians in [0, 2π), same convention as MovementVector::theta
  std::optional<double> speed;    // m/s

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

enum class PointFormat { kCsv, kNdjson };

PointFormat parse_point_format(std::string_view name);

struct ParseOptions {
  /// Abort on the first malformed row instead of counting and skipping it.
  bool strict = false;
};

struct ParseResult {
  std::vector<TrajectoryPoint> points;
  std::size_t skipped = 0;
};

/// CSV header `user_id,timestamp,lat,lon[,heading,speed]` (any column order),
/// or NDJSON objects with the same keys.
ParseResult parse_points(std::istream& in, PointFormat format, const ParseOptions& options = {});

/// Unix seconds ("1596240000", "1596240000.5") or RFC 3339
/// ("2020-08-01T09:00:00+09:00"). Throws kParse.
double parse_timestamp(std::string_view text);

/// Direction of a displacement, anticlockwise from north: 0 = north,
/// π/2 = west, π = south, 3π/2 = east. Result in [0, 2π).
double direction_of(double dx_east, double dy_north);

enum class DirectionSource { kConsecutive, kHeading };

DirectionSource parse_direction_source(std::string_view name);

struct MovementVector {
  std::string user_id;
  double t = 0.0;  // timestamp of the later fix
  GeoPoint origin;
  double theta = 0.0;
  double displacement = 0.0;  // meters
  double duration = 0.0;      // seconds

  friend bool operator==(const MovementVector&, const MovementVector&) = default;
};

struct ExtractOptions {
  double min_displacement = 10.0;
  double max_gap = 1800.0;
  DirectionSource source = DirectionSource::kConsecutive;
};

struct ExtractStats {
  std::size_t duplicates = 0;       // repeated (user, t) fixes, first kept
  std::size_t dropped_short = 0;    // displacement below min_displacement
  std::size_t dropped_gap = 0;      // duration above max_gap
  std::size_t missing_heading = 0;  // heading mode only

  std::size_t dropped() const { return dropped_short + dropped_gap + missing_heading; }
};

struct ExtractResult {
  std::vector<MovementVector> vectors;  // sorted by (user_id, t)
  ExtractStats stats;
};

ExtractResult extract_movements(std::span<const TrajectoryPoint> points,
                                const AreaOfInterest& aoi, const ExtractOptions& options = {});

}  // namespace mdemap
