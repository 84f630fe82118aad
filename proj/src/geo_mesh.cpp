#include "mdemap/geo_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mdemap {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string describe(const GeoPoint& p) {
  std::ostringstream os;
  os.precision(10);
  os << "(lat " << p.lat << ", lon " << p.lon << ")";
  return os.str();
}

// floor(value / step) for step > 0, corrected so that boundaries land in the
// higher cell even when the quotient rounds across an integer.
std::int64_t floor_div(double value, double step) {
  auto i = static_cast<std::int64_t>(std::floor(value / step));
  if (static_cast<double>(i) * step > value) {
    --i;
  } else if (static_cast<double>(i + 1) * step <= value) {
    ++i;
  }
  return i;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kOutOfArea: return "out-of-area";
    case ErrorKind::kInvalidScale: return "invalid-scale";
    case ErrorKind::kInvalidAngle: return "invalid-angle";
    case ErrorKind::kUndefinedDirection: return "undefined-direction";
    case ErrorKind::kEmptyHistogram: return "empty-histogram";
    case ErrorKind::kEmptyField: return "empty-field";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

bool GeoPoint::valid() const {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
         lon >= -180.0 && lon <= 180.0;
}

AreaOfInterest::AreaOfInterest(GeoPoint south_west, GeoPoint north_east)
    : sw_(south_west), ne_(north_east) {
  if (!sw_.valid() || !ne_.valid()) {
    throw Error(ErrorKind::kConfig, "AOI corners must be valid WGS84 coordinates");
  }
  if (!(ne_.lat > sw_.lat) || !(ne_.lon > sw_.lon)) {
    throw Error(ErrorKind::kConfig,
                "AOI north-east corner must lie strictly north and east of the south-west corner");
  }
  lon_scale_ = kMetersPerDegree * std::cos(mid_lat() * kDegToRad);
}

AreaOfInterest AreaOfInterest::from_bounds(double lon_min, double lon_max, double lat_min,
                                           double lat_max) {
  return AreaOfInterest({lat_min, lon_min}, {lat_max, lon_max});
}

AreaOfInterest AreaOfInterest::tokyo() { return from_bounds(139.3, 140.0, 35.5, 35.85); }

double AreaOfInterest::width_m() const { return (ne_.lon - sw_.lon) * lon_scale_; }

double AreaOfInterest::height_m() const { return (ne_.lat - sw_.lat) * kMetersPerDegree; }

bool AreaOfInterest::contains(const GeoPoint& p) const {
  return p.lat >= sw_.lat && p.lat <= ne_.lat && p.lon >= sw_.lon && p.lon <= ne_.lon;
}

MeshScale::MeshScale(double delta_m) : delta_(delta_m) {
  if (!std::isfinite(delta_m) || delta_m <= 0.0) {
    throw Error(ErrorKind::kInvalidScale, "mesh scale must be a positive finite length");
  }
}

bool MeshScale::nests_in(MeshScale coarser) const {
  const double ratio = coarser.delta_ / delta_;
  if (ratio < 1.0 - 1e-9) return false;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio;
}

std::int64_t MeshScale::ratio_to(MeshScale coarser) const {
  if (!nests_in(coarser)) {
    std::ostringstream os;
    os << "scale " << coarser.delta_ << " m is not an integer multiple of " << delta_ << " m";
    throw Error(ErrorKind::kInvalidScale, os.str());
  }
  return static_cast<std::int64_t>(std::llround(coarser.delta_ / delta_));
}

std::vector<MeshScale> default_scales() {
  return {MeshScale(100.0), MeshScale(1000.0), MeshScale(2000.0), MeshScale(4000.0)};
}

LocalCoord to_local(const GeoPoint& p, const AreaOfInterest& aoi) noexcept {
  const auto& sw = aoi.south_west();
  return {(p.lon - sw.lon) * aoi.meters_per_lon_degree(), (p.lat - sw.lat) * kMetersPerDegree};
}

LocalCoord project(const GeoPoint& p, const AreaOfInterest& aoi) {
  if (!aoi.contains(p)) {
    throw Error(ErrorKind::kOutOfArea, "point " + describe(p) + " lies outside the AOI");
  }
  return to_local(p, aoi);
}

GeoPoint inverse_project(const LocalCoord& c, const AreaOfInterest& aoi) noexcept {
  const auto& sw = aoi.south_west();
  return {sw.lat + c.y / kMetersPerDegree, sw.lon + c.x / aoi.meters_per_lon_degree()};
}

MeshId mesh_of(const LocalCoord& c, MeshScale scale) {
  if (!(c.x >= 0.0) || !(c.y >= 0.0) || !std::isfinite(c.x) || !std::isfinite(c.y)) {
    throw Error(ErrorKind::kOutOfArea, "local coordinate lies outside the AOI");
  }
  return {scale, floor_div(c.x, scale.delta()), floor_div(c.y, scale.delta())};
}

MeshId parent_of(const MeshId& mesh, MeshScale coarser) {
  const std::int64_t ratio = mesh.scale.ratio_to(coarser);
  return {coarser, mesh.col / ratio, mesh.row / ratio};
}

GeoPoint mesh_center(const MeshId& mesh, const AreaOfInterest& aoi) {
  if (mesh.col < 0 || mesh.row < 0) {
    throw Error(ErrorKind::kOutOfArea, "mesh indices must be non-negative");
  }
  const double d = mesh.scale.delta();
  return inverse_project({(static_cast<double>(mesh.col) + 0.5) * d,
                          (static_cast<double>(mesh.row) + 0.5) * d},
                         aoi);
}

double geo_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

}  // namespace mdemap
