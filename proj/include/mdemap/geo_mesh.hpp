#pragma once

#include <cstdint>
#include <numbers>
#include <tuple>
#include <vector>

#include "mdemap/error.hpp"

namespace mdemap {

inline constexpr double kEarthRadiusM = 6'371'000.0;
/// Arc length of one degree of latitude on the mean-radius sphere.
inline constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

struct GeoPoint {
  double lat = 0.0;  // degrees north
  double lon = 0.0;  // degrees east

  bool valid() const;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Meters east / north of the AOI south-west corner.
struct LocalCoord {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const LocalCoord&, const LocalCoord&) = default;
};

class AreaOfInterest {
 public:
  AreaOfInterest(GeoPoint south_west, GeoPoint north_east);

  static AreaOfInterest from_bounds(double lon_min, double lon_max, double lat_min,
                                    double lat_max);
  /// E139.3-140.0, N35.5-35.85 (central Tokyo).
  static AreaOfInterest tokyo();

  const GeoPoint& south_west() const { return sw_; }
  const GeoPoint& north_east() const { return ne_; }
  double mid_lat() const { return 0.5 * (sw_.lat + ne_.lat); }
  /// Meters per degree of longitude at the central latitude.
  double meters_per_lon_degree() const { return lon_scale_; }
  double width_m() const;
  double height_m() const;
  bool contains(const GeoPoint& p) const;

  friend bool operator==(const AreaOfInterest& a, const AreaOfInterest& b) {
    return a.sw_ == b.sw_ && a.ne_ == b.ne_;
  }

 private:
  GeoPoint sw_;
  GeoPoint ne_;
  double lon_scale_;
};

/// Side length of a square mesh, in meters.
class MeshScale {
 public:
  explicit MeshScale(double delta_m);

  double delta() const { return delta_; }
  /// True when `coarser` is a positive integer multiple of this scale.
  bool nests_in(MeshScale coarser) const;
  /// Integer ratio coarser/this; throws kInvalidScale when not nesting.
  std::int64_t ratio_to(MeshScale coarser) const;

  friend bool operator==(MeshScale a, MeshScale b) { return a.delta_ == b.delta_; }
  friend bool operator<(MeshScale a, MeshScale b) { return a.delta_ < b.delta_; }

 private:
  double delta_;
};

std::vector<MeshScale> default_scales();

/// Half-open square [col·Δ, (col+1)·Δ) × [row·Δ, (row+1)·Δ) in local space.
struct MeshId {
  MeshScale scale{1.0};
  std::int64_t col = 0;
  std::int64_t row = 0;

  friend bool operator==(const MeshId&, const MeshId&) = default;
  friend bool operator<(const MeshId& a, const MeshId& b) {
    if (!(a.scale == b.scale)) return a.scale < b.scale;
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  }
};

/// Equirectangular projection anchored at the AOI south-west corner.
/// Throws kOutOfArea when `p` is outside the AOI (boundary included).
LocalCoord project(const GeoPoint& p, const AreaOfInterest& aoi);
/// Same formula without the containment check.
LocalCoord to_local(const GeoPoint& p, const AreaOfInterest& aoi) noexcept;
GeoPoint inverse_project(const LocalCoord& c, const AreaOfInterest& aoi) noexcept;

MeshId mesh_of(const LocalCoord& c, MeshScale scale);
MeshId parent_of(const MeshId& mesh, MeshScale coarser);
GeoPoint mesh_center(const MeshId& mesh, const AreaOfInterest& aoi);

/// Haversine great-circle distance in meters.
double geo_distance(const GeoPoint& a, const GeoPoint& b);

}  // namespace mdemap
