#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdemap/mde.hpp"

namespace mdemap {

struct Station {
  std::string name;
  GeoPoint pos;
  int rank = 1;

  friend bool operator==(const Station&, const Station&) = default;
};

/// Throws kConfig on invalid positions, non-positive or duplicate ranks.
void validate_stations(std::span<const Station> stations);

struct TopKEntry {
  MeshId mesh;
  double entropy = 0.0;
  GeoPoint center;
};

struct TopKSelection {
  MeshScale scale{1.0};
  std::size_t k = 0;
  std::vector<TopKEntry> entries;  // descending entropy, ties by (row, col)
};

/// Throws kEmptyField when the field has no defined mesh, kConfig when k == 0.
TopKSelection top_k(const MdeField& field, std::size_t k, const AreaOfInterest& aoi);

struct RecallCurve {
  MeshScale scale{1.0};
  std::vector<double> radii_km;
  std::vector<std::size_t> counts;
};

/// Number of stations whose nearest selected mesh center lies within each radius.
RecallCurve recall_curve(const TopKSelection& selection, std::span<const Station> stations,
                         std::span<const double> radii_km);

struct PrecisionCurve {
  MeshScale scale{1.0};
  std::size_t x = 0;         // requested number of top meshes
  std::size_t selected = 0;  // meshes actually available (denominator)
  std::vector<double> thresholds_m;
  std::vector<double> percentages;
};

/// One curve per x: for each threshold, the percentage of the top-x meshes
/// whose center is within that distance of the nearest station.
std::vector<PrecisionCurve> precision_curve(const MdeField& field, const AreaOfInterest& aoi,
                                            std::span<const Station> stations,
                                            std::span<const double> thresholds_m,
                                            std::span<const std::size_t> x_values);

/// 300 for 100 m, 60 for 1 km, 60 for 2 km, 50 for 4 km; 50 for other scales.
std::size_t default_top_k(MeshScale scale);
std::vector<double> default_thresholds_m();
std::vector<double> default_radii_km();
/// 10, 20, ..., k (k appended when not a multiple of 10).
std::vector<std::size_t> default_x_values(std::size_t k);

}  // namespace mdemap
