#include "mdemap/eval.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace mdemap {

namespace {

std::vector<double> nearest_station_distances(std::span<const GeoPoint> points,
                                              std::span<const Station> stations) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : stations) best = std::min(best, geo_distance(p, s.pos));
    out.push_back(best);
  }
  return out;
}

void require_stations(std::span<const Station> stations) {
  if (stations.empty()) throw Error(ErrorKind::kConfig, "station list is empty");
}

}  // namespace

void validate_stations(std::span<const Station> stations) {
  std::set<int> ranks;
  for (const auto& s : stations) {
    if (!s.pos.valid()) throw Error(ErrorKind::kConfig, "station '" + s.name + "' has invalid coordinates");
    if (s.rank < 1) throw Error(ErrorKind::kConfig, "station '" + s.name + "' has a non-positive rank");
    if (!ranks.insert(s.rank).second) {
      throw Error(ErrorKind::kConfig, "duplicate station rank " + std::to_string(s.rank));
    }
  }
}

TopKSelection top_k(const MdeField& field, std::size_t k, const AreaOfInterest& aoi) {
  if (k == 0) throw Error(ErrorKind::kConfig, "k must be at least 1");
  std::vector<std::pair<MeshId, double>> defined;
  for (const auto& [id, stats] : field.entries) {
    if (stats.entropy) defined.emplace_back(id, *stats.entropy);
  }
  if (defined.empty()) throw Error(ErrorKind::kEmptyField, "field has no defined meshes");
  // entries are already in (row, col) order, so a stable sort keeps the tie rule
  std::stable_sort(defined.begin(), defined.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  defined.resize(std::min(k, defined.size()));

  TopKSelection sel{field.scale, k, {}};
  sel.entries.reserve(defined.size());
  for (const auto& [id, h] : defined) sel.entries.push_back({id, h, mesh_center(id, aoi)});
  return sel;
}

RecallCurve recall_curve(const TopKSelection& selection, std::span<const Station> stations,
                         std::span<const double> radii_km) {
  require_stations(stations);
  std::vector<double> nearest(stations.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < stations.size(); ++i) {
    for (const auto& e : selection.entries) {
      nearest[i] = std::min(nearest[i], geo_distance(stations[i].pos, e.center));
    }
  }
  RecallCurve curve{selection.scale, {radii_km.begin(), radii_km.end()}, {}};
  for (const double r : radii_km) {
    const double limit = r * 1000.0;
    curve.counts.push_back(static_cast<std::size_t>(
        std::count_if(nearest.begin(), nearest.end(), [&](double d) { return d <= limit; })));
  }
  return curve;
}

std::vector<PrecisionCurve> precision_curve(const MdeField& field, const AreaOfInterest& aoi,
                                            std::span<const Station> stations,
                                            std::span<const double> thresholds_m,
                                            std::span<const std::size_t> x_values) {
  require_stations(stations);
  if (x_values.empty()) return {};
  const std::size_t max_x = *std::max_element(x_values.begin(), x_values.end());
  const TopKSelection widest = top_k(field, max_x, aoi);

  std::vector<GeoPoint> centers;
  for (const auto& e : widest.entries) centers.push_back(e.center);
  const auto nearest = nearest_station_distances(centers, stations);

  std::vector<PrecisionCurve> curves;
  for (const std::size_t x : x_values) {
    if (x == 0) throw Error(ErrorKind::kConfig, "x values must be at least 1");
    const std::size_t n = std::min(x, nearest.size());
    PrecisionCurve c{field.scale, x, n, {thresholds_m.begin(), thresholds_m.end()}, {}};
    for (const double d : thresholds_m) {
      const auto hits = std::count_if(nearest.begin(), nearest.begin() + static_cast<long>(n),
                                      [&](double v) { return v <= d; });
      c.percentages.push_back(100.0 * static_cast<double>(hits) / static_cast<double>(n));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::size_t default_top_k(MeshScale scale) {
  const double d = scale.delta();
  if (d == 100.0) return 300;
  if (d == 1000.0 || d == 2000.0) return 60;
  return 50;
}

std::vector<double> default_thresholds_m() { return {100.0, 300.0, 1000.0, 2000.0}; }

std::vector<double> default_radii_km() {
  return {0.1, 0.2, 0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
}

std::vector<std::size_t> default_x_values(std::size_t k) {
  std::vector<std::size_t> xs;
  for (std::size_t x = 10; x <= k; x += 10) xs.push_back(x);
  if (xs.empty() || xs.back() != k) xs.push_back(k);
  return xs;
}

}  // namespace mdemap
