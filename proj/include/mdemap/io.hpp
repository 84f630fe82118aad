#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mdemap/eval.hpp"
#include "mdemap/multiscale.hpp"

namespace mdemap {

/// `scale_m,col,row,center_lat,center_lon,count,entropy_nats,entropy_norm`,
/// rows sorted by (scale, row, col); undefined meshes leave the entropy columns
/// empty. Doubles use the shortest round-trip representation.
void write_field_csv(std::ostream& out, const MdeField& field, const AreaOfInterest& aoi);

/// Inverse of write_field_csv (the window is not stored and reads back as
/// all-time). Throws kParse on malformed input and kEmptyField for a file
/// with no rows.
MdeField read_field_csv(std::istream& in);

/// Field schema plus a trailing `score` column. count and entropy columns come
/// from `base_field` when it carries the mesh, and are empty otherwise.
void write_combined_csv(std::ostream& out, const CombinedMap& map, const MdeField* base_field,
                        const AreaOfInterest& aoi);

/// One row of a field or combined-map CSV.
struct GridRow {
  MeshId mesh;
  std::optional<std::uint64_t> count;
  std::optional<double> entropy;
  std::optional<double> entropy_norm;
  std::optional<double> score;
};

struct GridTable {
  bool has_score = false;
  std::vector<GridRow> rows;
};

GridTable read_grid_csv(std::istream& in);
CombinedMap combined_from_table(const GridTable& table);

/// FeatureCollection with one Polygon per mesh (closed 5-point ring,
/// counter-clockwise, [lon, lat]); properties scale_m, count, entropy_nats
/// and entropy_norm, or score for combined maps.
void write_geojson(std::ostream& out, const GridTable& table, const AreaOfInterest& aoi);

/// Header `name,lat,lon,rank`.
std::vector<Station> read_stations_csv(std::istream& in);
void write_stations_csv(std::ostream& out, std::span<const Station> stations);

void write_points(std::ostream& out, std::span<const TrajectoryPoint> points, PointFormat format);

/// `x,value`: radius in km, station count.
void write_recall_csv(std::ostream& out, const RecallCurve& curve);
/// `x,value` for one threshold: number of top meshes, percentage.
void write_precision_csv(std::ostream& out, std::span<const PrecisionCurve> curves,
                         std::size_t threshold_index);
/// `rank,col,row,center_lat,center_lon,entropy_nats`.
void write_top_k_csv(std::ostream& out, const TopKSelection& selection);
/// `rank,col,row,center_lat,center_lon,score`.
void write_peaks_csv(std::ostream& out, std::span<const MeshId> peaks, const ScoreMap& scores,
                     const AreaOfInterest& aoi);

}  // namespace mdemap
