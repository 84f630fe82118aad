#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mdemap/geo_mesh.hpp"
#include "mdemap/ingest.hpp"

namespace mdemap {

inline constexpr int kDirectionBins = 100;

/// Bin index of a direction; bin i covers [iπ/50, (i+1)π/50). Angles are
/// reduced mod 2π first. Throws kInvalidAngle for non-finite input.
int bin_of(double theta);

/// ln 100, the entropy of a uniform direction distribution.
double max_entropy();

class DirectionHistogram {
 public:
  using Counts = std::array<std::uint32_t, kDirectionBins>;

  DirectionHistogram() = default;
  explicit DirectionHistogram(const Counts& counts);

  void add(int bin, std::uint32_t n = 1) {
    counts_[static_cast<std::size_t>(bin)] += n;
    total_ += n;
  }
  void merge(const DirectionHistogram& other);

  const Counts& counts() const { return counts_; }
  std::uint32_t count(int bin) const { return counts_[static_cast<std::size_t>(bin)]; }
  std::uint64_t total() const { return total_; }

  friend bool operator==(const DirectionHistogram&, const DirectionHistogram&) = default;

 private:
  Counts counts_{};
  std::uint64_t total_ = 0;
};

/// Shannon entropy in nats with 0·ln 0 = 0. Throws kEmptyHistogram when the
/// histogram has no samples.
double entropy(const DirectionHistogram& h);

/// Half-open [start, end). all() spans the whole dataset.
struct TimeWindow {
  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();

  static TimeWindow all() { return {}; }
  bool is_all() const { return std::isinf(start) && std::isinf(end); }
  bool contains(double t) const { return t >= start && t < end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Epoch-aligned windows [k·width, (k+1)·width) that contain at least one vector.
std::vector<TimeWindow> tile_windows(std::span<const MovementVector> movements, double width);

/// Sparse per-mesh direction histograms at one scale.
class HistogramGrid {
 public:
  explicit HistogramGrid(MeshScale scale) : scale_(scale) {}

  MeshScale scale() const { return scale_; }
  std::size_t size() const { return cells_.size(); }

  DirectionHistogram& at(std::int64_t col, std::int64_t row) { return cells_[key(col, row)]; }
  const DirectionHistogram* find(std::int64_t col, std::int64_t row) const;
  void merge(const HistogramGrid& other);
  /// Parent histograms formed by element-wise summation of children.
  HistogramGrid coarsen(MeshScale coarser) const;
  std::map<MeshId, DirectionHistogram> sorted() const;

  friend bool operator==(const HistogramGrid& a, const HistogramGrid& b) {
    return a.scale_ == b.scale_ && a.cells_ == b.cells_;
  }

 private:
  static std::uint64_t key(std::int64_t col, std::int64_t row) {
    return (static_cast<std::uint64_t>(col) << 32) | static_cast<std::uint32_t>(row);
  }

  MeshScale scale_;
  std::unordered_map<std::uint64_t, DirectionHistogram> cells_;
};

/// Routes movement vectors into per-mesh histograms. Accumulators over
/// disjoint chunks merge by element-wise addition, so results do not depend
/// on how the input was split.
class FieldAccumulator {
 public:
  FieldAccumulator(const AreaOfInterest& aoi, MeshScale scale,
                   TimeWindow window = TimeWindow::all());

  void add(const MovementVector& v);
  void add(std::span<const MovementVector> movements);
  void merge(const FieldAccumulator& other);

  MeshScale scale() const { return grid_.scale(); }
  const TimeWindow& window() const { return window_; }
  const HistogramGrid& grid() const { return grid_; }
  std::size_t routed() const { return routed_; }
  std::size_t outside_window() const { return outside_window_; }
  std::size_t outside_area() const { return outside_area_; }

 private:
  AreaOfInterest aoi_;
  TimeWindow window_;
  HistogramGrid grid_;
  std::size_t routed_ = 0;
  std::size_t outside_window_ = 0;
  std::size_t outside_area_ = 0;
};

struct MeshStats {
  std::uint64_t count = 0;
  std::optional<double> entropy;  // nats; empty when count < min_samples

  /// entropy / ln 100.
  std::optional<double> normalized() const;
  friend bool operator==(const MeshStats&, const MeshStats&) = default;
};

struct MdeField {
  MeshScale scale{1.0};
  TimeWindow window;
  std::map<MeshId, MeshStats> entries;

  std::size_t defined_count() const;
  friend bool operator==(const MdeField&, const MdeField&) = default;
};

inline constexpr std::size_t kDefaultMinSamples = 30;

MdeField evaluate_field(const HistogramGrid& grid, const TimeWindow& window,
                        std::size_t min_samples = kDefaultMinSamples);

struct RoutingStats {
  std::size_t routed = 0;
  std::size_t outside_window = 0;
  std::size_t outside_area = 0;
};

MdeField compute_field(std::span<const MovementVector> movements, const AreaOfInterest& aoi,
                       MeshScale scale, const TimeWindow& window = TimeWindow::all(),
                       std::size_t min_samples = kDefaultMinSamples,
                       RoutingStats* stats = nullptr);

}  // namespace mdemap
