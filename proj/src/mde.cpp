#include "mdemap/mde.hpp"

#include <algorithm>
#include <cmath>

namespace mdemap {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

int bin_of(double theta) {
  if (!std::isfinite(theta)) throw Error(ErrorKind::kInvalidAngle, "direction must be finite");
  if (theta < 0.0 || theta >= kTwoPi) {
    theta = std::fmod(theta, kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
  }
  const double scaled = theta * kDirectionBins / kTwoPi;
  int i = static_cast<int>(std::floor(scaled));
  return std::clamp(i, 0, kDirectionBins - 1);
}

double max_entropy() {
  static const double value = std::log(static_cast<double>(kDirectionBins));
  return value;
}

DirectionHistogram::DirectionHistogram(const Counts& counts) : counts_(counts) {
  for (const auto c : counts_) total_ += c;
}

void DirectionHistogram::merge(const DirectionHistogram& other) {
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

double entropy(const DirectionHistogram& h) {
  if (h.total() == 0) throw Error(ErrorKind::kEmptyHistogram, "entropy of an empty histogram");
  const double n = static_cast<double>(h.total());
  double sum = 0.0;
  for (const auto c : h.counts()) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    sum += p * std::log(p);
  }
  return std::clamp(-sum, 0.0, max_entropy());
}

std::vector<TimeWindow> tile_windows(std::span<const MovementVector> movements, double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw Error(ErrorKind::kConfig, "window width must be positive");
  }
  std::vector<double> starts;
  starts.reserve(movements.size());
  for (const auto& v : movements) starts.push_back(std::floor(v.t / width) * width);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  std::vector<TimeWindow> windows;
  windows.reserve(starts.size());
  for (const double s : starts) windows.push_back({s, s + width});
  return windows;
}

const DirectionHistogram* HistogramGrid::find(std::int64_t col, std::int64_t row) const {
  const auto it = cells_.find(key(col, row));
  return it == cells_.end() ? nullptr : &it->second;
}

void HistogramGrid::merge(const HistogramGrid& other) {
  if (!(other.scale_ == scale_)) {
    throw Error(ErrorKind::kInvalidScale, "cannot merge histogram grids of different scales");
  }
  for (const auto& [k, h] : other.cells_) cells_[k].merge(h);
}

HistogramGrid HistogramGrid::coarsen(MeshScale coarser) const {
  const std::int64_t ratio = scale_.ratio_to(coarser);
  HistogramGrid out(coarser);
  for (const auto& [k, h] : cells_) {
    const auto col = static_cast<std::int64_t>(k >> 32);
    const auto row = static_cast<std::int64_t>(k & 0xffffffffu);
    out.at(col / ratio, row / ratio).merge(h);
  }
  return out;
}

std::map<MeshId, DirectionHistogram> HistogramGrid::sorted() const {
  std::map<MeshId, DirectionHistogram> out;
  for (const auto& [k, h] : cells_) {
    out.emplace(MeshId{scale_, static_cast<std::int64_t>(k >> 32),
                       static_cast<std::int64_t>(k & 0xffffffffu)},
                h);
  }
  return out;
}

FieldAccumulator::FieldAccumulator(const AreaOfInterest& aoi, MeshScale scale, TimeWindow window)
    : aoi_(aoi), window_(window), grid_(scale) {
  if (!(window.start < window.end)) {
    throw Error(ErrorKind::kConfig, "time window must satisfy start < end");
  }
}

void FieldAccumulator::add(const MovementVector& v) {
  if (!window_.contains(v.t)) {
    ++outside_window_;
    return;
  }
  if (!aoi_.contains(v.origin)) {
    ++outside_area_;
    return;
  }
  const MeshId m = mesh_of(to_local(v.origin, aoi_), grid_.scale());
  grid_.at(m.col, m.row).add(bin_of(v.theta));
  ++routed_;
}

void FieldAccumulator::add(std::span<const MovementVector> movements) {
  for (const auto& v : movements) add(v);
}

void FieldAccumulator::merge(const FieldAccumulator& other) {
  if (!(other.aoi_ == aoi_) || !(other.window_ == window_)) {
    throw Error(ErrorKind::kConfig, "cannot merge accumulators over different AOIs or windows");
  }
  grid_.merge(other.grid_);
  routed_ += other.routed_;
  outside_window_ += other.outside_window_;
  outside_area_ += other.outside_area_;
}

std::optional<double> MeshStats::normalized() const {
  if (!entropy) return std::nullopt;
  return *entropy / max_entropy();
}

std::size_t MdeField::defined_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [](const auto& kv) { return kv.second.entropy.has_value(); }));
}

MdeField evaluate_field(const HistogramGrid& grid, const TimeWindow& window,
                        std::size_t min_samples) {
  if (min_samples < 1) throw Error(ErrorKind::kConfig, "min_samples must be at least 1");
  MdeField field{grid.scale(), window, {}};
  for (auto& [id, h] : grid.sorted()) {
    MeshStats stats{h.total(), std::nullopt};
    if (h.total() >= min_samples) stats.entropy = entropy(h);
    field.entries.emplace_hint(field.entries.end(), id, stats);
  }
  return field;
}

MdeField compute_field(std::span<const MovementVector> movements, const AreaOfInterest& aoi,
                       MeshScale scale, const TimeWindow& window, std::size_t min_samples,
                       RoutingStats* stats) {
  FieldAccumulator acc(aoi, scale, window);
  acc.add(movements);
  if (stats) *stats = {acc.routed(), acc.outside_window(), acc.outside_area()};
  return evaluate_field(acc.grid(), window, min_samples);
}

}  // namespace mdemap
