#include "mdemap/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace mdemap {

NormalizedLayer normalize(const MdeField& field) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [id, stats] : field.entries) {
    if (!stats.entropy) continue;
    lo = std::min(lo, *stats.entropy);
    hi = std::max(hi, *stats.entropy);
  }
  if (lo > hi) throw Error(ErrorKind::kEmptyField, "field has no defined meshes to normalize");

  NormalizedLayer layer{field.scale, {}};
  const double span = hi - lo;
  for (const auto& [id, stats] : field.entries) {
    if (!stats.entropy) continue;
    const double v = span > 0.0 ? (*stats.entropy - lo) / span : 0.5;
    layer.values.emplace_hint(layer.values.end(), id, v);
  }
  return layer;
}

CombineMode parse_combine_mode(std::string_view name) {
  if (name == "mean") return CombineMode::kMean;
  if (name == "max") return CombineMode::kMax;
  throw Error(ErrorKind::kConfig, "unknown combine mode '" + std::string(name) + "'");
}

CombinedMap combine(std::span<const NormalizedLayer> layers, MeshScale base_scale,
                    CombineMode mode) {
  if (layers.empty()) throw Error(ErrorKind::kEmptyField, "combine needs at least one layer");

  std::vector<std::int64_t> ratios;
  CombinedMap out{base_scale, {}, {}};
  for (const auto& layer : layers) {
    ratios.push_back(base_scale.ratio_to(layer.scale));
    out.contributing_scales.push_back(layer.scale);
  }

  std::set<std::pair<std::int64_t, std::int64_t>> candidates;  // (row, col)
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const std::int64_t r = ratios[li];
    for (const auto& [id, v] : layers[li].values) {
      for (std::int64_t row = id.row * r; row < (id.row + 1) * r; ++row) {
        for (std::int64_t col = id.col * r; col < (id.col + 1) * r; ++col) {
          candidates.emplace(row, col);
        }
      }
    }
  }

  for (const auto& [row, col] : candidates) {
    double acc = mode == CombineMode::kMax ? -std::numeric_limits<double>::infinity() : 0.0;
    std::size_t n = 0;
    for (std::size_t li = 0; li < layers.size(); ++li) {
      const MeshId ancestor{layers[li].scale, col / ratios[li], row / ratios[li]};
      const auto it = layers[li].values.find(ancestor);
      if (it == layers[li].values.end()) continue;
      acc = mode == CombineMode::kMax ? std::max(acc, it->second) : acc + it->second;
      ++n;
    }
    if (n == 0) continue;
    const double score = mode == CombineMode::kMax ? acc : acc / static_cast<double>(n);
    out.scores.emplace_hint(out.scores.end(), MeshId{base_scale, col, row}, score);
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::kEmptyField, "percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw Error(ErrorKind::kConfig, "percentile must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<MeshId> find_local_peaks(const ScoreMap& scores, double percentile_floor) {
  if (scores.empty()) return {};
  std::vector<double> all;
  all.reserve(scores.size());
  for (const auto& [id, v] : scores) all.push_back(v);
  const double floor_value = percentile(std::move(all), percentile_floor);

  std::vector<std::pair<MeshId, double>> peaks;
  for (const auto& [id, v] : scores) {
    if (v < floor_value) continue;
    bool is_peak = true;
    for (std::int64_t dr = -1; dr <= 1 && is_peak; ++dr) {
      for (std::int64_t dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const auto it = scores.find(MeshId{id.scale, id.col + dc, id.row + dr});
        if (it != scores.end() && !(v > it->second)) {
          is_peak = false;
          break;
        }
      }
    }
    if (is_peak) peaks.emplace_back(id, v);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<MeshId> out;
  out.reserve(peaks.size());
  for (const auto& [id, v] : peaks) out.push_back(id);
  return out;
}

std::vector<MeshId> find_local_peaks(const CombinedMap& map, double percentile_floor) {
  return find_local_peaks(map.scores, percentile_floor);
}

std::vector<MeshId> find_local_peaks(const NormalizedLayer& layer, double percentile_floor) {
  return find_local_peaks(layer.values, percentile_floor);
}

}  // namespace mdemap
