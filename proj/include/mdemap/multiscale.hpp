#pragma once

#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "mdemap/mde.hpp"

namespace mdemap {

using ScoreMap = std::map<MeshId, double>;

/// Min-max rescaled entropies of one scale; undefined meshes are absent.
struct NormalizedLayer {
  MeshScale scale{1.0};
  ScoreMap values;
};

/// Throws kEmptyField when the field has no defined mesh. A field whose
/// defined values are all equal maps every mesh to 0.5.
NormalizedLayer normalize(const MdeField& field);

enum class CombineMode { kMean, kMax };

CombineMode parse_combine_mode(std::string_view name);

struct CombinedMap {
  MeshScale base_scale{1.0};
  ScoreMap scores;
  std::vector<MeshScale> contributing_scales;
};

/// Fuses layers on the base grid. Candidate base meshes are all base-scale
/// descendants of every defined mesh in every layer; each candidate's score is
/// the mean (or max) of the values its ancestors carry in the layers that
/// define them.
CombinedMap combine(std::span<const NormalizedLayer> layers, MeshScale base_scale,
                    CombineMode mode = CombineMode::kMean);

inline constexpr double kDefaultPeakPercentile = 90.0;

/// Linear-interpolation percentile (p in [0, 100]) of a non-empty sample.
double percentile(std::vector<double> values, double p);

/// Meshes strictly greater than every defined 8-neighbour and at or above the
/// given percentile of all scores; descending score, ties by (row, col).
std::vector<MeshId> find_local_peaks(const ScoreMap& scores,
                                     double percentile_floor = kDefaultPeakPercentile);
std::vector<MeshId> find_local_peaks(const CombinedMap& map,
                                     double percentile_floor = kDefaultPeakPercentile);
std::vector<MeshId> find_local_peaks(const NormalizedLayer& layer,
                                     double percentile_floor = kDefaultPeakPercentile);

}  // namespace mdemap
