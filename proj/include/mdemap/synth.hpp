#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mdemap/eval.hpp"
#include "mdemap/ingest.hpp"

namespace mdemap {

/// SplitMix64; used only to expand seeds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next();
  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t state_;
};

/// xoshiro256** with portable derived distributions, so synthetic output is
/// identical on every platform with IEEE doubles.
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed);
  /// Independent stream `stream` of `seed`: seeded from
  /// SplitMix64(mix(seed) ^ mix(stream + 1)).
  static Xoshiro256ss for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one value per call).
  double normal();

 private:
  std::uint64_t s_[4];
};

struct Hub {
  GeoPoint center;
  double radius_m = 45.0;
};

struct Corridor {
  GeoPoint center;
  double axis = 0.0;  // radians, anticlockwise from north
  double radius_m = 800.0;  // half-length along the axis
};

struct SynthConfig {
  AreaOfInterest aoi = AreaOfInterest::tokyo();
  std::size_t n_users = 50'000;
  std::size_t fixes_per_user = 20;
  std::vector<Hub> hubs;
  std::vector<Corridor> corridors;
  double background_rate = 0.05;  // fraction of users (hence fixes) placed uniformly
  std::uint64_t seed = 42;
  double corridor_noise = 0.05;  // wrapped-Gaussian σ, radians
  double step_min_m = 12.0;
  double step_max_m = 30.0;
  double start_time = 1'596'240'000.0;  // 2020-08-01T00:00:00Z
  double interval_s = 60.0;

  /// 8 hubs and 8 corridors over the Tokyo AOI; hubs sit on 100 m mesh
  /// centers, corridors are several kilometres from any hub.
  static SynthConfig defaults();
  /// Throws kConfig.
  void validate() const;
};

struct GroundTruth {
  std::vector<GeoPoint> hub_positions;

  /// hub_1, hub_2, ... with rank = 1-based index.
  std::vector<Station> as_stations() const;
};

struct SynthOutput {
  std::vector<TrajectoryPoint> points;  // sorted by (user_id, t)
  GroundTruth truth;
};

/// Users are assigned in index order: the first n_users - background users
/// cycle through hubs then corridors, the rest are background. Hub users take
/// steps with uniform directions inside the hub disk (a step leaving the disk
/// is redrawn); corridor users alternate between axis and axis+π with
/// Gaussian angular noise; background fixes are uniform over the AOI.
SynthOutput generate(const SynthConfig& config);

}  // namespace mdemap
