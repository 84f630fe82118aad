#pragma once

// Brute-force reference computations for tests. Everything here takes a
// different route from the library code it is compared against.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mdemap/eval.hpp"
#include "mdemap/ingest.hpp"
#include "mdemap/mde.hpp"

namespace oracle {

/// Great-circle distance via the chord between unit vectors.
inline double chord_distance(const mdemap::GeoPoint& a, const mdemap::GeoPoint& b) {
  const long double k = std::numbers::pi_v<long double> / 180.0L;
  const auto unit = [&](const mdemap::GeoPoint& p) {
    const long double lat = p.lat * k, lon = p.lon * k;
    return std::array<long double, 3>{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                                      std::sin(lat)};
  };
  const auto u = unit(a), v = unit(b);
  long double c2 = 0;
  for (int i = 0; i < 3; ++i) c2 += (u[i] - v[i]) * (u[i] - v[i]);
  return static_cast<double>(2.0L * 6371000.0L * std::asin(std::sqrt(c2) / 2.0L));
}

/// Bin boundaries at multiples of the double π/50, evaluated in long double.
inline int bin(double theta) {
  const long double scaled =
      static_cast<long double>(theta) * 50.0L / static_cast<long double>(std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    if (scaled >= i && scaled < i + 1) return i;
  }
  return 99;
}

inline double entropy(const std::array<std::uint64_t, 100>& counts) {
  long double n = 0;
  for (auto c : counts) n += c;
  long double h = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    const long double p = c / n;
    h -= p * std::log(p);
  }
  return static_cast<double>(h);
}

/// Re-bins every vector from scratch with a linear scan; (col,row) -> counts.
inline std::map<std::pair<std::int64_t, std::int64_t>, std::array<std::uint64_t, 100>> rebin(
    const std::vector<mdemap::MovementVector>& vs, const mdemap::AreaOfInterest& aoi, double delta) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::array<std::uint64_t, 100>> out;
  for (const auto& v : vs) {
    if (!aoi.contains(v.origin)) continue;
    const double m_lat = 6371000.0 * std::numbers::pi / 180.0;
    const double mid = 0.5 * (aoi.south_west().lat + aoi.north_east().lat) * std::numbers::pi / 180.0;
    const double x = (v.origin.lon - aoi.south_west().lon) * m_lat * std::cos(mid);
    const double y = (v.origin.lat - aoi.south_west().lat) * m_lat;
    std::int64_t col = 0, row = 0;
    while ((col + 1) * delta <= x) ++col;
    while ((row + 1) * delta <= y) ++row;
    out[{col, row}][static_cast<std::size_t>(bin(v.theta))] += 1;
  }
  return out;
}

/// Strict 8-neighbour maxima over a dense grid where NaN marks a missing cell.
inline std::vector<std::pair<int, int>> dense_peaks(const std::vector<std::vector<double>>& grid,
                                                    double floor_value) {
  std::vector<std::pair<int, int>> out;  // (row, col)
  const int rows = static_cast<int>(grid.size());
  for (int r = 0; r < rows; ++r) {
    const int cols = static_cast<int>(grid[r].size());
    for (int c = 0; c < cols; ++c) {
      const double v = grid[r][c];
      if (std::isnan(v) || v < floor_value) continue;
      bool peak = true;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= rows || cc >= static_cast<int>(grid[rr].size())) continue;
          if (!std::isnan(grid[rr][cc]) && grid[rr][cc] >= v) peak = false;
        }
      }
      if (peak) out.emplace_back(r, c);
    }
  }
  return out;
}

inline double nearest(const mdemap::GeoPoint& p, const std::vector<mdemap::GeoPoint>& others) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : others) best = std::min(best, mdemap::geo_distance(p, o));
  return best;
}

/// Random vectors with origins uniformly inside the AOI.
inline std::vector<mdemap::MovementVector> random_vectors(std::size_t n, const mdemap::AreaOfInterest& aoi,
                                                          std::uint64_t seed, double t0 = 0.0,
                                                          double t_span = 86400.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto& sw = aoi.south_west();
  const auto& ne = aoi.north_east();
  std::vector<mdemap::MovementVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    mdemap::MovementVector v;
    v.user_id = "r" + std::to_string(i % 997);
    v.t = t0 + u01(rng) * t_span;
    v.origin = {sw.lat + u01(rng) * (ne.lat - sw.lat), sw.lon + u01(rng) * (ne.lon - sw.lon)};
    v.theta = u01(rng) * 2.0 * std::numbers::pi;
    if (v.theta >= 2.0 * std::numbers::pi) v.theta = 0.0;
    v.displacement = 20.0;
    v.duration = 60.0;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace oracle

namespace oracle {

/// numpy-style "linear" percentile.
inline double percentile_linear(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace oracle
