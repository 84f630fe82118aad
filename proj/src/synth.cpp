#include "mdemap/synth.hpp"

#include <cmath>
#include <cstdio>

namespace mdemap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

LocalCoord step(const LocalCoord& from, double theta, double length) {
  return {from.x - length * std::sin(theta), from.y + length * std::cos(theta)};
}

double wrap_angle(double theta) {
  theta = std::fmod(theta, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  return theta >= kTwoPi ? 0.0 : theta;
}

std::string user_name(std::size_t index, std::size_t n_users) {
  int width = 6;
  for (std::size_t n = n_users; n >= 1'000'000; n /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof buf, "u%0*zu", width, index);
  return buf;
}

class Walker {
 public:
  Walker(const SynthConfig& cfg, Xoshiro256ss& rng) : cfg_(cfg), rng_(rng) {}

  std::vector<LocalCoord> hub(const Hub& h) {
    const LocalCoord c = to_local(h.center, cfg_.aoi);
    const auto inside = [&](const LocalCoord& p) {
      return std::hypot(p.x - c.x, p.y - c.y) <= h.radius_m;
    };
    std::vector<LocalCoord> path;
    const double r0 = h.radius_m * std::sqrt(rng_.uniform());
    const double a0 = rng_.uniform(0.0, kTwoPi);
    path.push_back(step(c, a0, r0));
    while (path.size() < cfg_.fixes_per_user) {
      const LocalCoord& cur = path.back();
      LocalCoord next = cur;
      for (int attempt = 0; attempt < 256; ++attempt) {
        const double length = rng_.uniform(cfg_.step_min_m, cfg_.step_max_m);
        const LocalCoord candidate = step(cur, rng_.uniform(0.0, kTwoPi), length);
        if (inside(candidate)) {
          next = candidate;
          break;
        }
      }
      path.push_back(next);
    }
    return path;
  }

  std::vector<LocalCoord> corridor(const Corridor& k) {
    const LocalCoord c = to_local(k.center, cfg_.aoi);
    const double along = rng_.uniform(-k.radius_m, k.radius_m);
    std::vector<LocalCoord> path;
    path.push_back(step(c, k.axis, along));
    for (std::size_t i = 1; i < cfg_.fixes_per_user; ++i) {
      const double base = (i % 2 == 1) ? k.axis : k.axis + std::numbers::pi;
      const double theta = wrap_angle(base + cfg_.corridor_noise * rng_.normal());
      path.push_back(step(path.back(), theta, rng_.uniform(cfg_.step_min_m, cfg_.step_max_m)));
    }
    return path;
  }

  std::vector<LocalCoord> background() {
    std::vector<LocalCoord> path;
    const double w = cfg_.aoi.width_m();
    const double hgt = cfg_.aoi.height_m();
    for (std::size_t i = 0; i < cfg_.fixes_per_user; ++i) {
      path.push_back({rng_.uniform() * w, rng_.uniform() * hgt});
    }
    return path;
  }

 private:
  const SynthConfig& cfg_;
  Xoshiro256ss& rng_;
};

}  // namespace

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix(state_);
}

Xoshiro256ss::Xoshiro256ss(std::uint64_t seed) {
  SplitMix64 sm(seed);
  for (auto& s : s_) s = sm.next();
}

Xoshiro256ss Xoshiro256ss::for_stream(std::uint64_t seed, std::uint64_t stream) {
  return Xoshiro256ss(SplitMix64::mix(seed) ^ SplitMix64::mix(stream + 1));
}

std::uint64_t Xoshiro256ss::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256ss::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Xoshiro256ss::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

SynthConfig SynthConfig::defaults() {
  SynthConfig cfg;
  const MeshScale fine(100.0);
  const std::int64_t hub_cols[] = {80, 230, 380, 530};
  const std::int64_t hub_rows[] = {100, 280};
  for (const auto row : hub_rows) {
    for (const auto col : hub_cols) {
      cfg.hubs.push_back({mesh_center({fine, col, row}, cfg.aoi), 45.0});
    }
  }
  struct Spec {
    std::int64_t col, row;
    double axis;
  };
  const Spec corridors[] = {
      {155, 190, 0.0},
      {305, 190, std::numbers::pi / 4},
      {455, 190, std::numbers::pi / 2},
      {580, 190, 3 * std::numbers::pi / 4},
      {155, 350, std::numbers::pi / 3},
      {305, 350, std::numbers::pi / 6},
      {455, 30, 2 * std::numbers::pi / 3},
      {305, 30, 5 * std::numbers::pi / 6},
  };
  for (const auto& s : corridors) {
    cfg.corridors.push_back({mesh_center({fine, s.col, s.row}, cfg.aoi), s.axis, 800.0});
  }
  return cfg;
}

void SynthConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfig, msg); };
  if (n_users == 0) fail("n_users must be positive");
  if (fixes_per_user == 0) fail("fixes_per_user must be positive");
  if (!(background_rate >= 0.0 && background_rate <= 1.0)) fail("background_rate must be in [0, 1]");
  if (!(corridor_noise >= 0.0) || !std::isfinite(corridor_noise)) fail("corridor_noise must be >= 0");
  if (!(step_min_m > 0.0) || !(step_max_m >= step_min_m) || !std::isfinite(step_max_m)) {
    fail("step lengths must satisfy 0 < step_min <= step_max");
  }
  if (!(interval_s > 0.0) || !std::isfinite(start_time)) fail("invalid timing parameters");
  for (const auto& h : hubs) {
    if (!(h.radius_m > 0.0)) fail("hub radius must be positive");
    if (step_max_m > 2.0 * h.radius_m) fail("step_max must not exceed the hub diameter");
    const LocalCoord c = to_local(h.center, aoi);
    if (!aoi.contains(h.center) || c.x < h.radius_m || c.y < h.radius_m ||
        c.x + h.radius_m > aoi.width_m() || c.y + h.radius_m > aoi.height_m()) {
      fail("hub must lie inside the AOI");
    }
  }
  for (const auto& k : corridors) {
    if (!(k.radius_m > 0.0) || !std::isfinite(k.axis)) fail("invalid corridor geometry");
    const LocalCoord c = to_local(k.center, aoi);
    const double dx = k.radius_m * std::abs(std::sin(k.axis));
    const double dy = k.radius_m * std::abs(std::cos(k.axis));
    if (!aoi.contains(k.center) || c.x < dx || c.y < dy || c.x + dx > aoi.width_m() ||
        c.y + dy > aoi.height_m()) {
      fail("corridor must lie inside the AOI");
    }
  }
  if (hubs.empty() && corridors.empty() && background_rate < 1.0) {
    fail("hubs or corridors are required unless every user is background");
  }
}

std::vector<Station> GroundTruth::as_stations() const {
  std::vector<Station> out;
  for (std::size_t i = 0; i < hub_positions.size(); ++i) {
    out.push_back({"hub_" + std::to_string(i + 1), hub_positions[i], static_cast<int>(i + 1)});
  }
  return out;
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  SynthOutput out;
  for (const auto& h : config.hubs) out.truth.hub_positions.push_back(h.center);

  const std::size_t n_regions = config.hubs.size() + config.corridors.size();
  std::size_t n_background =
      static_cast<std::size_t>(std::llround(config.background_rate * static_cast<double>(config.n_users)));
  if (n_regions == 0) n_background = config.n_users;
  const std::size_t n_regional = config.n_users - n_background;
  // Leaves room for the last fix inside a 30-day month.
  const double spread = std::max(0.0, 30.0 * 86400.0 - static_cast<double>(config.fixes_per_user) * 2.0 * config.interval_s);

  out.points.reserve(config.n_users * config.fixes_per_user);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    Xoshiro256ss rng = Xoshiro256ss::for_stream(config.seed, u);
    Walker walker(config, rng);
    std::vector<LocalCoord> path;
    if (u < n_regional) {
      const std::size_t region = u % n_regions;
      path = region < config.hubs.size()
                 ? walker.hub(config.hubs[region])
                 : walker.corridor(config.corridors[region - config.hubs.size()]);
    } else {
      path = walker.background();
    }
    const std::string id = user_name(u, config.n_users);
    double t = config.start_time + std::floor(rng.uniform() * spread);
    for (const auto& c : path) {
      out.points.push_back({id, t, inverse_project(c, config.aoi), std::nullopt, std::nullopt});
      t += config.interval_s + std::floor(rng.uniform() * 0.5 * config.interval_s);
    }
  }
  return out;
}

}  // namespace mdemap
