#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <sstream>

#include "mdemap/ingest.hpp"

using namespace mdemap;

namespace {

constexpr double kPi = std::numbers::pi;

ParseResult parse_csv(const std::string& text, bool strict = false) {
  std::istringstream in(text);
  return parse_points(in, PointFormat::kCsv, ParseOptions{strict});
}

TrajectoryPoint fix(std::string user, double t, double lat, double lon) {
  return TrajectoryPoint{std::move(user), t, {lat, lon}, std::nullopt, std::nullopt};
}

}  // namespace

TEST_CASE("parse_points: empty input") {
  auto r = parse_csv("");
  CHECK(r.points.empty());
  CHECK(r.skipped == 0);
  r = parse_csv("user_id,timestamp,lat,lon\n");
  CHECK(r.points.empty());
  CHECK(r.skipped == 0);
}

TEST_CASE("parse_points: one valid CSV row") {
  const auto r = parse_csv("user_id,timestamp,lat,lon\nalice,1596240000,35.6,139.7\n");
  REQUIRE(r.points.size() == 1);
  const auto& p = r.points[0];
  CHECK(p.user_id == "alice");
  CHECK(p.t == 1596240000.0);
  CHECK(p.pos.lat == 35.6);
  CHECK(p.pos.lon == 139.7);
  CHECK_FALSE(p.heading.has_value());
  CHECK_FALSE(p.speed.has_value());
}

TEST_CASE("parse_points: lat=91 is skipped in lenient mode, fatal in strict mode") {
  const std::string text = "user_id,timestamp,lat,lon\na,1,91,139.7\nb,2,35.6,139.7\n";
  const auto r = parse_csv(text);
  CHECK(r.points.size() == 1);
  CHECK(r.skipped == 1);
  try {
    parse_csv(text, true);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("parse_points: optional columns, reordering, RFC 3339, NDJSON") {
  auto r = parse_csv(
      "lon,lat,speed,heading,timestamp,user_id\r\n"
      "139.7,35.6,1.5,3.0,2020-08-01T09:00:00+09:00,u\r\n"
      "139.7,35.6,,,2020-08-01T00:00:30Z,u\r\n");
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0].t == 1596240000.0);
  CHECK(r.points[0].heading == 3.0);
  CHECK(r.points[0].speed == 1.5);
  CHECK(r.points[1].t == 1596240030.0);
  CHECK_FALSE(r.points[1].heading.has_value());

  std::istringstream nd(
      "{\"user_id\":\"u\",\"timestamp\":1596240000,\"lat\":35.6,\"lon\":139.7}\n"
      "\n"
      "{\"user_id\":\"v\",\"timestamp\":\"2020-08-01T00:00:00Z\",\"lat\":35.7,\"lon\":139.8,"
      "\"heading\":1.0}\n"
      "not json\n");
  const auto n = parse_points(nd, PointFormat::kNdjson);
  REQUIRE(n.points.size() == 2);
  CHECK(n.skipped == 1);
  CHECK(n.points[1].t == 1596240000.0);
  CHECK(n.points[1].heading == 1.0);
}

TEST_CASE("parse_points: malformed rows") {
  const auto r = parse_csv(
      "user_id,timestamp,lat,lon,heading\n"
      "a,xx,35.6,139.7,\n"
      "a,1,35.6\n"
      "a,1,35.6,139.7,7.0\n"
      ",1,35.6,139.7,\n"
      "a,1,35.6,139.7,\n");
  CHECK(r.points.size() == 1);
  CHECK(r.skipped == 4);
  CHECK_THROWS_AS(parse_csv("user_id,lat,lon\n"), Error);
}

TEST_CASE("parse_timestamp") {
  CHECK(parse_timestamp("1596240000") == 1596240000.0);
  CHECK(parse_timestamp("1596240000.5") == 1596240000.5);
  CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0.0);
  CHECK(parse_timestamp("2020-08-01T09:00:00.25+09:00") == 1596240000.25);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("direction_of follows the anticlockwise-from-north convention") {
  CHECK(direction_of(0, 1) == 0.0);
  CHECK(direction_of(0, -1) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(direction_of(1, 0) == doctest::Approx(1.5 * kPi).epsilon(1e-15));
  CHECK(direction_of(-1, 0) == doctest::Approx(0.5 * kPi).epsilon(1e-15));
  CHECK(direction_of(1, 1) == doctest::Approx(1.75 * kPi).epsilon(1e-15));
  CHECK(direction_of(-0.0, 1) == 0.0);
  try {
    direction_of(0, 0);
    FAIL("expected undefined direction");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUndefinedDirection);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 10000; ++i) {
    const double th = direction_of(u(rng), u(rng));
    REQUIRE(th >= 0.0);
    REQUIRE(th < 2 * kPi);
  }
}

TEST_CASE("extract_movements examples") {
  const auto aoi = AreaOfInterest::tokyo();
  const double dlat = 100.0 / kMetersPerDegree;

  SUBCASE("100 m due north") {
    const std::vector<TrajectoryPoint> pts{fix("u", 0, 35.6, 139.6), fix("u", 60, 35.6 + dlat, 139.6)};
    const auto r = extract_movements(pts, aoi);
    REQUIRE(r.vectors.size() == 1);
    const auto& v = r.vectors[0];
    CHECK(v.theta == 0.0);
    CHECK(v.displacement == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(v.duration == 60.0);
    CHECK(v.t == 60.0);
    CHECK(v.origin == GeoPoint{35.6, 139.6});
  }
  SUBCASE("below min displacement") {
    const std::vector<TrajectoryPoint> pts{fix("u", 0, 35.6, 139.6), fix("u", 60, 35.6 + dlat / 20, 139.6)};
    const auto r = extract_movements(pts, aoi, {10.0, 1800.0, DirectionSource::kConsecutive});
    CHECK(r.vectors.empty());
    CHECK(r.stats.dropped_short == 1);
    CHECK(r.stats.dropped() == 1);
  }
  SUBCASE("gap rule") {
    const std::vector<TrajectoryPoint> pts{fix("u", 0, 35.6, 139.6), fix("u", 7200, 35.6 + dlat, 139.6)};
    const auto r = extract_movements(pts, aoi);
    CHECK(r.vectors.empty());
    CHECK(r.stats.dropped_gap == 1);
  }
  SUBCASE("three fixes give two vectors, pairing oracle") {
    const std::vector<TrajectoryPoint> pts{fix("u", 120, 35.6 + 2 * dlat, 139.6 + 0.001),
                                           fix("u", 0, 35.6, 139.6), fix("u", 60, 35.6 + dlat, 139.6)};
    const auto r = extract_movements(pts, aoi);
    REQUIRE(r.vectors.size() == 2);
    // adjacent pairs after sorting by t: (0 -> 60), (60 -> 120)
    CHECK(r.vectors[0].origin == pts[1].pos);
    CHECK(r.vectors[0].t == 60.0);
    CHECK(r.vectors[1].origin == pts[2].pos);
    CHECK(r.vectors[1].t == 120.0);
    // dx > 0 (east), dy > 0 (north): between 3π/2 and 2π
    CHECK(r.vectors[1].theta > 1.5 * kPi);
  }
  SUBCASE("duplicates keep the first") {
    const std::vector<TrajectoryPoint> pts{fix("u", 0, 35.6, 139.6), fix("u", 0, 35.7, 139.6),
                                           fix("u", 60, 35.6 + dlat, 139.6)};
    const auto r = extract_movements(pts, aoi);
    CHECK(r.stats.duplicates == 1);
    REQUIRE(r.vectors.size() == 1);
    CHECK(r.vectors[0].theta == 0.0);
  }
  SUBCASE("heading mode") {
    auto a = fix("u", 0, 35.6, 139.6);
    a.heading = 1.25;
    a.speed = 25.0;
    auto b = fix("u", 60, 35.6, 139.6);
    b.heading = 4.0;
    auto c = fix("u", 120, 35.6, 139.6);
    const std::vector<TrajectoryPoint> pts{a, b, c};
    const auto r = extract_movements(pts, aoi, {10.0, 1800.0, DirectionSource::kHeading});
    REQUIRE(r.vectors.size() == 2);
    CHECK(r.vectors[0].theta == 1.25);
    CHECK(r.vectors[0].displacement == 25.0);
    CHECK(r.vectors[1].theta == 4.0);
    CHECK(r.vectors[1].displacement == 10.0);
    CHECK(r.vectors[1].duration > 0.0);
    CHECK(r.stats.missing_heading == 1);
  }
}

TEST_CASE("property: order independence, count bound, theta and displacement bounds") {
  const auto aoi = AreaOfInterest::tokyo();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ulat(35.55, 35.8), ulon(139.35, 139.95), ustep(-0.0008, 0.0008);
  std::vector<TrajectoryPoint> pts;
  std::size_t users = 50;
  for (std::size_t u = 0; u < users; ++u) {
    double lat = ulat(rng), lon = ulon(rng), t = 1000.0 * static_cast<double>(u);
    const int n = 2 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      pts.push_back(fix("user" + std::to_string(u), t, lat, lon));
      lat += ustep(rng);
      lon += ustep(rng);
      t += 30 + static_cast<double>(rng() % 3000);
    }
  }
  const ExtractOptions opts{10.0, 1800.0, DirectionSource::kConsecutive};
  const auto base = extract_movements(pts, aoi, opts);
  CHECK(base.vectors.size() + base.stats.dropped() == pts.size() - users);
  CHECK(base.vectors.size() <= pts.size() - users);
  CHECK(base.stats.dropped_gap > 0);
  for (const auto& v : base.vectors) {
    REQUIRE(v.theta >= 0.0);
    REQUIRE(v.theta < 2 * kPi);
    REQUIRE(v.displacement >= opts.min_displacement);
    REQUIRE(v.duration > 0.0);
  }
  for (int trial = 0; trial < 5; ++trial) {
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto r = extract_movements(shuffled, aoi, opts);
    REQUIRE(r.vectors == base.vectors);
  }
}
