#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "mdemap/cli.hpp"
#include "mdemap/io.hpp"

using namespace mdemap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("mdemap_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

nlohmann::json summary(const std::string& p) { return nlohmann::json::parse(slurp(p)); }

std::string last_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return last;
}

}  // namespace

TEST_CASE("compute on an empty points file exits 3 and reports zero points") {
  TempDir d;
  spit(d / "empty.csv", "");
  CHECK(cli::run({"compute", "-i", d / "empty.csv", "-o", d / "out"}) == cli::kExitData);
  const auto s = summary(d / "out/compute_summary.json");
  CHECK(s["points_read"] == 0);
  CHECK(s["exit_code"] == 3);
  CHECK(s["command"] == "compute");
  CHECK_FALSE(s["error"].get<std::string>().empty());
}

TEST_CASE("exit codes") {
  TempDir d;
  CHECK(cli::run({"compute", "--no-such-flag"}) == cli::kExitUsage);
  CHECK(cli::run({}) == cli::kExitUsage);
  CHECK(cli::run({"compute", "-i", d / "missing.csv", "-o", d / "out"}) == cli::kExitIo);
  CHECK(cli::run({"synth", "--users", "200", "-o", d / "s"}) == cli::kExitOk);
  CHECK(cli::run({"compute", "-i", d / "s/points.csv", "--scales", "0", "-o", d / "o1"}) == cli::kExitUsage);
  CHECK(cli::run({"compute", "-i", d / "s/points.csv", "--aoi", "140,139,35.5,35.85", "-o", d / "o2"}) ==
        cli::kExitUsage);
  CHECK(cli::run({"compute", "-i", d / "s/points.csv", "--min-samples", "0", "-o", d / "o3"}) == cli::kExitUsage);
  CHECK(cli::run({"compute", "-i", d / "s/points.csv", "--scales", "1500,1000", "--min-samples", "5", "-o",
                  d / "o4"}) == cli::kExitOk);
  CHECK(cli::run({"combine", "--fields", d / "o4/field_1000m.csv," + d / "o4/field_1500m.csv", "-o", d / "o5"}) ==
        cli::kExitUsage);
  spit(d / "bad.csv", "user_id,timestamp,lat,lon\nu,1,35.6,139.6\nu,oops,35.6,139.6\n");
  CHECK(cli::run({"compute", "-i", d / "bad.csv", "--strict", "-o", d / "o6"}) == cli::kExitData);
  CHECK(cli::run({"compute", "-i", d / "s/points.csv", "-o", d / "s", "--scales", "100"}) == cli::kExitOk);
  // an output must never overwrite an input
  CHECK(cli::run({"export", "-i", d / "s/field_100m.csv", "--output", d / "s/field_100m.csv"}) == cli::kExitUsage);
}

TEST_CASE("the tool binary propagates exit codes") {
  TempDir d;
  spit(d / "empty.csv", "");
  const std::string cmd = std::string(MDEMAP_TOOL_PATH) + " compute -i " + (d / "empty.csv") + " -o " + (d / "out") +
                          " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 3);
}

TEST_CASE("synth, compute, evaluate: recall reaches every hub") {
  TempDir d;
  REQUIRE(cli::run({"synth", "-o", d / "syn"}) == 0);
  const auto ss = summary(d / "syn/synth_summary.json");
  CHECK(ss["points_read"] == 0);
  CHECK(slurp(d / "syn/stations.csv").rfind("name,lat,lon,rank\n", 0) == 0);

  REQUIRE(cli::run({"compute", "-i", d / "syn/points.csv", "-o", d / "fields"}) == 0);
  const auto cs = summary(d / "fields/compute_summary.json");
  CHECK(cs["points_read"] == 1000000);
  CHECK(cs["vectors_extracted"].get<std::size_t>() + cs["vectors_dropped"].get<std::size_t>() == 950000);
  CHECK(cs["meshes_defined"]["100"].get<std::size_t>() > 16);

  const std::string fields = d / "fields/field_100m.csv," + d / "fields/field_1000m.csv," +
                             d / "fields/field_2000m.csv," + d / "fields/field_4000m.csv";
  REQUIRE(cli::run({"evaluate", "--fields", fields, "--stations", d / "syn/stations.csv", "-o", d / "eval"}) == 0);
  const auto recall = slurp(d / "eval/recall_100m.csv");
  CHECK(recall.rfind("x,value\n", 0) == 0);
  CHECK(last_line(recall) == "5,8");

  REQUIRE(cli::run({"combine", "--fields", fields, "-o", d / "comb"}) == 0);
  std::ifstream cin(d / "comb/combined.csv");
  const auto table = read_grid_csv(cin);
  CHECK(table.has_score);
  CHECK(!table.rows.empty());
  CHECK(slurp(d / "comb/peaks.csv").rfind("rank,col,row,center_lat,center_lon,score\n", 0) == 0);
}

TEST_CASE("export of a one-mesh field") {
  TempDir d;
  spit(d / "one.csv",
       "scale_m,col,row,center_lat,center_lon,count,entropy_nats,entropy_norm\n"
       "100,12,9,35.5,139.3,40,2.5,0.5\n");
  REQUIRE(cli::run({"export", "-i", d / "one.csv", "-o", d / "x"}) == 0);
  const auto doc = nlohmann::json::parse(slurp(d / "x/one.geojson"));
  CHECK(doc["type"] == "FeatureCollection");
  REQUIRE(doc["features"].size() == 1);
  const auto& geom = doc["features"][0]["geometry"];
  CHECK(geom["type"] == "Polygon");
  REQUIRE(geom["coordinates"][0].size() == 5);
  CHECK(geom["coordinates"][0][0] == geom["coordinates"][0][4]);
  const auto s = summary(d / "x/export_summary.json");
  CHECK(s["exit_code"] == 0);
  CHECK(s["meshes_defined"]["100"] == 1);
}

TEST_CASE("idempotence and windowed output") {
  TempDir d;
  REQUIRE(cli::run({"synth", "--users", "400", "--seed", "5", "-o", d / "a"}) == 0);
  REQUIRE(cli::run({"synth", "--users", "400", "--seed", "5", "-o", d / "b"}) == 0);
  CHECK(slurp(d / "a/points.csv") == slurp(d / "b/points.csv"));
  CHECK(slurp(d / "a/stations.csv") == slurp(d / "b/stations.csv"));

  const std::vector<std::string> args{"compute", "-i", d / "a/points.csv", "--min-samples", "5", "--scales",
                                      "100,1000"};
  auto first = args;
  first.insert(first.end(), {"-o", d / "c1"});
  auto second = args;
  second.insert(second.end(), {"-o", d / "c2"});
  REQUIRE(cli::run(first) == 0);
  REQUIRE(cli::run(second) == 0);
  for (const auto* name : {"field_100m.csv", "field_1000m.csv", "compute_summary.json"}) {
    CHECK(slurp(d / (std::string("c1/") + name)) == slurp(d / (std::string("c2/") + name)));
  }
  // the written field re-parses to the same bytes
  std::ifstream in(d / "c1/field_100m.csv");
  const auto field = read_field_csv(in);
  std::ostringstream os;
  write_field_csv(os, field, AreaOfInterest::tokyo());
  CHECK(os.str() == slurp(d / "c1/field_100m.csv"));

  REQUIRE(cli::run({"compute", "-i", d / "a/points.csv", "--window", "3600", "--min-samples", "1", "--scales",
                    "4000", "-o", d / "w"}) == 0);
  std::size_t windowed = 0;
  for (const auto& e : fs::directory_iterator(d.path / "w"))
    if (e.path().filename().string().rfind("field_4000m_t", 0) == 0) ++windowed;
  CHECK(windowed > 1);
}

TEST_CASE("config file values apply and flags override them") {
  TempDir d;
  REQUIRE(cli::run({"synth", "--users", "300", "-o", d / "s"}) == 0);
  spit(d / "cfg.toml", "[compute]\nscales = [1000]\nmin-samples = 1000000\n");
  // the config's min-samples leaves every mesh undefined: data error
  CHECK(cli::run({"--config", d / "cfg.toml", "compute", "-i", d / "s/points.csv", "-o", d / "o1"}) == 3);
  CHECK(cli::run({"--config", d / "cfg.toml", "compute", "-i", d / "s/points.csv", "--min-samples", "5", "-o",
                  d / "o2"}) == 0);
  CHECK(fs::exists(d / "o2/field_1000m.csv"));
  CHECK_FALSE(fs::exists(d / "o2/field_100m.csv"));
}

TEST_CASE("evaluate writes one curve per scale and threshold") {
  TempDir d;
  REQUIRE(cli::run({"synth", "--users", "3000", "-o", d / "s"}) == 0);
  REQUIRE(cli::run({"compute", "-i", d / "s/points.csv", "--scales", "100,1000", "-o", d / "f"}) == 0);
  REQUIRE(cli::run({"evaluate", "--fields", d / "f/field_100m.csv," + d / "f/field_1000m.csv", "--stations",
                    d / "s/stations.csv", "--top-k", "100=16", "-o", d / "e"}) == 0);
  for (const auto* t : {"100", "300", "1000", "2000"}) {
    CHECK(fs::exists(d / (std::string("e/precision_100m_") + t + "m.csv")));
    CHECK(fs::exists(d / (std::string("e/precision_1000m_") + t + "m.csv")));
  }
  const auto s = summary(d / "e/evaluate_summary.json");
  CHECK(s["details"]["top_k"]["100"] == 16);
  CHECK(s["details"]["top_k"]["1000"] == 60);
  CHECK(cli::run({"evaluate", "--fields", d / "f/field_100m.csv", "--stations", d / "s/stations.csv", "--top-k",
                  "100=0", "-o", d / "e2"}) == 1);
}
