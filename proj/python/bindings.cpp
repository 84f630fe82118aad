#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "mdemap/cli.hpp"
#include "mdemap/eval.hpp"
#include "mdemap/io.hpp"
#include "mdemap/mde.hpp"
#include "mdemap/multiscale.hpp"
#include "mdemap/synth.hpp"

namespace py = pybind11;
using namespace mdemap;

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace {

using Cell = std::pair<std::int64_t, std::int64_t>;  // (col, row)

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  return out;
}

std::map<Cell, double> cells_of(const ScoreMap& scores) {
  std::map<Cell, double> out;
  for (const auto& [id, v] : scores) out[{id.col, id.row}] = v;
  return out;
}

ScoreMap scores_of(double delta, const std::map<Cell, double>& cells) {
  const MeshScale s(delta);
  ScoreMap out;
  for (const auto& [c, v] : cells) out[MeshId{s, c.first, c.second}] = v;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiscale moving-direction entropy maps from GPS trajectories";

  static py::exception<Error> error(m, "MdeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<GeoPoint>(m, "GeoPoint")
      .def(py::init<double, double>(), py::arg("lat"), py::arg("lon"))
      .def_readwrite("lat", &GeoPoint::lat)
      .def_readwrite("lon", &GeoPoint::lon)
      .def("__eq__", [](const GeoPoint& a, const GeoPoint& b) { return a == b; })
      .def("__repr__", [](const GeoPoint& p) {
        std::ostringstream os;
        os.precision(17);
        os << "GeoPoint(lat=" << p.lat << ", lon=" << p.lon << ")";
        return os.str();
      });

  py::class_<AreaOfInterest>(m, "AreaOfInterest")
      .def(py::init(&AreaOfInterest::from_bounds), py::arg("lon_min"), py::arg("lon_max"), py::arg("lat_min"),
           py::arg("lat_max"))
      .def_static("tokyo", &AreaOfInterest::tokyo)
      .def_property_readonly("south_west", &AreaOfInterest::south_west)
      .def_property_readonly("north_east", &AreaOfInterest::north_east)
      .def_property_readonly("width_m", &AreaOfInterest::width_m)
      .def_property_readonly("height_m", &AreaOfInterest::height_m)
      .def("contains", &AreaOfInterest::contains);

  m.def(
      "project",
      [](const GeoPoint& p, const AreaOfInterest& aoi) {
        const auto c = project(p, aoi);
        return std::pair(c.x, c.y);
      },
      py::arg("point"), py::arg("aoi") = AreaOfInterest::tokyo(), "Local (x, y) meters from the AOI south-west corner.");
  m.def(
      "inverse_project", [](double x, double y, const AreaOfInterest& aoi) { return inverse_project({x, y}, aoi); },
      py::arg("x"), py::arg("y"), py::arg("aoi") = AreaOfInterest::tokyo());
  m.def(
      "mesh_of",
      [](double x, double y, double delta) {
        const auto id = mesh_of({x, y}, MeshScale(delta));
        return Cell{id.col, id.row};
      },
      py::arg("x"), py::arg("y"), py::arg("delta"), "(col, row) of the mesh containing a local point.");
  m.def(
      "parent_of",
      [](double delta, std::int64_t col, std::int64_t row, double coarser) {
        const auto id = parent_of({MeshScale(delta), col, row}, MeshScale(coarser));
        return Cell{id.col, id.row};
      },
      py::arg("delta"), py::arg("col"), py::arg("row"), py::arg("coarser"));
  m.def(
      "mesh_center",
      [](double delta, std::int64_t col, std::int64_t row, const AreaOfInterest& aoi) {
        return mesh_center({MeshScale(delta), col, row}, aoi);
      },
      py::arg("delta"), py::arg("col"), py::arg("row"), py::arg("aoi") = AreaOfInterest::tokyo());
  m.def("geo_distance", &geo_distance, py::arg("a"), py::arg("b"), "Haversine distance in meters.");
  m.def("direction_of", &direction_of, py::arg("dx"), py::arg("dy"),
        "Direction in radians, anticlockwise from north.");
  m.def("bin_of", &bin_of, py::arg("theta"));
  m.def(
      "entropy",
      [](const std::vector<std::uint32_t>& counts) {
        if (counts.size() != kDirectionBins) throw Error(ErrorKind::kConfig, "expected 100 bin counts");
        DirectionHistogram h;
        for (int i = 0; i < kDirectionBins; ++i) h.add(i, counts[static_cast<std::size_t>(i)]);
        return entropy(h);
      },
      py::arg("counts"), "Shannon entropy in nats of a 100-bin direction histogram.");

  py::class_<TrajectoryPoint>(m, "TrajectoryPoint")
      .def(py::init([](std::string user, double t, double lat, double lon, std::optional<double> heading,
                       std::optional<double> speed) {
             return TrajectoryPoint{std::move(user), t, {lat, lon}, heading, speed};
           }),
           py::arg("user_id"), py::arg("t"), py::arg("lat"), py::arg("lon"), py::arg("heading") = py::none(),
           py::arg("speed") = py::none())
      .def_readonly("user_id", &TrajectoryPoint::user_id)
      .def_readonly("t", &TrajectoryPoint::t)
      .def_readonly("pos", &TrajectoryPoint::pos)
      .def_readonly("heading", &TrajectoryPoint::heading)
      .def_readonly("speed", &TrajectoryPoint::speed);

  py::class_<MovementVector>(m, "MovementVector")
      .def_readonly("user_id", &MovementVector::user_id)
      .def_readonly("t", &MovementVector::t)
      .def_readonly("origin", &MovementVector::origin)
      .def_readonly("theta", &MovementVector::theta)
      .def_readonly("displacement", &MovementVector::displacement)
      .def_readonly("duration", &MovementVector::duration);

  m.def(
      "read_points",
      [](const std::string& path, const std::string& format, bool strict) {
        auto in = open_in(path);
        auto r = parse_points(in, parse_point_format(format), ParseOptions{strict});
        return std::pair(std::move(r.points), r.skipped);
      },
      py::arg("path"), py::arg("format") = "csv", py::arg("strict") = false,
      "Returns (points, skipped_rows).");
  m.def(
      "extract_movements",
      [](const std::vector<TrajectoryPoint>& points, const AreaOfInterest& aoi, double min_displacement,
         double max_gap, const std::string& direction) {
        return extract_movements(points, aoi,
                                 ExtractOptions{min_displacement, max_gap, parse_direction_source(direction)})
            .vectors;
      },
      py::arg("points"), py::arg("aoi") = AreaOfInterest::tokyo(), py::arg("min_displacement") = 10.0,
      py::arg("max_gap") = 1800.0, py::arg("direction") = "consecutive");

  py::class_<MdeField>(m, "MdeField")
      .def_property_readonly("scale", [](const MdeField& f) { return f.scale.delta(); })
      .def_property_readonly("defined_count", &MdeField::defined_count)
      .def_property_readonly("entries",
                             [](const MdeField& f) {
                               std::map<Cell, std::pair<std::uint64_t, std::optional<double>>> out;
                               for (const auto& [id, st] : f.entries) out[{id.col, id.row}] = {st.count, st.entropy};
                               return out;
                             },
                             "{(col, row): (count, entropy or None)}")
      .def("__len__", [](const MdeField& f) { return f.entries.size(); });

  m.def(
      "compute_field",
      [](const std::vector<MovementVector>& vectors, double scale, const AreaOfInterest& aoi,
         std::size_t min_samples) {
        return compute_field(vectors, aoi, MeshScale(scale), TimeWindow::all(), min_samples);
      },
      py::arg("vectors"), py::arg("scale"), py::arg("aoi") = AreaOfInterest::tokyo(),
      py::arg("min_samples") = kDefaultMinSamples);
  m.def(
      "read_field_csv",
      [](const std::string& path) {
        auto in = open_in(path);
        return read_field_csv(in);
      },
      py::arg("path"));
  m.def(
      "write_field_csv",
      [](const std::string& path, const MdeField& field, const AreaOfInterest& aoi) {
        auto out = open_out(path);
        write_field_csv(out, field, aoi);
      },
      py::arg("path"), py::arg("field"), py::arg("aoi") = AreaOfInterest::tokyo());

  m.def(
      "normalize", [](const MdeField& f) { return cells_of(normalize(f).values); }, py::arg("field"),
      "Min-max normalized defined entropies, {(col, row): value}.");
  m.def(
      "combine",
      [](const std::vector<MdeField>& fields, std::optional<double> base_scale, const std::string& mode) {
        std::vector<NormalizedLayer> layers;
        double finest = std::numeric_limits<double>::infinity();
        for (const auto& f : fields) {
          layers.push_back(normalize(f));
          finest = std::min(finest, f.scale.delta());
        }
        if (layers.empty()) throw Error(ErrorKind::kConfig, "no fields to combine");
        const auto map = combine(layers, MeshScale(base_scale.value_or(finest)), parse_combine_mode(mode));
        return cells_of(map.scores);
      },
      py::arg("fields"), py::arg("base_scale") = py::none(), py::arg("mode") = "mean",
      "Fused scores on the base grid, {(col, row): score}.");
  m.def(
      "find_local_peaks",
      [](const std::map<Cell, double>& scores, double percentile_floor) {
        std::vector<Cell> out;
        for (const auto& id : find_local_peaks(scores_of(1.0, scores), percentile_floor)) out.emplace_back(id.col, id.row);
        return out;
      },
      py::arg("scores"), py::arg("percentile_floor") = kDefaultPeakPercentile);

  py::class_<Station>(m, "Station")
      .def(py::init([](std::string name, double lat, double lon, int rank) {
             return Station{std::move(name), {lat, lon}, rank};
           }),
           py::arg("name"), py::arg("lat"), py::arg("lon"), py::arg("rank"))
      .def_readonly("name", &Station::name)
      .def_readonly("pos", &Station::pos)
      .def_readonly("rank", &Station::rank);
  m.def(
      "read_stations_csv",
      [](const std::string& path) {
        auto in = open_in(path);
        return read_stations_csv(in);
      },
      py::arg("path"));

  m.def(
      "top_k",
      [](const MdeField& field, std::size_t k, const AreaOfInterest& aoi) {
        std::vector<std::tuple<std::int64_t, std::int64_t, double, GeoPoint>> out;
        for (const auto& e : top_k(field, k, aoi).entries) out.emplace_back(e.mesh.col, e.mesh.row, e.entropy, e.center);
        return out;
      },
      py::arg("field"), py::arg("k"), py::arg("aoi") = AreaOfInterest::tokyo(),
      "[(col, row, entropy, center)] in descending entropy.");
  m.def(
      "recall_curve",
      [](const MdeField& field, std::size_t k, const std::vector<Station>& stations,
         std::optional<std::vector<double>> radii, const AreaOfInterest& aoi) {
        const auto r = radii.value_or(default_radii_km());
        const auto curve = recall_curve(top_k(field, k, aoi), stations, r);
        return std::pair(curve.radii_km, curve.counts);
      },
      py::arg("field"), py::arg("k"), py::arg("stations"), py::arg("radii_km") = py::none(),
      py::arg("aoi") = AreaOfInterest::tokyo(), "(radii_km, station counts).");
  m.def(
      "precision_curve",
      [](const MdeField& field, const std::vector<Station>& stations, std::optional<std::vector<std::size_t>> x_values,
         std::optional<std::vector<double>> thresholds, const AreaOfInterest& aoi) {
        const auto xs = x_values.value_or(default_x_values(default_top_k(field.scale)));
        const auto th = thresholds.value_or(default_thresholds_m());
        std::map<std::size_t, std::vector<double>> out;
        for (const auto& c : precision_curve(field, aoi, stations, th, xs)) out[c.x] = c.percentages;
        return out;
      },
      py::arg("field"), py::arg("stations"), py::arg("x_values") = py::none(), py::arg("thresholds_m") = py::none(),
      py::arg("aoi") = AreaOfInterest::tokyo(), "{x: [percentage per threshold]}.");
  m.def("default_top_k", [](double scale) { return default_top_k(MeshScale(scale)); }, py::arg("scale"));

  m.def(
      "generate",
      [](std::size_t n_users, std::size_t fixes_per_user, std::uint64_t seed, double background_rate) {
        auto cfg = SynthConfig::defaults();
        cfg.n_users = n_users;
        cfg.fixes_per_user = fixes_per_user;
        cfg.seed = seed;
        cfg.background_rate = background_rate;
        auto out = generate(cfg);
        return std::pair(std::move(out.points), out.truth.as_stations());
      },
      py::arg("n_users") = 50000, py::arg("fixes_per_user") = 20, py::arg("seed") = 42,
      py::arg("background_rate") = 0.05, "Synthetic points and planted hub stations on the default layout.");

  m.def(
      "run", [](const std::vector<std::string>& args) { return cli::run(args); }, py::arg("args"),
      "Runs the command-line tool in-process and returns its exit code.");

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
