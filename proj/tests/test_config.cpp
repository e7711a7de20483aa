#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "nlhom/config.hpp"
#include "nlhom/error.hpp"

using namespace nlhom;
using nlohmann::json;

namespace {

json small_doc() {
  return json::parse(R"({
    "grid": {"dim": 2, "n": [64, 64]},
    "domain": {"shape": "square", "center": [0.5, 0.5], "half_width": 0.25},
    "perforation": {"kind": "periodic_balls", "eps": 0.0625, "radius_ratio": 0.5},
    "kernel": {"family": "tent", "support_radius": 0.1},
    "g": {"family": "linear", "a": 0.5, "b": 0.1},
    "averaging": {"delta": 0.1},
    "problem": {"bc": "neumann", "T": 0.5, "dt": 0.01},
    "sweep": {"kind": "eps", "values": [0.125, 0.0625], "sample_times": [0.5]},
    "output": {"dir": "results/small"}
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

} // namespace

TEST_CASE("parse: fields and defaults") {
  const RunConfig c = parse_config(small_doc());
  CHECK(c.grid.dim == 2);
  CHECK(c.grid.n == std::vector<int>{64, 64});
  CHECK(c.grid.box.size() == 2);
  CHECK(c.domain.kind == ShapeKind::square);
  CHECK(c.domain.half_width == 0.25);
  CHECK(c.perforation.kind == PerforationKind::periodic_balls);
  CHECK(c.perforation.eps == 0.0625);
  CHECK(c.density.mode == DensityMode::analytic);
  CHECK(c.kernel.family == KernelFamily::tent);
  CHECK(c.g.family == GFamily::linear);
  CHECK(c.g.a == 0.5);
  CHECK(c.g.b == 0.1);
  CHECK(c.averaging.delta == 0.1);
  CHECK_FALSE(c.averaging.denominator_floor.has_value());
  CHECK(c.problem.equation == EquationKind::eps_problem);
  CHECK(c.problem.bc == BoundaryCondition::neumann);
  CHECK(c.problem.scheme == Scheme::etd1);
  CHECK(c.problem.u0.center == Point{0.5, 0.5});
  REQUIRE(c.sweep.has_value());
  CHECK(c.sweep->kind == SweepKind::eps);
  CHECK(c.sweep->sample_times == std::vector<double>{0.5});
  CHECK(c.output.dir == "results/small");
  CHECK_FALSE(c.output.timing_in_csv);
  CHECK(c.source == small_doc());

  json d = small_doc();
  d["grid"]["n"] = 32;
  d.erase("sweep");
  const RunConfig c2 = parse_config(d);
  CHECK(c2.grid.n == std::vector<int>{32, 32});
  CHECK_FALSE(c2.sweep.has_value());

  d = small_doc();
  d["perforation"] = {{"kind", "random_balls"}, {"count", 4}, {"radius", 0.02}, {"seed", 9}, {"density_window", 0.2}};
  const RunConfig c3 = parse_config(d);
  CHECK(c3.density.mode == DensityMode::cell_average);
  CHECK(c3.perforation.seed == 9u);
}

TEST_CASE("parse: unknown keys and bad values are rejected with the key path") {
  json d = small_doc();
  d["kernel"]["radius"] = 0.1;
  CHECK(error_of(d).find("kernel.radius") != std::string::npos);

  d = small_doc();
  d["extra"] = 1;
  CHECK(error_of(d).find("extra") != std::string::npos);

  d = small_doc();
  d["problem"]["u0"] = {{"preset", "gaussian_bump"}, {"sigma", 0.1}};
  CHECK(error_of(d).find("problem.u0.sigma") != std::string::npos);

  d = small_doc();
  d["g"]["family"] = "cubic";
  CHECK(error_of(d).find("g.family") != std::string::npos);

  d = small_doc();
  d["problem"]["dt"] = "small";
  CHECK(error_of(d).find("problem.dt") != std::string::npos);

  d = small_doc();
  d["domain"]["center"] = {0.1, 0.2, 0.3};
  CHECK_FALSE(error_of(d).empty());

  d = small_doc();
  d["sweep"]["values"] = {0.0625, 0.125};
  CHECK(error_of(d).find("decreasing") != std::string::npos);

  d = small_doc();
  d["sweep"]["values"] = {0.1, -0.1};
  CHECK_FALSE(error_of(d).empty());

  d = small_doc();
  d["sweep"]["sample_times"] = {0.75};
  CHECK(error_of(d).find("(0, T]") != std::string::npos);

  d = small_doc();
  d["grid"] = 5;
  CHECK(error_of(d).find("grid") != std::string::npos);
}

TEST_CASE("hash: canonical and sensitive") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  const json a = small_doc();
  const json reordered = json::parse(R"({
    "output": {"dir": "results/small"},
    "sweep": {"sample_times": [0.5], "values": [0.125, 0.0625], "kind": "eps"},
    "problem": {"dt": 0.01, "T": 0.5, "bc": "neumann"},
    "averaging": {"delta": 0.1},
    "g": {"b": 0.1, "a": 0.5, "family": "linear"},
    "kernel": {"support_radius": 0.1, "family": "tent"},
    "perforation": {"radius_ratio": 0.5, "eps": 0.0625, "kind": "periodic_balls"},
    "domain": {"half_width": 0.25, "center": [0.5, 0.5], "shape": "square"},
    "grid": {"n": [64, 64], "dim": 2}
  })");
  CHECK(config_hash(a) == config_hash(reordered));
  CHECK(config_hash(a).size() == 64);
  json b = a;
  b["g"]["a"] = 0.50000001;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("load_config: files") {
  const auto good = temp_file("nlhom_cfg_good.json", small_doc().dump(2));
  const RunConfig c = load_config(good);
  CHECK(config_hash(c.source) == config_hash(small_doc()));

  const auto missing = std::filesystem::temp_directory_path() / "nlhom_cfg_does_not_exist.json";
  std::filesystem::remove(missing);
  try {
    load_config(missing);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(missing.string()) != std::string::npos);
  }

  const auto broken = temp_file("nlhom_cfg_broken.json", "{\"grid\": {\"dim\": 2,");
  CHECK_THROWS_AS(load_config(broken), ConfigError);

  for (const char* name : {"small.json", "eps_dirichlet.json", "delta_dirichlet.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::filesystem::path(NLHOM_SOURCE_DIR) / "configs" / name));
  }
}

TEST_CASE("factories build a consistent run") {
  const RunConfig c = parse_config(small_doc());
  const Grid g = make_grid(c);
  CHECK(g.n[0] == 64);
  const auto kernel = make_kernel(c, g);
  CHECK(kernel->stencil().mass() == doctest::Approx(1.0));
  CHECK(coverage_floor(c, g, 0.1) == doctest::Approx(0.05 * ball_stencil(g, 0.1).mass()));
  const auto geo = make_geometry(c, g, c.perforation);
  CHECK(count(geo->material.mask) < count(geo->domain.mask));
  const ProblemSpec p = make_problem(c, geo, kernel);
  CHECK(p.T == 0.5);
  CHECK(p.bc == BoundaryCondition::neumann);
  const Problem prob(p);
  CHECK(prob.step_count() == 50);

  json d = small_doc();
  d["kernel"]["support_radius"] = 0.3; // wider than the margin between Omega and the box
  CHECK_THROWS_AS(make_kernel(parse_config(d), g), ConfigError);

  d = small_doc();
  d["averaging"]["denominator_floor"] = 0.02;
  CHECK(coverage_floor(parse_config(d), g, 0.1) == 0.02);
  d["averaging"]["denominator_floor"] = 1.0;
  CHECK_THROWS_AS(make_geometry(parse_config(d), g, c.perforation), ConfigError);
}
