#include "nlhom/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "nlhom/error.hpp"

namespace nlhom {

using nlohmann::json;

std::string to_string(SweepKind k) { return k == SweepKind::eps ? "eps" : "delta"; }

namespace {

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError("config: unknown key '" + section + "." + item.key() + "'");
  }
}

template <class T>
T get(const json& obj, const std::string& section, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for '" + section + "." + key + "': " + e.what());
  }
}

template <class E>
E get_enum(const json& obj, const std::string& section, const char* key, E fallback,
           const std::map<std::string, E>& names) {
  if (!obj.contains(key)) return fallback;
  const std::string s = get<std::string>(obj, section, key, "");
  auto it = names.find(s);
  if (it == names.end()) throw ConfigError("config: unknown value '" + s + "' for '" + section + "." + key + "'");
  return it->second;
}

Point get_point(const json& obj, const std::string& section, const char* key, Point fallback) {
  if (!obj.contains(key)) return fallback;
  const auto v = get<std::vector<double>>(obj, section, key, {});
  if (v.empty() || v.size() > 2) throw ConfigError("config: '" + section + "." + key + "' needs 1 or 2 coordinates");
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

json section(const json& doc, const char* name) {
  if (!doc.contains(name)) return json::object();
  return doc.at(name);
}

} // namespace

RunConfig parse_config(const json& doc) {
  check_keys(doc, "<root>",
             {"grid", "domain", "perforation", "kernel", "g", "averaging", "problem", "sweep", "output"});
  RunConfig cfg;
  cfg.source = doc;

  const json grid = section(doc, "grid");
  check_keys(grid, "grid", {"dim", "n", "box"});
  cfg.grid.dim = get<int>(grid, "grid", "dim", 2);
  if (grid.contains("n")) {
    cfg.grid.n = grid.at("n").is_number() ? std::vector<int>(cfg.grid.dim, get<int>(grid, "grid", "n", 64))
                                          : get<std::vector<int>>(grid, "grid", "n", {});
  } else {
    cfg.grid.n.assign(cfg.grid.dim, 64);
  }
  if (grid.contains("box"))
    cfg.grid.box = get<std::vector<std::array<double, 2>>>(grid, "grid", "box", {});
  else
    cfg.grid.box.assign(cfg.grid.dim, {0.0, 1.0});

  const json dom = section(doc, "domain");
  check_keys(dom, "domain", {"shape", "center", "half_width", "radius"});
  cfg.domain.kind = get_enum<ShapeKind>(dom, "domain", "shape", ShapeKind::square,
                                        {{"square", ShapeKind::square}, {"disk", ShapeKind::disk}});
  cfg.domain.center = get_point(dom, "domain", "center", {0.5, 0.5});
  cfg.domain.half_width = get<double>(dom, "domain", "half_width", 0.25);
  cfg.domain.radius = get<double>(dom, "domain", "radius", 0.25);

  const json perf = section(doc, "perforation");
  check_keys(perf, "perforation",
             {"kind", "eps", "radius_ratio", "count", "radius", "seed", "density", "density_window", "density_floor"});
  cfg.perforation.kind = get_enum<PerforationKind>(perf, "perforation", "kind", PerforationKind::none,
                                                   {{"none", PerforationKind::none},
                                                    {"periodic_balls", PerforationKind::periodic_balls},
                                                    {"random_balls", PerforationKind::random_balls}});
  cfg.perforation.eps = get<double>(perf, "perforation", "eps", 0.125);
  cfg.perforation.radius_ratio = get<double>(perf, "perforation", "radius_ratio", 0.5);
  cfg.perforation.count = get<int>(perf, "perforation", "count", 0);
  cfg.perforation.radius = get<double>(perf, "perforation", "radius", 0.02);
  cfg.perforation.seed = get<std::uint64_t>(perf, "perforation", "seed", 0);
  cfg.density.mode = get_enum<DensityMode>(
      perf, "perforation", "density",
      cfg.perforation.kind == PerforationKind::random_balls ? DensityMode::cell_average : DensityMode::analytic,
      {{"analytic", DensityMode::analytic}, {"cell_average", DensityMode::cell_average}});
  cfg.density.window = get<double>(perf, "perforation", "density_window", 0.0);
  cfg.density.floor = get<double>(perf, "perforation", "density_floor", 1e-3);
  validate(cfg.perforation);

  const json ker = section(doc, "kernel");
  check_keys(ker, "kernel", {"family", "support_radius"});
  cfg.kernel.family = get_enum<KernelFamily>(ker, "kernel", "family", KernelFamily::tent,
                                             {{"bump", KernelFamily::bump},
                                              {"tent", KernelFamily::tent},
                                              {"truncated_gaussian", KernelFamily::truncated_gaussian}});
  cfg.kernel.support_radius = get<double>(ker, "kernel", "support_radius", 0.1);

  const json g = section(doc, "g");
  check_keys(g, "g", {"family", "a", "b", "M"});
  cfg.g.family = get_enum<GFamily>(g, "g", "family", GFamily::linear,
                                   {{"linear", GFamily::linear},
                                    {"tanh_scale", GFamily::tanh_scale},
                                    {"clamped_logistic", GFamily::clamped_logistic}});
  cfg.g.a = get<double>(g, "g", "a", 1.0);
  cfg.g.b = get<double>(g, "g", "b", 0.0);
  cfg.g.M = get<double>(g, "g", "M", 1.0);
  validate(cfg.g);

  const json avg = section(doc, "averaging");
  check_keys(avg, "averaging", {"delta", "denominator_floor"});
  cfg.averaging.delta = get<double>(avg, "averaging", "delta", 0.1);
  if (avg.contains("denominator_floor") && !avg.at("denominator_floor").is_null())
    cfg.averaging.denominator_floor = get<double>(avg, "averaging", "denominator_floor", 0.0);

  const json prob = section(doc, "problem");
  check_keys(prob, "problem", {"equation", "bc", "u0", "T", "dt", "scheme", "sample_stride"});
  cfg.problem.equation = get_enum<EquationKind>(prob, "problem", "equation", EquationKind::eps_problem,
                                                {{"eps_problem", EquationKind::eps_problem},
                                                 {"limit_dirichlet", EquationKind::limit_dirichlet},
                                                 {"limit_neumann", EquationKind::limit_neumann},
                                                 {"limit_delta_zero", EquationKind::limit_delta_zero}});
  cfg.problem.bc = get_enum<BoundaryCondition>(prob, "problem", "bc", BoundaryCondition::dirichlet,
                                               {{"dirichlet", BoundaryCondition::dirichlet},
                                                {"neumann", BoundaryCondition::neumann}});
  cfg.problem.T = get<double>(prob, "problem", "T", 1.0);
  cfg.problem.dt = get<double>(prob, "problem", "dt", 0.01);
  cfg.problem.scheme = get_enum<Scheme>(prob, "problem", "scheme", Scheme::etd1,
                                        {{"etd1", Scheme::etd1}, {"rk4", Scheme::rk4}, {"euler", Scheme::euler}});
  cfg.problem.sample_stride = get<int>(prob, "problem", "sample_stride", 10);
  if (prob.contains("u0")) {
    const json u0 = prob.at("u0");
    check_keys(u0, "problem.u0", {"preset", "amplitude", "center", "width", "value"});
    cfg.problem.u0.preset = get_enum<Preset>(u0, "problem.u0", "preset", Preset::gaussian_bump,
                                             {{"gaussian_bump", Preset::gaussian_bump},
                                              {"constant", Preset::constant},
                                              {"sine_product", Preset::sine_product}});
    cfg.problem.u0.amplitude = get<double>(u0, "problem.u0", "amplitude", 1.0);
    cfg.problem.u0.center = get_point(u0, "problem.u0", "center", cfg.domain.center);
    cfg.problem.u0.width = get<double>(u0, "problem.u0", "width", 0.1);
    cfg.problem.u0.value = get<double>(u0, "problem.u0", "value", 1.0);
  } else {
    cfg.problem.u0.center = cfg.domain.center;
  }

  if (doc.contains("sweep")) {
    const json sw = doc.at("sweep");
    check_keys(sw, "sweep", {"kind", "values", "sample_times", "probes", "probe_width", "eta"});
    SweepSettings s;
    s.kind = get_enum<SweepKind>(sw, "sweep", "kind", SweepKind::eps, {{"eps", SweepKind::eps}, {"delta", SweepKind::delta}});
    s.values = get<std::vector<double>>(sw, "sweep", "values", {});
    s.sample_times = get<std::vector<double>>(sw, "sweep", "sample_times", {cfg.problem.T});
    if (sw.contains("probes")) {
      for (const auto& p : get<std::vector<std::vector<double>>>(sw, "sweep", "probes", {})) {
        if (p.empty() || p.size() > 2) throw ConfigError("config: sweep.probes entries need 1 or 2 coordinates");
        s.probes.push_back({p[0], p.size() > 1 ? p[1] : 0.0});
      }
    }
    s.probe_width = get<double>(sw, "sweep", "probe_width", 0.0);
    s.eta = get<double>(sw, "sweep", "eta", 1.0);
    if (s.values.empty()) throw ConfigError("config: sweep.values must not be empty");
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!(s.values[i] > 0.0)) throw ConfigError("config: sweep.values must be positive");
      if (i > 0 && !(s.values[i] < s.values[i - 1])) throw ConfigError("config: sweep.values must be strictly decreasing");
    }
    if (s.sample_times.empty()) throw ConfigError("config: sweep.sample_times must not be empty");
    for (double t : s.sample_times)
      if (!(t > 0.0 && t <= cfg.problem.T + 1e-12)) throw ConfigError("config: sweep.sample_times must lie in (0, T]");
    cfg.sweep = s;
  }

  const json out = section(doc, "output");
  check_keys(out, "output", {"dir", "timing_in_csv", "snapshots"});
  cfg.output.dir = get<std::string>(out, "output", "dir", "results");
  cfg.output.timing_in_csv = get<bool>(out, "output", "timing_in_csv", false);
  cfg.output.snapshots = get<bool>(out, "output", "snapshots", true);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string config_hash(const json& doc) { return sha256_hex(doc.dump()); }

Grid make_grid(const RunConfig& cfg) { return build_grid(cfg.grid.dim, cfg.grid.n, cfg.grid.box); }

namespace {

double domain_margin(const RunConfig& cfg, const Grid& g) {
  const double ext = cfg.domain.kind == ShapeKind::square ? cfg.domain.half_width : cfg.domain.radius;
  double m = 1e300;
  for (int a = 0; a < g.dim; ++a)
    m = std::min({m, cfg.domain.center[a] - ext - g.low[a], g.high[a] - cfg.domain.center[a] - ext});
  return m;
}

} // namespace

std::shared_ptr<const Convolver> make_kernel(const RunConfig& cfg, const Grid& g) {
  return std::make_shared<const Convolver>(
      build_kernel(g, cfg.kernel.family, cfg.kernel.support_radius, domain_margin(cfg, g)));
}

double coverage_floor(const RunConfig& cfg, const Grid& g, double delta) {
  if (cfg.averaging.denominator_floor) return *cfg.averaging.denominator_floor;
  return 0.05 * ball_stencil(g, delta).mass();
}

std::shared_ptr<const Geometry> make_geometry(const RunConfig& cfg, const Grid& g, const PerforationSpec& perforation) {
  auto geo = std::make_shared<Geometry>();
  geo->grid = g;
  geo->perforation = perforation;
  geo->domain = domain_mask(g, cfg.domain, cfg.kernel.support_radius);
  const CoverageSpec cov{cfg.averaging.delta, coverage_floor(cfg, g, cfg.averaging.delta)};
  Perforation p = perforate(g, geo->domain, perforation, cov);
  geo->material = std::move(p.material);
  geo->density = effective_density(g, geo->domain, geo->material, perforation, cfg.density);
  return geo;
}

ProblemSpec make_problem(const RunConfig& cfg, std::shared_ptr<const Geometry> geometry,
                         std::shared_ptr<const Convolver> kernel) {
  ProblemSpec s;
  s.geometry = std::move(geometry);
  s.kernel = std::move(kernel);
  s.equation = cfg.problem.equation;
  s.bc = cfg.problem.bc;
  s.g = cfg.g;
  s.averaging = cfg.averaging;
  s.u0 = cfg.problem.u0;
  s.T = cfg.problem.T;
  s.dt = cfg.problem.dt;
  s.scheme = cfg.problem.scheme;
  s.sample_stride = cfg.problem.sample_stride;
  return s;
}

} // namespace nlhom
