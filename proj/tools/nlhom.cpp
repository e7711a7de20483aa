// nlhom command-line driver.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "nlhom/config.hpp"
#include "nlhom/error.hpp"
#include "nlhom/harness.hpp"
#include "nlhom/io.hpp"
#include "nlhom/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nlhom;

namespace {

fs::path output_dir(const RunConfig& cfg, const std::string& flag) { return flag.empty() ? fs::path(cfg.output.dir) : fs::path(flag); }

// Problem for the configured equation on the configured geometry.
Problem configured_problem(const RunConfig& cfg) {
  const Grid g = make_grid(cfg);
  auto kernel = make_kernel(cfg, g);
  auto geo = make_geometry(cfg, g, cfg.perforation);
  return Problem(make_problem(cfg, geo, kernel));
}

const MaskedField* eigen_weight(const Problem& p) {
  return p.spec().equation == EquationKind::eps_problem ? nullptr : &p.coefficient_a();
}

int cmd_run(const std::string& config, const std::string& out, double eta) {
  const RunConfig cfg = load_config(config);
  const Problem p = configured_problem(cfg);
  const Trajectory traj = integrate(p);
  const BoundReport bound = bound_monitor(traj, p, eta);
  const fs::path dir = output_dir(cfg, out);
  fs::create_directories(dir);

  json manifest;
  manifest["config_hash"] = config_hash(cfg.source);
  manifest["equation"] = to_string(cfg.problem.equation);
  manifest["bc"] = to_string(cfg.problem.bc);
  manifest["scheme"] = to_string(cfg.problem.scheme);
  manifest["dt"] = p.step_size();
  manifest["steps"] = p.step_count();
  manifest["times"] = traj.times;
  manifest["norm_log"] = traj.norm_log;
  manifest["bound"] = {{"eta", bound.eta},           {"lambda1", bound.lambda1},
                       {"lambda1_fallback", bound.lambda1_fallback}, {"lipschitz", bound.lipschitz},
                       {"worst_margin", bound.worst_margin},         {"violations", bound.violations}};
  json files = json::array();
  if (cfg.output.snapshots) {
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
      char name[64];
      std::snprintf(name, sizeof name, "state_%04zu.csv", s);
      write_field_csv(dir / name, traj.states[s]);
      files.push_back(name);
    }
  }
  manifest["snapshots"] = files;
  auto os = open_output(dir / "manifest.json");
  os << manifest.dump(2) << '\n';
  std::cout << "run: " << p.step_count() << " steps, final L2 norm " << traj.norm_log.back() << ", bound violations "
            << bound.violations << "\nwrote " << (dir / "manifest.json").string() << '\n';
  return bound.violations == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& config, const std::string& out, SweepKind kind) {
  const RunConfig cfg = load_config(config);
  if (!cfg.sweep) throw ConfigError("config '" + config + "' has no sweep section");
  const fs::path dir = output_dir(cfg, out);
  std::optional<fs::path> snaps;
  if (cfg.output.snapshots) snaps = dir / "snapshots";
  const SweepReport rep = kind == SweepKind::eps ? run_eps_sweep(cfg, snaps) : run_delta_sweep(cfg, snaps);
  write_report(dir, rep);

  const auto head = rep.headline();
  std::cout << std::setw(12) << to_string(kind) << std::setw(18) << (kind == SweepKind::eps ? "max_weak_error" : "l2_at_T")
            << std::setw(16) << "bound_margin" << std::setw(12) << "violations" << '\n';
  for (std::size_t i = 0; i < rep.members.size(); ++i)
    std::cout << std::setw(12) << rep.members[i].value << std::setw(18) << head[i] << std::setw(16)
              << rep.members[i].worst_bound_margin << std::setw(12) << rep.members[i].bound_violations << '\n';
  if (!rep.strictly_decreasing()) std::cout << "note: error is not strictly decreasing along the sweep\n";
  std::cout << "wrote " << (dir / "report.json").string() << ", report.csv, " << plot_file_name(kind) << '\n';
  return 0;
}

int cmd_eigen(const std::string& config, const std::string& out, double tol, int max_iter) {
  const RunConfig cfg = load_config(config);
  const Problem p = configured_problem(cfg);
  const EigenResult r = lambda1(p.kernel(), p.coefficient_h(), p.support(), {tol, max_iter}, eigen_weight(p));
  json j = to_json(r);
  j["config_hash"] = config_hash(cfg.source);
  std::cout << j.dump(2) << '\n';
  if (!out.empty()) {
    fs::create_directories(out);
    write_field_csv(fs::path(out) / "eigenfield.csv", r.eigenfield);
    auto os = open_output(fs::path(out) / "eigen.json");
    os << j.dump(2) << '\n';
  }
  return 0;
}

struct Check {
  std::string name;
  double value;
  double limit;
  bool upper; // value must be <= limit (else >= limit)
  bool ok() const { return upper ? value <= limit : value >= limit; }
  double margin() const { return upper ? limit - value : value - limit; }
};

int cmd_validate(const std::string& config) {
  const RunConfig cfg = load_config(config);
  const Grid g = make_grid(cfg);
  const auto kernel = make_kernel(cfg, g);
  const auto geo = make_geometry(cfg, g, cfg.perforation);
  const Stencil& st = kernel->stencil();
  std::vector<Check> checks;

  checks.push_back({"kernel_mass", std::abs(st.mass() - 1.0), 1e-12, true});
  double asym = 0.0;
  for (int i = -st.reach[0]; i <= st.reach[0]; ++i)
    for (int j = -st.reach[1]; j <= st.reach[1]; ++j) asym = std::max(asym, std::abs(st.at(i, j) - st.at(-i, -j)));
  checks.push_back({"kernel_symmetry", asym, 0.0, true});
  checks.push_back({"kernel_center", st.center(), 0.0, false});
  if (!(st.center() > 0.0)) checks.back().limit = std::nextafter(0.0, 1.0);

  const double floor = coverage_floor(cfg, g, cfg.averaging.delta);
  checks.push_back(
      {"mask_coverage", worst_ball_coverage(g, geo->domain, geo->material, cfg.averaging.delta), floor, false});
  double xmin = 1e300;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (geo->domain.in(i)) xmin = std::min(xmin, geo->density.values[i]);
  checks.push_back({"density_floor", xmin, cfg.density.floor, false});

  const InitialData bump{Preset::gaussian_bump, 1.0, cfg.domain.center, cfg.problem.u0.width, 1.0};
  auto u = [&](const Point& x) {
    double r2 = (x[0] - bump.center[0]) * (x[0] - bump.center[0]);
    if (g.dim == 2) r2 += (x[1] - bump.center[1]) * (x[1] - bump.center[1]);
    return bump.amplitude * std::exp(-r2 / (2.0 * bump.width * bump.width));
  };
  const double R = cfg.averaging.delta;
  const Point dir = g.dim == 1 ? Point{1.0, 0.0} : Point{std::sqrt(0.5), std::sqrt(0.5)};
  const Point x0{cfg.domain.center[0] + 0.1 * R, cfg.domain.center[1] + 0.05 * R};
  checks.push_back({"gradient_identity", ball_gradient_check(u, g.dim, x0, R, dir, 1e-3 * R, 512).rel_err, 1e-4, true});

  MaskedField field(g);
  field.mask = geo->material.mask;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) field.values[i] = field.in(i) ? dist(rng) : 0.0;
  const MaskedField h = kernel->apply(geo->material);
  const double form = quadratic_form_direct(st, geo->material.mask, field);
  const double via_h = inner(field, apply_linear_operator(*kernel, h, geo->material.mask, field));
  checks.push_back({"form_identity", std::abs(form - via_h) / std::max(std::abs(form), 1e-300), 1e-10, true});

  bool ok = true;
  std::cout << std::left << std::setw(20) << "check" << std::right << std::setw(16) << "value" << std::setw(16)
            << "limit" << std::setw(16) << "margin" << "  status\n";
  for (const auto& c : checks) {
    ok = ok && c.ok();
    std::cout << std::left << std::setw(20) << c.name << std::right << std::setprecision(6) << std::setw(16) << c.value
              << std::setw(16) << c.limit << std::setw(16) << c.margin() << "  " << (c.ok() ? "ok" : "FAIL") << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_report(const std::string& in, const std::string& out) {
  std::ifstream is(in);
  if (!is) throw ConfigError("report: cannot open '" + in + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("report: '" + in + "' is not valid JSON: " + e.what());
  }
  const SweepReport rep = report_from_json(j);
  const fs::path dir = out.empty() ? fs::path(in).parent_path() : fs::path(out);
  fs::create_directories(dir.empty() ? fs::path(".") : dir);
  {
    auto os = open_output(dir / "report.csv");
    write_report_csv(os, rep);
  }
  auto os = open_output(dir / plot_file_name(rep.kind));
  write_report_svg(os, rep);
  std::cout << "wrote " << (dir / "report.csv").string() << ", " << plot_file_name(rep.kind) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal evolution on perforated domains: integration, sweeps and checks"};
  app.require_subcommand(1);

  std::string config, out, in;
  double eta = 1.0, tol = 1e-10;
  int max_iter = 10000;

  auto* run = app.add_subcommand("run", "integrate one problem and export its trajectory");
  run->add_option("-c,--config", config, "config JSON")->required();
  run->add_option("-o,--out", out, "output directory (default: output.dir)");
  run->add_option("--eta", eta, "bound-monitor parameter");

  auto* seps = app.add_subcommand("sweep-eps", "eps-sweep against the homogenized limit");
  seps->add_option("-c,--config", config, "config JSON")->required();
  seps->add_option("-o,--out", out, "output directory (default: output.dir)");

  auto* sdelta = app.add_subcommand("sweep-delta", "delta-sweep against the local-reaction limit");
  sdelta->add_option("-c,--config", config, "config JSON")->required();
  sdelta->add_option("-o,--out", out, "output directory (default: output.dir)");

  auto* eig = app.add_subcommand("eigen", "first eigenvalue of the linear operator");
  eig->add_option("-c,--config", config, "config JSON")->required();
  eig->add_option("-o,--out", out, "directory for eigen.json and eigenfield.csv");
  eig->add_option("--tol", tol, "convergence tolerance");
  eig->add_option("--max-iter", max_iter, "iteration budget");

  auto* val = app.add_subcommand("validate", "kernel, coverage, gradient and form checks");
  val->add_option("-c,--config", config, "config JSON")->required();

  auto* rep = app.add_subcommand("report", "render report.json to CSV and SVG");
  rep->add_option("-i,--in", in, "report.json")->required();
  rep->add_option("-o,--out", out, "output directory (default: next to the input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*run) return cmd_run(config, out, eta);
    if (*seps) return cmd_sweep(config, out, SweepKind::eps);
    if (*sdelta) return cmd_sweep(config, out, SweepKind::delta);
    if (*eig) return cmd_eigen(config, out, tol, max_iter);
    if (*val) return cmd_validate(config);
    if (*rep) return cmd_report(in, out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
