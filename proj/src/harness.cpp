#include "nlhom/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "nlhom/error.hpp"
#include "nlhom/io.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/nonlinearity.hpp"

namespace nlhom {

using nlohmann::json;

std::vector<TestFunction> test_dictionary(int dim, const DomainShape& shape, std::vector<Point> probes, double width) {
  const double ext = shape.kind == ShapeKind::square ? shape.half_width : shape.radius;
  if (width <= 0.0) width = 2.0 * ext / 5.0;
  if (probes.empty()) {
    const Point c = shape.center;
    const double q = 0.5 * ext;
    if (dim == 1)
      probes = {c, {c[0] - q, 0.0}, {c[0] + q, 0.0}, {c[0] - 1.5 * q, 0.0}, {c[0] + 1.5 * q, 0.0}};
    else
      probes = {c, {c[0] - q, c[1] - q}, {c[0] + q, c[1] - q}, {c[0] - q, c[1] + q}, {c[0] + q, c[1] + q}};
  }

  std::vector<TestFunction> dict;
  dict.push_back({"1", [](const Point&) { return 1.0; }});
  dict.push_back({"x1", [](const Point& x) { return x[0]; }});
  if (dim == 2) dict.push_back({"x2", [](const Point& x) { return x[1]; }});
  dict.push_back({"x1^2", [](const Point& x) { return x[0] * x[0]; }});
  const double inv = 1.0 / (2.0 * width * width);
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const Point p = probes[k];
    dict.push_back({"gauss" + std::to_string(k), [p, inv, dim](const Point& x) {
                      double r2 = (x[0] - p[0]) * (x[0] - p[0]);
                      if (dim == 2) r2 += (x[1] - p[1]) * (x[1] - p[1]);
                      return std::exp(-r2 * inv);
                    }});
  }
  return dict;
}

double weak_error(const MaskedField& u, const MaskedField& v, const FieldFunction& phi) {
  require_same_grid(u.grid, v.grid, "weak_error");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u.in(i) ? u.values[i] : 0.0;
    const double b = v.in(i) ? v.values[i] : 0.0;
    if (a != b) s += phi(u.grid.point(i)) * (a - b);
  }
  return std::abs(s * u.grid.cell_volume);
}

double l2_distance(const MaskedField& u, const MaskedField& v) {
  require_same_grid(u.grid, v.grid, "l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = (u.in(i) ? u.values[i] : 0.0) - (v.in(i) ? v.values[i] : 0.0);
    s += d * d;
  }
  return std::sqrt(s * u.grid.cell_volume);
}

std::vector<double> SweepReport::headline() const {
  std::vector<double> out;
  for (const auto& m : members)
    out.push_back(kind == SweepKind::eps ? m.max_weak_error : (m.l2_distance.empty() ? 0.0 : m.l2_distance.back()));
  return out;
}

bool SweepReport::strictly_decreasing() const {
  const auto h = headline();
  for (std::size_t i = 1; i < h.size(); ++i)
    if (!(h[i] < h[i - 1])) return false;
  return true;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NLHOM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, worker_count());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::shared_ptr<const Geometry> constant_density_geometry(const Grid& g, const MaskedField& domain, double x,
                                                          const PerforationSpec& perforation) {
  auto geo = std::make_shared<Geometry>();
  geo->grid = g;
  geo->domain = domain;
  geo->material = domain;
  geo->density = MaskedField(g);
  geo->density.mask = domain.mask;
  for (std::size_t i = 0; i < g.size(); ++i) geo->density.values[i] = domain.in(i) ? x : 0.0;
  geo->perforation = perforation;
  return geo;
}

namespace {

std::optional<double> constant_density(const Geometry& geo) {
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < geo.grid.size(); ++i)
    if (geo.domain.in(i)) {
      lo = std::min(lo, geo.density.values[i]);
      hi = std::max(hi, geo.density.values[i]);
    }
  if (hi < lo || hi - lo > 1e-12) return std::nullopt;
  return hi;
}

} // namespace

double rho_form_residual(const Problem& p, const MaskedField& u) {
  if (p.spec().equation != EquationKind::limit_dirichlet)
    throw std::invalid_argument("rho_form_residual: needs a limit_dirichlet problem");
  const Geometry& geo = *p.spec().geometry;
  const auto x = constant_density(geo);
  if (!x) throw ConfigError("rho_form_residual: needs a constant X on Omega");
  const double rho = 1.0 / *x;
  const Grid& g = p.grid();

  const Convolver ball(ball_stencil(g, p.spec().averaging.delta));
  const double b = ball.stencil().mass();
  const MaskedField cover = ball.apply(geo.domain);
  const MaskedField sums = ball.apply(u);
  const MaskedField ju = p.kernel().apply(u);
  const MaskedField unified = rhs(p, u);

  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!geo.domain.in(i) || cover.values[i] < b * (1.0 - 1e-12)) continue;
    const double ui = u.values[i];
    const double m = sums.values[i] / b;
    const double rho_rhs = (ju.values[i] - ui + (1.0 - rho) * ui + p.spec().g(rho * m)) / rho;
    worst = std::max(worst, std::abs(rho_rhs - unified.values[i]));
  }
  return worst;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct MemberRun {
  Trajectory traj;
  BoundReport bound;
  std::optional<double> rho_residual;
  double wall_ms = 0.0;
};

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Re-throws with the member's description, keeping the error category.
[[noreturn]] void member_failed(const std::string& who, const std::exception& e) {
  const std::string msg = "sweep member " + who + " failed: " + e.what();
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
  if (dynamic_cast<const NumericalError*>(&e)) throw NumericalError(msg);
  throw std::runtime_error(msg);
}

std::size_t sample_index(const Trajectory& traj, double t) {
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (std::abs(traj.times[i] - t) <= 0.5 * traj.dt + 1e-12) return i;
  throw std::out_of_range("trajectory has no sample at t = " + std::to_string(t));
}

json grid_json(const Grid& g) {
  json j;
  j["dim"] = g.dim;
  j["n"] = std::vector<int>(g.n.begin(), g.n.begin() + g.dim);
  j["low"] = std::vector<double>(g.low.begin(), g.low.begin() + g.dim);
  j["high"] = std::vector<double>(g.high.begin(), g.high.begin() + g.dim);
  j["h"] = std::vector<double>(g.h.begin(), g.h.begin() + g.dim);
  j["points"] = g.size();
  j["bytes_per_field"] = g.bytes_per_field();
  return j;
}

json kernel_json(const RunConfig& cfg, const Convolver& k) {
  json j;
  j["family"] = to_string(cfg.kernel.family);
  j["support_radius"] = cfg.kernel.support_radius;
  j["reach"] = std::vector<int>(k.stencil().reach.begin(), k.stencil().reach.begin() + k.grid().dim);
  j["center_weight"] = k.stencil().center();
  j["mass"] = k.stencil().mass();
  return j;
}

const SweepSettings& sweep_settings(const RunConfig& cfg, SweepKind kind) {
  if (!cfg.sweep) throw ConfigError("config: a sweep section is required");
  if (cfg.sweep->kind != kind)
    throw ConfigError("config: sweep.kind is '" + to_string(cfg.sweep->kind) + "', expected '" + to_string(kind) + "'");
  return *cfg.sweep;
}

// Shared record assembly: member trajectories against one reference.
SweepReport assemble(const RunConfig& cfg, SweepKind kind, const std::vector<TestFunction>& dict,
                     const std::vector<MemberRun>& runs, const Trajectory& reference) {
  const SweepSettings& sw = *cfg.sweep;
  SweepReport rep;
  rep.kind = kind;
  rep.config = cfg.source;
  rep.config_hash = config_hash(cfg.source);
  rep.sample_times = sw.sample_times;
  rep.timing_in_csv = cfg.output.timing_in_csv;
  for (const auto& tf : dict) rep.test_functions.push_back(tf.name);

  for (std::size_t m = 0; m < runs.size(); ++m) {
    const MemberRun& run = runs[m];
    MemberSummary s;
    s.value = sw.values[m];
    s.worst_bound_margin = run.bound.worst_margin;
    s.bound_violations = run.bound.violations;
    s.lambda1 = run.bound.lambda1;
    s.lambda1_fallback = run.bound.lambda1_fallback;
    s.lipschitz = run.bound.lipschitz;
    s.rho_residual = run.rho_residual;
    s.wall_ms = run.wall_ms;
    for (double t : sw.sample_times) {
      const std::size_t iu = sample_index(run.traj, t);
      const MaskedField& u = run.traj.states[iu];
      const MaskedField& v = reference.states[sample_index(reference, t)];
      const double l2 = l2_distance(u, v);
      s.l2_distance.push_back(l2);
      for (const auto& tf : dict) {
        SweepRecord r;
        r.sweep_value = s.value;
        r.test_function = tf.name;
        r.sample_time = t;
        r.weak_error = weak_error(u, v, tf.phi);
        r.l2_distance = l2;
        r.bound_margin = run.bound.samples[iu].margin;
        r.wall_ms = run.wall_ms;
        s.max_weak_error = std::max(s.max_weak_error, r.weak_error);
        rep.records.push_back(r);
      }
    }
    rep.members.push_back(std::move(s));
  }
  return rep;
}

void write_snapshots(const std::filesystem::path& dir, const std::vector<MemberRun>& runs, const Trajectory& reference,
                     const std::vector<double>& values, const std::string& label) {
  std::filesystem::create_directories(dir);
  for (std::size_t m = 0; m < runs.size(); ++m) {
    const std::string stem = "member" + std::to_string(m) + "_" + label + "_" + format_value(values[m]);
    write_field_csv(dir / (stem + "_final.csv"), runs[m].traj.states.back());
    write_pgm(dir / (stem + "_final.pgm"), runs[m].traj.states.back(), 0.0, std::max(1e-300, max_abs(runs[m].traj.states.front())));
  }
  write_field_csv(dir / "reference_final.csv", reference.states.back());
  write_pgm(dir / "reference_final.pgm", reference.states.back(), 0.0,
            std::max(1e-300, max_abs(reference.states.front())));
}

} // namespace

SweepReport run_eps_sweep(const RunConfig& cfg, const std::optional<std::filesystem::path>& snapshot_dir) {
  const SweepSettings& sw = sweep_settings(cfg, SweepKind::eps);
  if (cfg.perforation.kind == PerforationKind::random_balls)
    throw ConfigError("sweep-eps: needs periodic_balls (or none) perforations sharing one analytic X");

  const Grid g = make_grid(cfg);
  const auto kernel = make_kernel(cfg, g);
  const MaskedField domain = domain_mask(g, cfg.domain, cfg.kernel.support_radius);
  const double x = cfg.perforation.kind == PerforationKind::none ? 1.0
                                                                 : periodic_density(g.dim, cfg.perforation.radius_ratio);
  const auto dict = test_dictionary(g.dim, cfg.domain, sw.probes, sw.probe_width);
  const std::size_t n = sw.values.size();

  std::vector<MemberRun> runs(n);
  Trajectory reference;
  double reference_ms = 0.0;
  const EquationKind limit_eq =
      cfg.problem.bc == BoundaryCondition::dirichlet ? EquationKind::limit_dirichlet : EquationKind::limit_neumann;

  parallel_for(n + 1, [&](std::size_t i) {
    const auto start = Clock::now();
    if (i == n) {
      try {
        ProblemSpec spec = make_problem(cfg, constant_density_geometry(g, domain, x, cfg.perforation), kernel);
        spec.equation = limit_eq;
        reference = integrate(Problem(spec), sw.sample_times);
      } catch (const std::exception& e) {
        member_failed("reference " + to_string(limit_eq), e);
      }
      reference_ms = elapsed_ms(start);
      return;
    }
    PerforationSpec perf = cfg.perforation;
    perf.eps = sw.values[i];
    try {
      ProblemSpec spec = make_problem(cfg, make_geometry(cfg, g, perf), kernel);
      spec.equation = EquationKind::eps_problem;
      const Problem p(spec);
      MemberRun& run = runs[i];
      run.traj = integrate(p, sw.sample_times);
      run.bound = bound_monitor(run.traj, p, sw.eta, std::nullopt, sweep_eigen_budget);
    } catch (const std::exception& e) {
      member_failed("eps=" + format_value(perf.eps) + " (" + to_string(perf.kind) + ", radius_ratio " +
                        format_value(perf.radius_ratio) + ", bc " + to_string(cfg.problem.bc) + ")",
                    e);
    }
    runs[i].wall_ms = elapsed_ms(start);
  });

  SweepReport rep = assemble(cfg, SweepKind::eps, dict, runs, reference);
  rep.metadata["grid"] = grid_json(g);
  rep.metadata["kernel"] = kernel_json(cfg, *kernel);
  rep.metadata["bc"] = to_string(cfg.problem.bc);
  rep.metadata["member_equation"] = to_string(EquationKind::eps_problem);
  rep.metadata["reference_equation"] = to_string(limit_eq);
  rep.metadata["density"] = x;
  rep.metadata["perforation"] = to_string(cfg.perforation.kind);
  rep.metadata["radius_ratio"] = cfg.perforation.radius_ratio;
  rep.metadata["reference_wall_ms"] = reference_ms;
  rep.metadata["eigen_budget"] = sweep_eigen_budget;
  if (snapshot_dir) write_snapshots(*snapshot_dir, runs, reference, sw.values, "eps");
  return rep;
}

SweepReport run_delta_sweep(const RunConfig& cfg, const std::optional<std::filesystem::path>& snapshot_dir) {
  const SweepSettings& sw = sweep_settings(cfg, SweepKind::delta);
  const Grid g = make_grid(cfg);
  const auto kernel = make_kernel(cfg, g);
  const auto geo = make_geometry(cfg, g, cfg.perforation);
  const auto x = constant_density(*geo);
  const auto dict = test_dictionary(g.dim, cfg.domain, sw.probes, sw.probe_width);
  const std::size_t n = sw.values.size();
  const bool dirichlet = cfg.problem.bc == BoundaryCondition::dirichlet;
  const EquationKind member_eq = dirichlet ? EquationKind::limit_dirichlet : EquationKind::limit_neumann;

  std::vector<MemberRun> runs(n);
  Trajectory reference;
  double reference_ms = 0.0;

  parallel_for(n + 1, [&](std::size_t i) {
    const auto start = Clock::now();
    ProblemSpec spec = make_problem(cfg, geo, kernel);
    if (i == n) {
      try {
        spec.equation = EquationKind::limit_delta_zero;
        reference = integrate(Problem(spec), sw.sample_times);
      } catch (const std::exception& e) {
        member_failed("reference limit_delta_zero", e);
      }
      reference_ms = elapsed_ms(start);
      return;
    }
    spec.equation = member_eq;
    spec.averaging.delta = sw.values[i];
    try {
      const Problem p(spec);
      MemberRun& run = runs[i];
      run.traj = integrate(p, sw.sample_times);
      run.bound = bound_monitor(run.traj, p, sw.eta, std::nullopt, sweep_eigen_budget);
      if (dirichlet && x) run.rho_residual = rho_form_residual(p, run.traj.states.back());
    } catch (const std::exception& e) {
      member_failed("delta=" + format_value(sw.values[i]) + " (" + to_string(member_eq) + ")", e);
    }
    runs[i].wall_ms = elapsed_ms(start);
  });

  SweepReport rep = assemble(cfg, SweepKind::delta, dict, runs, reference);
  rep.metadata["grid"] = grid_json(g);
  rep.metadata["kernel"] = kernel_json(cfg, *kernel);
  rep.metadata["bc"] = to_string(cfg.problem.bc);
  rep.metadata["member_equation"] = to_string(member_eq);
  rep.metadata["reference_equation"] = to_string(EquationKind::limit_delta_zero);
  rep.metadata["density"] = x ? json(*x) : json("varying");
  rep.metadata["perforation"] = to_string(cfg.perforation.kind);
  rep.metadata["reference_wall_ms"] = reference_ms;
  rep.metadata["eigen_budget"] = sweep_eigen_budget;
  if (snapshot_dir) write_snapshots(*snapshot_dir, runs, reference, sw.values, "delta");
  return rep;
}

json to_json(const SweepReport& r) {
  json j;
  j["kind"] = to_string(r.kind);
  j["config_hash"] = r.config_hash;
  j["config"] = r.config;
  j["metadata"] = r.metadata;
  j["test_functions"] = r.test_functions;
  j["sample_times"] = r.sample_times;
  j["timing_in_csv"] = r.timing_in_csv;
  j["strictly_decreasing"] = r.strictly_decreasing();
  j["members"] = json::array();
  for (const auto& m : r.members) {
    json e;
    e["value"] = m.value;
    e["max_weak_error"] = m.max_weak_error;
    e["l2_distance"] = m.l2_distance;
    e["worst_bound_margin"] = m.worst_bound_margin;
    e["bound_violations"] = m.bound_violations;
    e["lambda1"] = m.lambda1;
    e["lambda1_fallback"] = m.lambda1_fallback;
    e["lipschitz"] = m.lipschitz;
    e["rho_residual"] = m.rho_residual ? json(*m.rho_residual) : json(nullptr);
    e["wall_ms"] = m.wall_ms;
    e["config_hash"] = r.config_hash;
    j["members"].push_back(e);
  }
  j["records"] = json::array();
  for (const auto& rec : r.records) {
    j["records"].push_back({{"sweep_value", rec.sweep_value},
                            {"test_function", rec.test_function},
                            {"sample_time", rec.sample_time},
                            {"weak_error", rec.weak_error},
                            {"l2_distance", rec.l2_distance},
                            {"bound_margin", rec.bound_margin},
                            {"wall_ms", rec.wall_ms},
                            {"config_hash", r.config_hash}});
  }
  return j;
}

SweepReport report_from_json(const json& j) {
  try {
    SweepReport r;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind != "eps" && kind != "delta") throw ConfigError("report: unknown kind '" + kind + "'");
    r.kind = kind == "eps" ? SweepKind::eps : SweepKind::delta;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.config = j.value("config", json::object());
    r.metadata = j.value("metadata", json::object());
    r.test_functions = j.at("test_functions").get<std::vector<std::string>>();
    r.sample_times = j.at("sample_times").get<std::vector<double>>();
    r.timing_in_csv = j.value("timing_in_csv", false);
    for (const auto& e : j.at("members")) {
      MemberSummary m;
      m.value = e.at("value").get<double>();
      m.max_weak_error = e.at("max_weak_error").get<double>();
      m.l2_distance = e.at("l2_distance").get<std::vector<double>>();
      m.worst_bound_margin = e.at("worst_bound_margin").get<double>();
      m.bound_violations = e.at("bound_violations").get<int>();
      m.lambda1 = e.at("lambda1").get<double>();
      m.lambda1_fallback = e.at("lambda1_fallback").get<bool>();
      m.lipschitz = e.at("lipschitz").get<double>();
      if (!e.at("rho_residual").is_null()) m.rho_residual = e.at("rho_residual").get<double>();
      m.wall_ms = e.at("wall_ms").get<double>();
      r.members.push_back(std::move(m));
    }
    for (const auto& e : j.at("records")) {
      SweepRecord rec;
      rec.sweep_value = e.at("sweep_value").get<double>();
      rec.test_function = e.at("test_function").get<std::string>();
      rec.sample_time = e.at("sample_time").get<double>();
      rec.weak_error = e.at("weak_error").get<double>();
      rec.l2_distance = e.at("l2_distance").get<double>();
      rec.bound_margin = e.at("bound_margin").get<double>();
      rec.wall_ms = e.at("wall_ms").get<double>();
      r.records.push_back(std::move(rec));
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report: malformed report.json: ") + e.what());
  }
}

void write_report_csv(std::ostream& os, const SweepReport& r) {
  os << "sweep_value,test_function,sample_time,weak_error,l2_distance,bound_margin,wall_ms\n";
  os << std::setprecision(17);
  for (const auto& rec : r.records) {
    os << rec.sweep_value << ',' << rec.test_function << ',' << rec.sample_time << ',' << rec.weak_error << ','
       << rec.l2_distance << ',' << rec.bound_margin << ',' << (r.timing_in_csv ? rec.wall_ms : 0.0) << '\n';
  }
}

std::string plot_file_name(SweepKind kind) { return kind == SweepKind::eps ? "error_vs_eps.svg" : "error_vs_delta.svg"; }

namespace {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> y;
};

} // namespace

void write_report_svg(std::ostream& os, const SweepReport& r) {
  const double W = 640, H = 420, left = 80, right = 160, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  const std::string xname = r.kind == SweepKind::eps ? "eps" : "delta";

  std::vector<double> xs;
  Series weak{"max weak error", "#1f77b4", {}}, l2{"L2 distance at T", "#d62728", {}};
  for (const auto& m : r.members) {
    xs.push_back(m.value);
    weak.y.push_back(m.max_weak_error);
    l2.y.push_back(m.l2_distance.empty() ? 0.0 : m.l2_distance.back());
  }
  const std::vector<Series> series{weak, l2};

  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (double x : xs)
    if (x > 0) xlo = std::min(xlo, std::log10(x)), xhi = std::max(xhi, std::log10(x));
  for (const auto& s : series)
    for (double y : s.y)
      if (y > 0) ylo = std::min(ylo, std::log10(y)), yhi = std::max(yhi, std::log10(y));
  if (xlo > xhi) xlo = -1, xhi = 0;
  if (ylo > yhi) ylo = -1, yhi = 0;
  xlo = std::floor(xlo - 0.05), xhi = std::ceil(xhi + 0.05);
  ylo = std::floor(ylo - 0.05), yhi = std::ceil(yhi + 0.05);
  auto px = [&](double v) { return left + (std::log10(v) - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double v) { return top + (yhi - std::log10(v)) / (yhi - ylo) * ph; };

  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">error vs " << xname
     << " (log-log)</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(xlo); d <= static_cast<int>(xhi); ++d) {
    const double x = px(std::pow(10.0, d));
    os << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(ylo); d <= static_cast<int>(yhi); ++d) {
    const double y = py(std::pow(10.0, d));
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << xname << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    std::ostringstream pts;
    pts << std::setprecision(6);
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i] > 0 && s.y[i] > 0) pts << px(xs[i]) << ',' << py(s.y[i]) << ' ';
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"" << pts.str()
       << "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i] > 0 && s.y[i] > 0)
        os << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3.5\" fill=\"" << s.color
           << "\"/>\n";
    const double ly = top + 16 + 20 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
}

void write_report(const std::filesystem::path& dir, const SweepReport& r) {
  std::filesystem::create_directories(dir);
  {
    auto os = open_output(dir / "report.json");
    os << to_json(r).dump(2) << '\n';
  }
  {
    auto os = open_output(dir / "report.csv");
    write_report_csv(os, r);
  }
  auto os = open_output(dir / plot_file_name(r.kind));
  write_report_svg(os, r);
}

} // namespace nlhom
