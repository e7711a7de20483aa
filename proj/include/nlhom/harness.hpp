#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlhom/config.hpp"
#include "nlhom/evolution.hpp"
#include "nlhom/grid.hpp"

namespace nlhom {

using FieldFunction = std::function<double(const Point&)>;

struct TestFunction {
  std::string name;
  FieldFunction phi;
};

/// {1, x1, x2 (2D only), x1^2, gaussian bumps at the probes}. Empty `probes`
/// selects five interior points of the domain shape; width <= 0 selects a fifth
/// of the shape's smallest extent.
std::vector<TestFunction> test_dictionary(int dim, const DomainShape& shape, std::vector<Point> probes = {},
                                          double width = 0.0);

/// |sum over the grid of phi (u - v) cell_volume|; both fields vanish off their masks.
double weak_error(const MaskedField& u, const MaskedField& v, const FieldFunction& phi);

/// L2 norm of u - v over the whole grid.
double l2_distance(const MaskedField& u, const MaskedField& v);

struct SweepRecord {
  double sweep_value = 0.0;
  std::string test_function;
  double sample_time = 0.0;
  double weak_error = 0.0;
  double l2_distance = 0.0;
  double bound_margin = 0.0;
  double wall_ms = 0.0;
};

struct MemberSummary {
  double value = 0.0;
  double max_weak_error = 0.0;
  std::vector<double> l2_distance; // per sample time
  double worst_bound_margin = 0.0;
  int bound_violations = 0;
  double lambda1 = 0.0;
  bool lambda1_fallback = false;
  double lipschitz = 0.0;
  std::optional<double> rho_residual;
  double wall_ms = 0.0;
};

struct SweepReport {
  SweepKind kind = SweepKind::eps;
  std::string config_hash;
  nlohmann::json config;
  nlohmann::json metadata; // grid, kernel, equations, reference timing
  std::vector<std::string> test_functions;
  std::vector<double> sample_times;
  std::vector<MemberSummary> members;
  std::vector<SweepRecord> records;
  bool timing_in_csv = false;

  /// max weak error (eps sweeps) or L2 distance at the last sample time (delta sweeps).
  std::vector<double> headline() const;
  bool strictly_decreasing() const;
};

/// Runs fn(0..n-1) on a pool capped by NLHOM_THREADS (default: logical cores).
/// The first exception, in index order, is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);
unsigned worker_count();

/// Limit-problem geometry: material = domain, density = constant `x` on the domain.
std::shared_ptr<const Geometry> constant_density_geometry(const Grid& g, const MaskedField& domain, double x,
                                                          const PerforationSpec& perforation);

/// Max over interior points (balls of radius delta inside the domain) of the
/// pointwise gap between the unified limit_dirichlet rhs and its rho = 1/X form.
double rho_form_residual(const Problem& p, const MaskedField& u);

/// With `snapshot_dir` set, the final state of every member and of the
/// reference problem is written there as field CSV.
SweepReport run_eps_sweep(const RunConfig& cfg, const std::optional<std::filesystem::path>& snapshot_dir = {});
SweepReport run_delta_sweep(const RunConfig& cfg, const std::optional<std::filesystem::path>& snapshot_dir = {});

/// Budget for the eigen-iteration inside sweep bound monitors; 0 falls back
/// to lambda1 = 0 straight away.
inline constexpr int sweep_eigen_budget = 2000;

nlohmann::json to_json(const SweepReport& r);
SweepReport report_from_json(const nlohmann::json& j);

void write_report_csv(std::ostream& os, const SweepReport& r);
void write_report_svg(std::ostream& os, const SweepReport& r);
std::string plot_file_name(SweepKind kind);

/// report.json, report.csv and the error plot under `dir`.
void write_report(const std::filesystem::path& dir, const SweepReport& r);

} // namespace nlhom
