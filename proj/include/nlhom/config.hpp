#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlhom/evolution.hpp"
#include "nlhom/geometry.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/nonlinearity.hpp"

namespace nlhom {

enum class SweepKind { eps, delta };
std::string to_string(SweepKind k);

struct GridConfig {
  int dim = 2;
  std::vector<int> n{64, 64};
  std::vector<std::array<double, 2>> box{{0.0, 1.0}, {0.0, 1.0}};
};

struct KernelConfig {
  KernelFamily family = KernelFamily::tent;
  double support_radius = 0.1;
};

struct ProblemConfig {
  EquationKind equation = EquationKind::eps_problem;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  InitialData u0;
  double T = 1.0;
  double dt = 0.01;
  Scheme scheme = Scheme::etd1;
  int sample_stride = 10;
};

struct SweepSettings {
  SweepKind kind = SweepKind::eps;
  std::vector<double> values;
  std::vector<double> sample_times;
  std::vector<Point> probes; // empty: five default interior probes
  double probe_width = 0.0;  // 0: a fifth of Omega's smallest extent
  double eta = 1.0;
};

struct OutputConfig {
  std::string dir = "results";
  bool timing_in_csv = false;
  bool snapshots = true;
};

/// One JSON document with sections
/// {grid, domain, perforation, kernel, g, averaging, problem, sweep, output}.
/// Unknown keys are rejected with a ConfigError.
struct RunConfig {
  GridConfig grid;
  DomainShape domain;
  PerforationSpec perforation;
  DensitySpec density;
  KernelConfig kernel;
  GSpec g;
  AveragingSpec averaging;
  ProblemConfig problem;
  std::optional<SweepSettings> sweep;
  OutputConfig output;
  nlohmann::json source; // the parsed document, echoed into reports
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// SHA-256 (hex) of the canonical dump of the document.
std::string config_hash(const nlohmann::json& doc);
std::string sha256_hex(const std::string& bytes);

Grid make_grid(const RunConfig& cfg);
std::shared_ptr<const Convolver> make_kernel(const RunConfig& cfg, const Grid& g);

/// Domain, perforation (with the coverage check for the configured delta) and
/// effective density for `perforation`.
std::shared_ptr<const Geometry> make_geometry(const RunConfig& cfg, const Grid& g, const PerforationSpec& perforation);

ProblemSpec make_problem(const RunConfig& cfg, std::shared_ptr<const Geometry> geometry,
                         std::shared_ptr<const Convolver> kernel);

/// The coverage floor C_0 used for `delta`: the configured absolute floor, or
/// 5% of the discrete ball measure.
double coverage_floor(const RunConfig& cfg, const Grid& g, double delta);

} // namespace nlhom
