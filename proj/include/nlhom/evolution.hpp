#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlhom/convolution.hpp"
#include "nlhom/geometry.hpp"
#include "nlhom/grid.hpp"
#include "nlhom/kernel.hpp"
#include "nlhom/nonlinearity.hpp"

namespace nlhom {

enum class EquationKind { eps_problem, limit_dirichlet, limit_neumann, limit_delta_zero };
enum class Scheme { etd1, rk4, euler };
enum class Preset { gaussian_bump, constant, sine_product };

std::string to_string(EquationKind e);
std::string to_string(Scheme s);
std::string to_string(Preset p);

struct InitialData {
  Preset preset = Preset::gaussian_bump;
  double amplitude = 1.0;
  Point center{0.5, 0.5};
  double width = 0.1; // gaussian standard deviation
  double value = 1.0; // constant preset
};

/// Evaluates u0 on the whole grid. sine_product vanishes on the boundary of
/// Omega's bounding box.
std::vector<double> sample_initial(const InitialData& u0, const Grid& g, const Mask& domain);

/// Immutable geometric products shared by every problem of a run.
struct Geometry {
  Grid grid;
  MaskedField domain;   // chi_Omega
  MaskedField material; // chi_eps
  MaskedField density;  // X
  PerforationSpec perforation;
};

struct ProblemSpec {
  std::shared_ptr<const Geometry> geometry;
  std::shared_ptr<const Convolver> kernel;
  EquationKind equation = EquationKind::eps_problem;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  GSpec g;
  AveragingSpec averaging;
  InitialData u0;
  double T = 1.0;
  double dt = 0.01;
  Scheme scheme = Scheme::etd1;
  int sample_stride = 10;
  /// Limit problems with constant X only: integrate w(x, tau) = u(x, tau / X),
  /// i.e. w_tau = J * w - (h / X) w + F(w), over [0, X T] with step X dt.
  bool rescaled = false;
};

/// A ProblemSpec with its coefficient fields resolved. Every equation is cast
/// in the form
///   u_t = a (J * u) - h u + a F(u)   on the support, u = 0 off it,
/// with (a, h, F) chosen per equation:
///   eps_problem       a = 1,  h = h_eps,          F = g(m_{Omega^eps}), support Omega^eps
///   limit_dirichlet   a = X,  h = 1,              F = g(m_X),           support Omega
///   limit_neumann     a = X,  h = h_0,            F = g(m_X)
///   limit_delta_zero  a = X,  h = 1 or h_0 by bc, F = g(u / X)
class Problem {
public:
  explicit Problem(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  const Grid& grid() const { return spec_.geometry->grid; }
  const Mask& support() const { return support_; }
  const MaskedField& coefficient_a() const { return a_; }
  const MaskedField& coefficient_h() const { return h_; }
  const Reaction& reaction() const { return *reaction_; }
  const Convolver& kernel() const { return *spec_.kernel; }

  /// Time step and horizon actually integrated (rescaled by X when requested).
  double step_size() const { return dt_; }
  double horizon() const { return T_; }
  int step_count() const { return steps_; }

  MaskedField initial_state() const;
  /// a (J * u) + a F(u) on the support.
  MaskedField nonlinear_part(const MaskedField& u) const;
  /// Global L2 Lipschitz constant of u -> a F(u).
  double reaction_lipschitz() const;
  /// |Omega|.
  double domain_measure() const { return measure(grid(), spec_.geometry->domain.mask); }
  /// Throws std::invalid_argument if u is nonzero off the support.
  void check_support(const MaskedField& u) const;

private:
  ProblemSpec spec_;
  Mask support_;
  MaskedField a_;
  MaskedField h_;
  std::shared_ptr<const Reaction> reaction_;
  double dt_ = 0.0;
  double T_ = 0.0;
  int steps_ = 0;
};

/// phi_1(z) = (1 - e^{-z}) / z with phi_1(0) = 1.
double phi1(double z);

MaskedField rhs(const Problem& p, const MaskedField& u);
MaskedField step_etd1(const Problem& p, const MaskedField& u, double dt);
MaskedField step_rk4(const Problem& p, const MaskedField& u, double dt);
MaskedField step_euler(const Problem& p, const MaskedField& u, double dt);
MaskedField step(const Problem& p, const MaskedField& u, double dt);

struct Trajectory {
  std::vector<double> times;
  std::vector<MaskedField> states;
  std::vector<double> norm_log; // L2 norm after every step, entry 0 at t = 0
  double dt = 0.0;

  /// Sample at time t (to within dt / 2); throws std::out_of_range otherwise.
  const MaskedField& at(double t) const;
};

/// Integrates over [0, horizon]. Samples t = 0, every sample_stride steps, the
/// final step, and the steps nearest to `extra_times` (given in the problem's
/// own time variable). Throws NumericalError on a non-finite state.
Trajectory integrate(const Problem& p, std::span<const double> extra_times = {});
Trajectory integrate(const Problem& p, const MaskedField& u0, std::span<const double> extra_times = {});

struct BoundSample {
  double t = 0.0;
  double norm = 0.0;
  double bound = 0.0;
  double margin = 0.0; // bound - norm
};

struct BoundReport {
  std::vector<BoundSample> samples;
  double eta = 1.0;
  double lambda1 = 0.0;
  bool lambda1_fallback = false; // eigen-iteration failed, 0 used instead
  double lipschitz = 0.0;
  double worst_margin = 0.0;
  int violations = 0;
};

/// Checks ||u(t)|| <= exp(2 (eta^2 - lambda1 + C / eta^2) t) (||u(0)|| + |Omega| |g(0)| t)
/// at every sample. lambda1 is computed for the problem's linear operator
/// unless given.
BoundReport bound_monitor(const Trajectory& traj, const Problem& p, double eta,
                          std::optional<double> lambda1 = std::nullopt, int eigen_budget = 20000);

/// For limit problems with constant X: integrates the time-rescaled equation
/// with matched effective steps and returns max over samples of
/// ||w(., X t) - u(., t)||_inf.
double rescaled_equivalence_check(const ProblemSpec& limit_spec);

} // namespace nlhom
