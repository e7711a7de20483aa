#include "nlhom/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nlhom/error.hpp"
#include "nlhom/spectral.hpp"

namespace nlhom {

std::string to_string(EquationKind e) {
  switch (e) {
  case EquationKind::eps_problem: return "eps_problem";
  case EquationKind::limit_dirichlet: return "limit_dirichlet";
  case EquationKind::limit_neumann: return "limit_neumann";
  case EquationKind::limit_delta_zero: return "limit_delta_zero";
  }
  return "?";
}

std::string to_string(Scheme s) {
  switch (s) {
  case Scheme::etd1: return "etd1";
  case Scheme::rk4: return "rk4";
  case Scheme::euler: return "euler";
  }
  return "?";
}

std::string to_string(Preset p) {
  switch (p) {
  case Preset::gaussian_bump: return "gaussian_bump";
  case Preset::constant: return "constant";
  case Preset::sine_product: return "sine_product";
  }
  return "?";
}

std::vector<double> sample_initial(const InitialData& u0, const Grid& g, const Mask& domain) {
  std::array<std::array<double, 2>, 2> bounds{{{1e300, -1e300}, {1e300, -1e300}}};
  for (std::size_t i = 0; i < g.size(); ++i)
    if (domain[i]) {
      const Point p = g.point(i);
      for (int a = 0; a < g.dim; ++a) {
        bounds[a][0] = std::min(bounds[a][0], p[a] - 0.5 * g.h[a]);
        bounds[a][1] = std::max(bounds[a][1], p[a] + 0.5 * g.h[a]);
      }
    }
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    switch (u0.preset) {
    case Preset::gaussian_bump: {
      double r2 = 0.0;
      for (int a = 0; a < g.dim; ++a) r2 += (p[a] - u0.center[a]) * (p[a] - u0.center[a]);
      v[i] = u0.amplitude * std::exp(-0.5 * r2 / (u0.width * u0.width));
      break;
    }
    case Preset::constant:
      v[i] = u0.value;
      break;
    case Preset::sine_product: {
      double s = u0.amplitude;
      for (int a = 0; a < g.dim; ++a) {
        const double t = (p[a] - bounds[a][0]) / (bounds[a][1] - bounds[a][0]);
        s *= (t > 0.0 && t < 1.0) ? std::sin(std::numbers::pi * t) : 0.0;
      }
      v[i] = s;
      break;
    }
    }
  }
  return v;
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec)) {
  if (!spec_.geometry || !spec_.kernel) throw std::invalid_argument("Problem: geometry and kernel are required");
  const Geometry& geo = *spec_.geometry;
  const Grid& g = geo.grid;
  require_same_grid(spec_.kernel->grid(), g, "Problem");
  validate(spec_.g);
  if (!(spec_.dt > 0.0)) throw ConfigError("problem: dt must be positive");
  if (!(spec_.T > 0.0)) throw ConfigError("problem: T must be positive");
  if (spec_.sample_stride < 1) throw ConfigError("problem: sample_stride must be >= 1");

  const bool eps = spec_.equation == EquationKind::eps_problem;
  support_ = eps ? geo.material.mask : geo.domain.mask;
  a_ = eps ? indicator_field(g, support_) : geo.density;

  switch (spec_.equation) {
  case EquationKind::eps_problem:
    h_ = coefficient_h_eps(*spec_.kernel, geo.domain, geo.material, spec_.bc);
    break;
  case EquationKind::limit_dirichlet:
    h_ = constant_field(g, 1.0);
    break;
  case EquationKind::limit_neumann:
    h_ = coefficient_h0(*spec_.kernel, geo.domain, geo.density);
    break;
  case EquationKind::limit_delta_zero:
    h_ = spec_.bc == BoundaryCondition::dirichlet ? constant_field(g, 1.0)
                                                  : coefficient_h0(*spec_.kernel, geo.domain, geo.density);
    break;
  }

  if (spec_.equation == EquationKind::limit_delta_zero) {
    reaction_ = std::make_shared<const Reaction>(spec_.g, geo.density, 0.0);
  } else {
    auto ball = std::make_shared<const Convolver>(ball_stencil(g, spec_.averaging.delta));
    const MaskedField& weight = eps ? geo.material : geo.density;
    const AveragingMode mode = eps ? AveragingMode::perforated : AveragingMode::density;
    auto avg = std::make_shared<const BallAverage>(ball, weight, geo.domain, mode, spec_.averaging.denominator_floor);
    reaction_ = std::make_shared<const Reaction>(spec_.g, avg);
  }

  dt_ = spec_.dt;
  T_ = spec_.T;
  if (spec_.rescaled) {
    if (eps) throw ConfigError("problem: time rescaling applies to limit problems only");
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (geo.domain.in(i)) {
        lo = std::min(lo, geo.density.values[i]);
        hi = std::max(hi, geo.density.values[i]);
      }
    if (hi - lo > 1e-12)
      throw ConfigError("problem: time rescaling needs a constant X on Omega (unsupported for varying X)");
    const double x = hi;
    a_ = indicator_field(g, support_);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (support_[i]) h_.values[i] /= x;
    dt_ = x * spec_.dt;
    T_ = x * spec_.T;
  }

  const double steps = T_ / dt_;
  steps_ = static_cast<int>(std::lround(steps));
  if (steps_ < 1 || std::abs(steps - steps_) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("problem: T must be a whole number of steps dt");

  if (spec_.scheme != Scheme::etd1) {
    double hmax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (support_[i]) hmax = std::max(hmax, h_.values[i]);
    if (hmax > 0.0 && dt_ > 1.0 / (2.0 * hmax)) {
      std::ostringstream os;
      os << "problem: dt = " << dt_ << " exceeds the explicit stability bound 1 / (2 max h) = " << 1.0 / (2.0 * hmax);
      throw ConfigError(os.str());
    }
  }
}

MaskedField Problem::initial_state() const {
  const Geometry& geo = *spec_.geometry;
  MaskedField u(geo.grid);
  u.mask = support_;
  const std::vector<double> u0 = sample_initial(spec_.u0, geo.grid, geo.domain.mask);
  const bool eps = spec_.equation == EquationKind::eps_problem;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (support_[i]) u.values[i] = eps ? u0[i] : geo.density.values[i] * u0[i];
  return u;
}

void Problem::check_support(const MaskedField& u) const {
  require_same_grid(u.grid, grid(), "rhs");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!support_[i] && u.values[i] != 0.0) {
      const Point p = grid().point(i);
      std::ostringstream os;
      os << "state is nonzero off its support at (" << p[0] << ", " << p[1] << ")";
      throw std::invalid_argument(os.str());
    }
}

MaskedField Problem::nonlinear_part(const MaskedField& u) const {
  check_support(u);
  MaskedField out(grid());
  out.mask = support_;
  kernel().apply(u.values, out.values);
  const MaskedField f = (*reaction_)(u);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = support_[i] ? a_.values[i] * (out.values[i] + f.values[i]) : 0.0;
  return out;
}

double Problem::reaction_lipschitz() const {
  double amax = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i)
    if (support_[i]) amax = std::max(amax, std::abs(a_.values[i]));
  return amax * reaction_->lipschitz();
}

double phi1(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - z / 2.0 + z * z / 6.0;
  return -std::expm1(-z) / z;
}

MaskedField rhs(const Problem& p, const MaskedField& u) {
  MaskedField out = p.nonlinear_part(u);
  const auto& h = p.coefficient_h().values;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.in(i)) out.values[i] -= h[i] * u.values[i];
  return out;
}

MaskedField step_etd1(const Problem& p, const MaskedField& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_etd1: dt must be positive");
  MaskedField out = p.nonlinear_part(u);
  const auto& h = p.coefficient_h().values;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.in(i)) {
      const double z = h[i] * dt;
      out.values[i] = std::exp(-z) * u.values[i] + phi1(z) * dt * out.values[i];
    }
  return out;
}

namespace {

MaskedField axpy(const MaskedField& u, double s, const MaskedField& k) {
  MaskedField out = u;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.in(i)) out.values[i] += s * k.values[i];
  return out;
}

} // namespace

MaskedField step_euler(const Problem& p, const MaskedField& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_euler: dt must be positive");
  return axpy(u, dt, rhs(p, u));
}

MaskedField step_rk4(const Problem& p, const MaskedField& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
  const MaskedField k1 = rhs(p, u);
  const MaskedField k2 = rhs(p, axpy(u, 0.5 * dt, k1));
  const MaskedField k3 = rhs(p, axpy(u, 0.5 * dt, k2));
  const MaskedField k4 = rhs(p, axpy(u, dt, k3));
  MaskedField out = u;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.in(i))
      out.values[i] += dt / 6.0 * (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] + k4.values[i]);
  return out;
}

MaskedField step(const Problem& p, const MaskedField& u, double dt) {
  switch (p.spec().scheme) {
  case Scheme::etd1: return step_etd1(p, u, dt);
  case Scheme::rk4: return step_rk4(p, u, dt);
  case Scheme::euler: return step_euler(p, u, dt);
  }
  throw std::logic_error("unknown scheme");
}

const MaskedField& Trajectory::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 0.5 * dt + 1e-12) return states[i];
  throw std::out_of_range("trajectory has no sample at t = " + std::to_string(t));
}

Trajectory integrate(const Problem& p, std::span<const double> extra_times) {
  return integrate(p, p.initial_state(), extra_times);
}

Trajectory integrate(const Problem& p, const MaskedField& u0, std::span<const double> extra_times) {
  const double dt = p.step_size();
  const int steps = p.step_count();
  std::set<int> extra;
  for (double t : extra_times) {
    const long k = std::lround(t / dt);
    if (k < 0 || k > steps) throw ConfigError("integrate: sample time " + std::to_string(t) + " is outside [0, T]");
    extra.insert(static_cast<int>(k));
  }

  Trajectory traj;
  traj.dt = dt;
  MaskedField u = u0;
  u.mask = p.support();
  p.check_support(u);
  traj.times.push_back(0.0);
  traj.states.push_back(u);
  traj.norm_log.push_back(l2_norm(u));

  for (int k = 1; k <= steps; ++k) {
    u = step(p, u, dt);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!std::isfinite(u.values[i])) throw NumericalError("integrate: non-finite state at step " + std::to_string(k));
      if (!u.in(i)) u.values[i] = 0.0;
    }
    traj.norm_log.push_back(l2_norm(u));
    if (k % p.spec().sample_stride == 0 || k == steps || extra.count(k)) {
      traj.times.push_back(k * dt);
      traj.states.push_back(u);
    }
  }
  return traj;
}

BoundReport bound_monitor(const Trajectory& traj, const Problem& p, double eta, std::optional<double> lambda1_value,
                          int eigen_budget) {
  if (!(eta > 0.0)) throw std::invalid_argument("bound_monitor: eta must be positive");
  BoundReport rep;
  rep.eta = eta;
  rep.lipschitz = p.reaction_lipschitz();
  if (lambda1_value) {
    rep.lambda1 = *lambda1_value;
  } else {
    const bool unit_weight = p.spec().equation == EquationKind::eps_problem || p.spec().rescaled;
    try {
      const EigenResult er = lambda1(p.kernel(), p.coefficient_h(), p.support(), {1e-7, eigen_budget},
                                     unit_weight ? nullptr : &p.coefficient_a());
      // Rayleigh-quotient estimates approach from above; the residual bounds the gap.
      rep.lambda1 = er.lambda1 - er.residual;
    } catch (const NumericalError&) {
      rep.lambda1 = 0.0;
      rep.lambda1_fallback = true;
    }
  }
  const double rate = 2.0 * (eta * eta - rep.lambda1 + rep.lipschitz / (eta * eta));
  const double source = p.domain_measure() * std::abs(p.spec().g.g0());
  const double n0 = l2_norm(traj.states.front());
  rep.worst_margin = 1e300;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    BoundSample s;
    s.t = traj.times[i];
    s.norm = l2_norm(traj.states[i]);
    s.bound = std::exp(rate * s.t) * (n0 + source * s.t);
    s.margin = s.bound - s.norm;
    if (s.margin < 0.0) ++rep.violations;
    rep.worst_margin = std::min(rep.worst_margin, s.margin);
    rep.samples.push_back(s);
  }
  return rep;
}

double rescaled_equivalence_check(const ProblemSpec& limit_spec) {
  if (limit_spec.equation == EquationKind::eps_problem)
    throw ConfigError("rescaled_equivalence_check: needs a limit problem");
  ProblemSpec w_spec = limit_spec;
  w_spec.rescaled = true;
  const Problem w_problem(w_spec);
  ProblemSpec u_spec = limit_spec;
  u_spec.rescaled = false;
  const Problem u_problem(u_spec);
  const Trajectory u = integrate(u_problem);
  const Trajectory w = integrate(w_problem);
  if (u.states.size() != w.states.size()) throw std::logic_error("rescaled_equivalence_check: sample mismatch");
  double worst = 0.0;
  for (std::size_t s = 0; s < u.states.size(); ++s)
    for (std::size_t i = 0; i < u.states[s].size(); ++i)
      worst = std::max(worst, std::abs(u.states[s].values[i] - w.states[s].values[i]));
  return worst;
}

} // namespace nlhom
