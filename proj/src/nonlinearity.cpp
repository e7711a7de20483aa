#include "nlhom/nonlinearity.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlhom/error.hpp"

namespace nlhom {

double GSpec::operator()(double s) const {
  switch (family) {
  case GFamily::linear:
    return a * s + b;
  case GFamily::tanh_scale:
    return std::tanh(a * s);
  case GFamily::clamped_logistic:
    if (s > M) return M * (1.0 - M) + (1.0 - 2.0 * M) * (s - M);
    if (s < -M) return -M * (1.0 + M) + (1.0 + 2.0 * M) * (s + M);
    return s * (1.0 - s);
  }
  return 0.0;
}

double GSpec::lipschitz() const {
  switch (family) {
  case GFamily::linear:
  case GFamily::tanh_scale:
    return std::abs(a);
  case GFamily::clamped_logistic:
    return 1.0 + 2.0 * M;
  }
  return 0.0;
}

void validate(const GSpec& g) {
  if (g.family == GFamily::clamped_logistic && !(g.M > 0.0)) throw ConfigError("g: clamped_logistic needs M > 0");
  if (!std::isfinite(g.a) || !std::isfinite(g.b)) throw ConfigError("g: coefficients must be finite");
}

std::string to_string(GFamily f) {
  switch (f) {
  case GFamily::linear: return "linear";
  case GFamily::tanh_scale: return "tanh_scale";
  case GFamily::clamped_logistic: return "clamped_logistic";
  }
  return "?";
}

std::string to_string(AveragingMode m) {
  switch (m) {
  case AveragingMode::perforated: return "perforated";
  case AveragingMode::density: return "density";
  case AveragingMode::local: return "local";
  }
  return "?";
}

Stencil ball_stencil(const Grid& g, double delta) {
  if (!(delta >= 2.0 * g.min_spacing()))
    throw ConfigError("averaging: delta = " + std::to_string(delta) + " is smaller than two cells (h = " +
                      std::to_string(g.min_spacing()) + ")");
  Stencil s;
  s.grid = g;
  s.support_radius = delta;
  for (int a = 0; a < g.dim; ++a) s.reach[a] = static_cast<int>(std::ceil(delta / g.h[a]));
  s.weights.assign(static_cast<std::size_t>(s.width(0)) * s.width(1), 0.0);
  for (int di = -s.reach[0]; di <= s.reach[0]; ++di)
    for (int dj = -s.reach[1]; dj <= s.reach[1]; ++dj) {
      const double x = di * g.h[0];
      const double y = g.dim == 2 ? dj * g.h[1] : 0.0;
      if (x * x + y * y < delta * delta) s.at(di, dj) = 1.0;
    }
  return s;
}

BallAverage::BallAverage(std::shared_ptr<const Convolver> ball, const MaskedField& weight, const MaskedField& domain,
                         AveragingMode mode, std::optional<double> floor)
    : ball_(std::move(ball)), mode_(mode), domain_(domain.mask), weight_support_(weight.mask) {
  if (mode == AveragingMode::local) throw std::invalid_argument("BallAverage: local mode has no ball average");
  require_same_grid(weight.grid, ball_->grid(), "BallAverage");
  const Grid& g = ball_->grid();
  ball_measure_ = ball_->stencil().mass();
  floor_ = floor.value_or(0.05 * ball_measure_);
  denominator_.assign(g.size(), 0.0);
  ball_->apply(weight.values, denominator_);

  min_denominator_ = 1e300;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (domain_[i] && denominator_[i] < min_denominator_) {
      min_denominator_ = denominator_[i];
      worst = i;
    }
  if (min_denominator_ < floor_) {
    std::ostringstream os;
    const Point p = g.point(worst);
    os << "averaging: ball denominator " << min_denominator_ << " at (" << p[0] << ", " << p[1]
       << ") is below the floor C0 = " << floor_;
    throw ConfigError(os.str());
  }
}

MaskedField BallAverage::operator()(const MaskedField& u) const {
  const Grid& g = ball_->grid();
  require_same_grid(u.grid, g, "average_m");
  std::vector<double> in(u.values);
  if (mode_ == AveragingMode::perforated)
    for (std::size_t i = 0; i < in.size(); ++i)
      if (!weight_support_[i]) in[i] = 0.0;
  MaskedField out(g);
  out.mask = domain_;
  ball_->apply(in, out.values);
  for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = domain_[i] ? out.values[i] / denominator_[i] : 0.0;
  return out;
}

MaskedField average_m(const MaskedField& u, const MaskedField& weight, const MaskedField& domain,
                      const AveragingSpec& spec) {
  auto ball = std::make_shared<const Convolver>(ball_stencil(u.grid, spec.delta));
  return BallAverage(ball, weight, domain, spec.mode, spec.denominator_floor)(u);
}

Reaction::Reaction(GSpec g, std::shared_ptr<const BallAverage> average)
    : g_(g), mode_(AveragingMode::density), average_(std::move(average)) {
  validate(g_);
  if (!average_) throw std::invalid_argument("Reaction: nonlocal mode needs a ball average");
  mode_ = average_->mode();
}

Reaction::Reaction(GSpec g, const MaskedField& density, double density_floor)
    : g_(g), mode_(AveragingMode::local), density_(density) {
  validate(g_);
  min_density_ = 1e300;
  for (std::size_t i = 0; i < density_.size(); ++i)
    if (density_.in(i)) min_density_ = std::min(min_density_, density_.values[i]);
  if (!(min_density_ >= density_floor) || !(min_density_ > 0.0))
    throw ConfigError("reaction: local mode needs X >= c > 0 on Omega; min X = " + std::to_string(min_density_));
}

MaskedField Reaction::operator()(const MaskedField& u) const {
  MaskedField out;
  if (mode_ == AveragingMode::local) {
    require_same_grid(u.grid, density_.grid, "reaction_F");
    out = MaskedField(u.grid);
    out.mask = density_.mask;
    for (std::size_t i = 0; i < out.size(); ++i)
      out.values[i] = density_.in(i) ? g_(u.values[i] / density_.values[i]) : 0.0;
    return out;
  }
  out = (*average_)(u);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.in(i)) out.values[i] = g_(out.values[i]);
  return out;
}

double Reaction::lipschitz() const {
  if (mode_ == AveragingMode::local) return g_.lipschitz() / min_density_;
  return g_.lipschitz() * average_->operator_bound();
}

MaskedField reaction_F(const MaskedField& u, const AveragingSpec& spec, const GSpec& g, const MaskedField& weight,
                       const MaskedField& domain) {
  if (spec.mode == AveragingMode::local) return Reaction(g, weight, 0.0)(u);
  auto ball = std::make_shared<const Convolver>(ball_stencil(u.grid, spec.delta));
  auto avg = std::make_shared<const BallAverage>(ball, weight, domain, spec.mode, spec.denominator_floor);
  return Reaction(g, avg)(u);
}

namespace {

// int_{B_R(x)} u, Gauss-Legendre in the radius and the trapezoid rule in angle.
double ball_integral(const std::function<double(const Point&)>& u, int dim, const Point& x, double R, int angles) {
  using boost::math::quadrature::gauss;
  if (dim == 1) return gauss<double, 40>::integrate([&](double s) { return u({s, 0.0}); }, x[0] - R, x[0] + R);
  const double dtheta = 2.0 * std::numbers::pi / angles;
  return gauss<double, 40>::integrate(
      [&](double r) {
        double ring = 0.0;
        for (int k = 0; k < angles; ++k) {
          const double t = k * dtheta;
          ring += u({x[0] + r * std::cos(t), x[1] + r * std::sin(t)});
        }
        return ring * dtheta * r;
      },
      0.0, R);
}

} // namespace

GradientCheck ball_gradient_check(const std::function<double(const Point&)>& u, int dim, const Point& x,
                                      double radius, const Point& direction, double spacing, int boundary_samples) {
  if (dim != 1 && dim != 2) throw ConfigError("gradient check: dim must be 1 or 2");
  if (!(spacing > 0.0) || !(radius >= 2.0 * spacing))
    throw ConfigError("gradient check: radius " + std::to_string(radius) + " is too small for spacing " +
                      std::to_string(spacing));
  if (boundary_samples < 256) throw ConfigError("gradient check: need at least 256 boundary samples");

  const Point v = dim == 1 ? Point{direction[0], 0.0} : direction;
  const Point xp{x[0] + spacing * v[0], x[1] + spacing * v[1]};
  const Point xm{x[0] - spacing * v[0], x[1] - spacing * v[1]};
  GradientCheck out;
  out.lhs = (ball_integral(u, dim, xp, radius, boundary_samples) - ball_integral(u, dim, xm, radius, boundary_samples)) /
            (2.0 * spacing);

  if (dim == 1) {
    out.rhs = u({x[0] + radius, 0.0}) * v[0] - u({x[0] - radius, 0.0}) * v[0];
  } else {
    const double dtheta = 2.0 * std::numbers::pi / boundary_samples;
    double acc = 0.0;
    for (int k = 0; k < boundary_samples; ++k) {
      const double t = k * dtheta;
      const Point n{std::cos(t), std::sin(t)};
      acc += u({x[0] + radius * n[0], x[1] + radius * n[1]}) * (v[0] * n[0] + v[1] * n[1]);
    }
    out.rhs = acc * radius * dtheta;
  }
  const double scale = std::max(std::abs(out.rhs), std::abs(ball_integral(u, dim, x, radius, boundary_samples)) / radius);
  out.rel_err = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

} // namespace nlhom
