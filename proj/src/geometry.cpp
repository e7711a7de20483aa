#include "nlhom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nlhom/convolution.hpp"
#include "nlhom/error.hpp"
#include "nlhom/nonlinearity.hpp"

namespace nlhom {

namespace {

double shape_extent(const DomainShape& s) { return s.kind == ShapeKind::square ? s.half_width : s.radius; }

bool in_shape(const Grid& g, const DomainShape& s, const Point& x) {
  if (s.kind == ShapeKind::square) {
    for (int a = 0; a < g.dim; ++a)
      if (std::abs(x[a] - s.center[a]) > s.half_width) return false;
    return true;
  }
  double r2 = 0.0;
  for (int a = 0; a < g.dim; ++a) r2 += (x[a] - s.center[a]) * (x[a] - s.center[a]);
  return r2 < s.radius * s.radius;
}

// Bounding box of the mask's cells, inclusive of their half-cells.
std::array<std::array<double, 2>, 2> mask_bounds(const Grid& g, const Mask& m) {
  std::array<std::array<double, 2>, 2> b{{{1e300, -1e300}, {1e300, -1e300}}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i]) continue;
    const Point p = g.point(i);
    for (int a = 0; a < g.dim; ++a) {
      b[a][0] = std::min(b[a][0], p[a] - 0.5 * g.h[a]);
      b[a][1] = std::max(b[a][1], p[a] + 0.5 * g.h[a]);
    }
  }
  return b;
}

// Inclusive 2D prefix sums with a zero border: S[(i+1)*(n1+1) + (j+1)].
std::vector<double> prefix_sums(const Grid& g, const std::vector<double>& v) {
  const int n0 = g.n[0], n1 = g.n[1];
  std::vector<double> s(static_cast<std::size_t>(n0 + 1) * (n1 + 1), 0.0);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      s[(i + 1) * (n1 + 1) + (j + 1)] =
          v[g.index(i, j)] + s[i * (n1 + 1) + (j + 1)] + s[(i + 1) * (n1 + 1) + j] - s[i * (n1 + 1) + j];
  return s;
}

double box_sum(const std::vector<double>& s, int n1, int i0, int i1, int j0, int j1) {
  // half-open [i0, i1) x [j0, j1)
  return s[i1 * (n1 + 1) + j1] - s[i0 * (n1 + 1) + j1] - s[i1 * (n1 + 1) + j0] + s[i0 * (n1 + 1) + j0];
}

} // namespace

MaskedField domain_mask(const Grid& g, const DomainShape& shape, double required_margin) {
  const double ext = shape_extent(shape);
  if (!(ext > 0.0)) throw ConfigError("domain: shape size must be positive");
  double margin = 1e300;
  for (int a = 0; a < g.dim; ++a)
    margin = std::min({margin, shape.center[a] - ext - g.low[a], g.high[a] - shape.center[a] - ext});
  if (margin <= 0.0 || margin < required_margin * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "domain: shape leaves a margin of " << margin << " to the box boundary; the kernel support requires at least "
       << required_margin << " (and strictly positive)";
    throw ConfigError(os.str());
  }
  Mask m(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = in_shape(g, shape, g.point(i)) ? 1 : 0;
  if (count(m) == 0) throw ConfigError("domain: shape contains no grid point");
  return indicator_field(g, std::move(m));
}

void validate(const PerforationSpec& spec) {
  switch (spec.kind) {
  case PerforationKind::none:
    return;
  case PerforationKind::periodic_balls:
    if (!(spec.eps > 0.0)) throw ConfigError("perforation: eps must be positive");
    if (!(spec.radius_ratio > 0.0 && spec.radius_ratio < 1.0))
      throw ConfigError("perforation: radius_ratio must lie in (0, 1)");
    return;
  case PerforationKind::random_balls:
    if (spec.count < 0) throw ConfigError("perforation: count must be non-negative");
    if (!(spec.radius > 0.0)) throw ConfigError("perforation: radius must be positive");
    return;
  }
}

double worst_ball_coverage(const Grid& g, const MaskedField& domain, const MaskedField& material, double delta) {
  const Convolver ball(ball_stencil(g, delta));
  const MaskedField covered = ball.apply(material);
  double worst = 1e300;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (domain.in(i)) worst = std::min(worst, covered.values[i]);
  return worst;
}

Perforation perforate(const Grid& g, const MaskedField& domain, const PerforationSpec& spec,
                      const std::optional<CoverageSpec>& coverage) {
  validate(spec);
  require_same_grid(g, domain.grid, "perforate");
  Mask material = domain.mask;

  if (spec.kind == PerforationKind::periodic_balls) {
    const double pitch = 2.0 * spec.eps;
    const double r2 = std::pow(spec.radius_ratio * spec.eps, 2);
    // r < eps, so only the nearest lattice centre can contain a point.
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!material[i]) continue;
      const Point x = g.point(i);
      double d2 = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        const double c = pitch * std::round(x[a] / pitch);
        d2 += (x[a] - c) * (x[a] - c);
      }
      if (d2 < r2) material[i] = 0;
    }
  } else if (spec.kind == PerforationKind::random_balls) {
    const auto bounds = mask_bounds(g, domain.mask);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r2 = spec.radius * spec.radius;
    for (int b = 0; b < spec.count; ++b) {
      Point c{0.0, 0.0};
      for (int a = 0; a < g.dim; ++a) c[a] = bounds[a][0] + unit(rng) * (bounds[a][1] - bounds[a][0]);
      const int i0 = std::max(0, static_cast<int>(std::floor((c[0] - spec.radius - g.low[0]) / g.h[0])));
      const int i1 = std::min(g.n[0] - 1, static_cast<int>(std::ceil((c[0] + spec.radius - g.low[0]) / g.h[0])));
      int j0 = 0, j1 = 0;
      if (g.dim == 2) {
        j0 = std::max(0, static_cast<int>(std::floor((c[1] - spec.radius - g.low[1]) / g.h[1])));
        j1 = std::min(g.n[1] - 1, static_cast<int>(std::ceil((c[1] + spec.radius - g.low[1]) / g.h[1])));
      }
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) {
          const std::size_t idx = g.index(i, j);
          const Point x = g.point(idx);
          double d2 = 0.0;
          for (int a = 0; a < g.dim; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
          if (d2 < r2) material[idx] = 0;
        }
    }
  }

  Perforation out;
  Mask holes(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) holes[i] = (domain.mask[i] && !material[i]) ? 1 : 0;
  out.material = indicator_field(g, std::move(material));
  out.holes = indicator_field(g, std::move(holes));

  if (coverage) {
    out.worst_coverage = worst_ball_coverage(g, domain, out.material, coverage->delta);
    if (out.worst_coverage < coverage->floor) {
      std::ostringstream os;
      os << "perforation: worst ball coverage |B_delta(x) cap Omega^eps| = " << out.worst_coverage
         << " is below the floor " << coverage->floor << " (delta = " << coverage->delta << ")";
      throw ConfigError(os.str());
    }
  }
  return out;
}

double periodic_density(int dim, double radius_ratio) {
  // Unit cell of side 2 eps holding one ball of radius radius_ratio * eps.
  if (dim == 1) return 1.0 - radius_ratio;
  return 1.0 - std::numbers::pi * radius_ratio * radius_ratio / 4.0;
}

MaskedField effective_density(const Grid& g, const MaskedField& domain, const MaskedField& material,
                              const PerforationSpec& spec, const DensitySpec& density) {
  validate(spec);
  MaskedField x(g);
  x.mask = domain.mask;

  if (density.mode == DensityMode::analytic) {
    if (spec.kind == PerforationKind::random_balls)
      throw ConfigError("effective_density: analytic mode is only defined for none and periodic_balls");
    const double value = spec.kind == PerforationKind::none ? 1.0 : periodic_density(g.dim, spec.radius_ratio);
    for (std::size_t i = 0; i < g.size(); ++i) x.values[i] = domain.in(i) ? value : 0.0;
  } else {
    double side = density.window;
    if (side <= 0.0) {
      if (spec.kind != PerforationKind::periodic_balls)
        throw ConfigError("effective_density: cell_average needs an explicit window for non-periodic perforations");
      side = 2.0 * spec.eps;
    }
    std::array<int, 2> lo{0, 0}, hi{1, 1};
    for (int a = 0; a < g.dim; ++a) {
      const int m = std::max(1, static_cast<int>(std::lround(side / g.h[a])));
      lo[a] = m / 2;
      hi[a] = m - m / 2; // window is [k - lo, k + hi)
    }
    std::vector<double> mat(g.size()), dom(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      dom[i] = domain.in(i) ? 1.0 : 0.0;
      mat[i] = (domain.in(i) && material.in(i)) ? 1.0 : 0.0;
    }
    const auto smat = prefix_sums(g, mat);
    const auto sdom = prefix_sums(g, dom);
    for (int i = 0; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j) {
        const std::size_t idx = g.index(i, j);
        if (!domain.in(idx)) continue;
        const int i0 = std::max(0, i - lo[0]), i1 = std::min(g.n[0], i + hi[0]);
        const int j0 = g.dim == 2 ? std::max(0, j - lo[1]) : 0;
        const int j1 = g.dim == 2 ? std::min(g.n[1], j + hi[1]) : 1;
        x.values[idx] = box_sum(smat, g.n[1], i0, i1, j0, j1) / box_sum(sdom, g.n[1], i0, i1, j0, j1);
      }
  }

  for (std::size_t i = 0; i < g.size(); ++i)
    if (domain.in(i) && x.values[i] < density.floor) {
      std::ostringstream os;
      os << "effective_density: X = " << x.values[i] << " at (" << g.point(i)[0] << ", " << g.point(i)[1]
         << ") is below the floor " << density.floor;
      throw ConfigError(os.str());
    }
  return x;
}

std::string to_string(PerforationKind k) {
  switch (k) {
  case PerforationKind::none: return "none";
  case PerforationKind::periodic_balls: return "periodic_balls";
  case PerforationKind::random_balls: return "random_balls";
  }
  return "?";
}

std::string to_string(DensityMode m) { return m == DensityMode::analytic ? "analytic" : "cell_average"; }

} // namespace nlhom
