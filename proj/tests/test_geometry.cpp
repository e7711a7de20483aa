#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "nlhom/error.hpp"
#include "nlhom/geometry.hpp"

using namespace nlhom;

namespace {

Grid unit_grid(int dim, int n) {
  std::vector<int> ns(dim, n);
  std::vector<std::array<double, 2>> box(dim, {0.0, 1.0});
  return build_grid(dim, ns, box);
}

DomainShape centred_square(double hw) { return {ShapeKind::square, {0.5, 0.5}, hw, 0.0}; }

} // namespace

TEST_CASE("build_grid: cell-centred points and exact spacing") {
  const Grid g = unit_grid(1, 8);
  CHECK(g.h[0] == 0.125);
  CHECK(g.size() == 8);
  for (int k = 0; k < 8; ++k) CHECK(g.coord(0, k) == doctest::Approx(0.0625 + k * 0.125).epsilon(1e-15));
  CHECK(g.cell_volume == 0.125);

  const Grid g2 = unit_grid(2, 32);
  CHECK(g2.cell_volume == (1.0 / 32) * (1.0 / 32));
  CHECK(g2.cell_volume == g2.h[0] * g2.h[1]);

  const Grid g3 = unit_grid(2, 256);
  CHECK(g3.size() == 65536);
  CHECK(g3.bytes_per_field() == 65536 * sizeof(double));

  const std::vector<int> n{10, 20};
  const std::vector<std::array<double, 2>> box{{-1.0, 1.0}, {0.0, 4.0}};
  const Grid g4 = build_grid(2, n, box);
  CHECK(g4.h[0] == 0.2);
  CHECK(g4.h[1] == 0.2);
  const Point p = g4.point(g4.index(3, 7));
  CHECK(p[0] == doctest::Approx(-1.0 + 3.5 * 0.2));
  CHECK(p[1] == doctest::Approx(7.5 * 0.2));
}

TEST_CASE("build_grid: rejects bad dimensions, sizes and boxes") {
  const std::vector<int> n3{8, 8, 8};
  const std::vector<std::array<double, 2>> box3(3, {0.0, 1.0});
  CHECK_THROWS_AS(build_grid(3, n3, box3), ConfigError);
  const std::vector<int> small{3};
  const std::vector<std::array<double, 2>> box1{{0.0, 1.0}};
  CHECK_THROWS_AS(build_grid(1, small, box1), ConfigError);
  const std::vector<int> ok{8};
  const std::vector<std::array<double, 2>> flat{{1.0, 1.0}};
  CHECK_THROWS_AS(build_grid(1, ok, flat), ConfigError);
}

TEST_CASE("domain_mask: square area fraction") {
  const Grid g = unit_grid(2, 64);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  // centres (k + 1/2)/64 with |x - 1/2| <= 1/4 gives k = 16..47 on each axis
  CHECK(count(d.mask) == 32 * 32);
  CHECK(measure(g, d.mask) / 1.0 == doctest::Approx(0.25).epsilon(1e-14));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(d.values[i] == (d.in(i) ? 1.0 : 0.0));
}

TEST_CASE("domain_mask: disk area converges at O(h)") {
  for (int n : {64, 128, 256}) {
    const Grid g = unit_grid(2, n);
    const DomainShape disk{ShapeKind::disk, {0.5, 0.5}, 0.0, 0.25};
    const MaskedField d = domain_mask(g, disk, 0.1);
    const double exact = std::numbers::pi * 0.25 * 0.25;
    CHECK(std::abs(measure(g, d.mask) - exact) <= 2.0 * std::numbers::pi * 0.25 * g.h[0]);
  }
}

TEST_CASE("domain_mask: padding violations name the margin") {
  const Grid g = unit_grid(2, 32);
  CHECK_THROWS_AS(domain_mask(g, centred_square(0.5), 0.0), ConfigError);
  try {
    domain_mask(g, centred_square(0.45), 0.1);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("0.1") != std::string::npos);
    CHECK(std::string(e.what()).find("margin") != std::string::npos);
  }
  CHECK_NOTHROW(domain_mask(g, centred_square(0.4), 0.1));
}

TEST_CASE("perforate: no holes") {
  const Grid g = unit_grid(2, 32);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  const Perforation p = perforate(g, d, PerforationSpec{});
  CHECK(p.material.mask == d.mask);
  CHECK(count(p.holes.mask) == 0);
  for (double v : p.holes.values) CHECK(v == 0.0);
}

TEST_CASE("perforate: periodic balls match a brute-force lattice oracle") {
  const Grid g = unit_grid(2, 256);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  PerforationSpec spec;
  spec.kind = PerforationKind::periodic_balls;
  spec.eps = 0.125;
  spec.radius_ratio = 0.5;
  const Perforation p = perforate(g, d, spec);

  // oracle: every lattice centre on 2 eps Z^2 within reach of the box
  const double r = 0.0625;
  std::size_t holes = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool hole = false;
    const Point x = g.point(i);
    for (int a = -2; a <= 10 && !hole; ++a)
      for (int b = -2; b <= 10 && !hole; ++b) {
        const double cx = 0.25 * a, cy = 0.25 * b;
        hole = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy) < r * r;
      }
    const bool expect_material = d.in(i) && !hole;
    CHECK(static_cast<bool>(p.material.in(i)) == expect_material);
    if (d.in(i) && hole) ++holes;
    // A + chi_eps = chi_Omega exactly
    CHECK(p.holes.values[i] + p.material.values[i] == d.values[i]);
    CHECK(p.material.values[i] <= d.values[i]);
  }
  CHECK(count(p.holes.mask) == holes);

  // Omega spans two periods: one full, four half and four quarter balls -> fraction pi/16
  const double fraction = measure(g, p.holes.mask) / measure(g, d.mask);
  const double perimeter = 4.0 * 2.0 * std::numbers::pi * r;
  CHECK(std::abs(fraction - std::numbers::pi / 16.0) <= perimeter * g.h[0] / measure(g, d.mask));
}

TEST_CASE("perforate: random balls are reproducible per seed") {
  const Grid g = unit_grid(2, 64);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  PerforationSpec spec;
  spec.kind = PerforationKind::random_balls;
  spec.count = 12;
  spec.radius = 0.03;
  spec.seed = 7;
  const Perforation a = perforate(g, d, spec);
  const Perforation b = perforate(g, d, spec);
  CHECK(a.material.mask == b.material.mask);
  CHECK(count(a.holes.mask) > 0);
  spec.seed = 8;
  const Perforation c = perforate(g, d, spec);
  CHECK(c.material.mask != a.material.mask);
}

TEST_CASE("perforate: coverage bound is enforced") {
  const Grid g = unit_grid(2, 64);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  PerforationSpec spec;
  spec.kind = PerforationKind::periodic_balls;
  spec.eps = 0.125;
  spec.radius_ratio = 0.9;
  const double worst = worst_ball_coverage(g, d, perforate(g, d, spec).material, 0.15);
  CHECK(worst > 0.0);
  CHECK_NOTHROW(perforate(g, d, spec, CoverageSpec{0.15, 0.5 * worst}));
  try {
    perforate(g, d, spec, CoverageSpec{0.15, 2.0 * worst});
    FAIL("expected a coverage failure");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("worst") != std::string::npos);
  }
}

TEST_CASE("perforate: invalid specs") {
  PerforationSpec s;
  s.kind = PerforationKind::periodic_balls;
  s.radius_ratio = 1.0;
  CHECK_THROWS_AS(validate(s), ConfigError);
  s.radius_ratio = 0.5;
  s.eps = 0.0;
  CHECK_THROWS_AS(validate(s), ConfigError);
  PerforationSpec r;
  r.kind = PerforationKind::random_balls;
  r.count = 3;
  r.radius = 0.0;
  CHECK_THROWS_AS(validate(r), ConfigError);
}

TEST_CASE("effective_density: analytic values") {
  CHECK(periodic_density(2, 0.5) == doctest::Approx(1.0 - std::numbers::pi / 16.0).epsilon(1e-15));
  CHECK(periodic_density(2, 0.5) == doctest::Approx(0.80365).epsilon(1e-5));
  CHECK(periodic_density(1, 0.3) == doctest::Approx(0.7));

  const Grid g = unit_grid(2, 32);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  const MaskedField x1 = effective_density(g, d, d, PerforationSpec{}, DensitySpec{});
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(x1.values[i] == (d.in(i) ? 1.0 : 0.0));

  PerforationSpec spec;
  spec.kind = PerforationKind::periodic_balls;
  spec.eps = 0.125;
  spec.radius_ratio = 0.5;
  const Perforation p = perforate(g, d, spec);
  const MaskedField x = effective_density(g, d, p.material, spec, DensitySpec{});
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(x.values[i] == (d.in(i) ? 1.0 - std::numbers::pi / 16.0 : 0.0));

  DensitySpec strict;
  strict.floor = 0.9;
  CHECK_THROWS_AS(effective_density(g, d, p.material, spec, strict), ConfigError);

  PerforationSpec rnd;
  rnd.kind = PerforationKind::random_balls;
  rnd.count = 1;
  rnd.radius = 0.01;
  CHECK_THROWS_AS(effective_density(g, d, d, rnd, DensitySpec{}), ConfigError);
}

TEST_CASE("effective_density: cell average of a periodic family") {
  const Grid g = unit_grid(2, 512);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  PerforationSpec spec;
  spec.kind = PerforationKind::periodic_balls;
  spec.eps = 0.0625;
  spec.radius_ratio = 0.5;
  const Perforation p = perforate(g, d, spec);
  DensitySpec ds;
  ds.mode = DensityMode::cell_average;
  const MaskedField x = effective_density(g, d, p.material, spec, ds);
  const double analytic = 1.0 - std::numbers::pi / 16.0;
  double worst = 0.0, lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!d.in(i)) {
      CHECK(x.values[i] == 0.0);
      continue;
    }
    lo = std::min(lo, x.values[i]);
    hi = std::max(hi, x.values[i]);
    const Point q = g.point(i);
    // full window of side 2 eps inside Omega
    if (std::abs(q[0] - 0.5) < 0.25 - 0.0625 && std::abs(q[1] - 0.5) < 0.25 - 0.0625)
      worst = std::max(worst, std::abs(x.values[i] - analytic) / analytic);
  }
  CHECK(worst <= 0.01);
  CHECK(lo > 0.0);
  CHECK(hi <= 1.0);
}

TEST_CASE("discrete weak convergence of the periodic indicators") {
  // The weak limit of the sampled pattern is its own cell fraction, which sits
  // O(h) away from the analytic value; compare against that fraction so the
  // sampling bias does not mask the oscillation decay.
  const Grid g = unit_grid(2, 512);
  const MaskedField d = domain_mask(g, centred_square(0.25), 0.1);
  const std::vector<std::function<double(const Point&)>> phis{
      [](const Point& q) { return q[0] * q[0]; },
      [](const Point& q) { return std::exp(-((q[0] - 0.5) * (q[0] - 0.5) + (q[1] - 0.5) * (q[1] - 0.5)) / 0.02); },
      [](const Point& q) { return std::exp(-((q[0] - 0.45) * (q[0] - 0.45) + (q[1] - 0.55) * (q[1] - 0.55)) / 0.08); }};
  std::vector<double> previous(phis.size(), 1e300);
  for (double eps : {0.125, 0.0625, 0.03125}) {
    PerforationSpec spec;
    spec.kind = PerforationKind::periodic_balls;
    spec.eps = eps;
    spec.radius_ratio = 0.5;
    const Perforation p = perforate(g, d, spec);

    const int period = static_cast<int>(std::lround(2.0 * eps / g.h[0]));
    const double r = 0.5 * eps / g.h[0];
    int removed = 0;
    for (int i = -period; i < period; ++i)
      for (int j = -period; j < period; ++j)
        if ((i + 0.5) * (i + 0.5) + (j + 0.5) * (j + 0.5) < r * r) ++removed;
    const double x = 1.0 - static_cast<double>(removed) / (period * period);
    CHECK(std::abs(x - periodic_density(2, 0.5)) < 0.01);
    // Omega is tiled by whole periods, so the pattern's mean is exactly x
    CHECK(measure(g, p.material.mask) / measure(g, d.mask) == doctest::Approx(x).epsilon(1e-14));

    for (std::size_t k = 0; k < phis.size(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (d.in(i)) s += phis[k](g.point(i)) * (p.material.values[i] - x);
      const double err = std::abs(s * g.cell_volume);
      CHECK(err < previous[k]);
      previous[k] = err;
    }
  }
}
