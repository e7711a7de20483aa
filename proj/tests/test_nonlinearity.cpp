#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "nlhom/error.hpp"
#include "nlhom/geometry.hpp"
#include "nlhom/nonlinearity.hpp"

using namespace nlhom;

namespace {

Grid unit_grid(int dim, int n) {
  std::vector<int> ns(dim, n);
  std::vector<std::array<double, 2>> box(dim, {0.0, 1.0});
  return build_grid(dim, ns, box);
}

MaskedField random_on(const MaskedField& support, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  MaskedField f(support.grid);
  f.mask = support.mask;
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = f.in(i) ? u(rng) : 0.0;
  return f;
}

// Oracle: m(x) = sum_{|x-y| < delta} u(y) / sum_{|x-y| < delta} w(y), plain double loop over the grid.
std::vector<double> ball_ratio_oracle(const Grid& g, const std::vector<double>& num, const std::vector<double>& den,
                                      double delta) {
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const Point px = g.point(x);
    double a = 0.0, b = 0.0;
    for (std::size_t y = 0; y < g.size(); ++y) {
      const Point py = g.point(y);
      const double d2 = (px[0] - py[0]) * (px[0] - py[0]) + (px[1] - py[1]) * (px[1] - py[1]);
      // same membership rule as the stencil: integer offsets times h
      const int di = static_cast<int>(std::lround((px[0] - py[0]) / g.h[0]));
      const int dj = g.dim == 2 ? static_cast<int>(std::lround((px[1] - py[1]) / g.h[1])) : 0;
      const double o2 = di * g.h[0] * di * g.h[0] + (g.dim == 2 ? dj * g.h[1] * dj * g.h[1] : 0.0);
      (void)d2;
      if (o2 < delta * delta) {
        a += num[y];
        b += den[y];
      }
    }
    out[x] = a / b;
  }
  return out;
}

MaskedField centred_square(const Grid& g, double hw) {
  return domain_mask(g, {ShapeKind::square, {0.5, 0.5}, hw, 0.0}, 0.0);
}

} // namespace

TEST_CASE("GSpec: values and global Lipschitz bounds") {
  const std::vector<GSpec> specs{{GFamily::linear, -2.0, 0.3, 1.0},
                                 {GFamily::linear, 0.5, 0.0, 1.0},
                                 {GFamily::tanh_scale, 3.0, 0.0, 1.0},
                                 {GFamily::clamped_logistic, 1.0, 0.0, 0.7},
                                 {GFamily::clamped_logistic, 1.0, 0.0, 2.0}};
  for (const GSpec& g : specs) {
    const double L = g.lipschitz();
    double worst = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      const double s = -6.0 + 12.0 * k / n, t = s + 12.0 / n;
      worst = std::max(worst, std::abs(g(t) - g(s)) / (t - s));
    }
    CHECK(worst <= L * (1.0 + 1e-9));
    CHECK(worst >= 0.99 * L); // the bound is sharp for these families
  }
  const GSpec lin{GFamily::linear, 2.0, 0.25, 1.0};
  CHECK(lin.g0() == 0.25);
  CHECK(lin(1.0) == 2.25);
  const GSpec logi{GFamily::clamped_logistic, 1.0, 0.0, 0.5};
  CHECK(logi(0.25) == doctest::Approx(0.1875));
  CHECK(logi(0.5) == doctest::Approx(0.25));
  CHECK(logi(1.5) == doctest::Approx(0.25)); // slope 1 - 2M = 0 beyond M
  CHECK_THROWS_AS(validate(GSpec{GFamily::clamped_logistic, 1.0, 0.0, 0.0}), ConfigError);
}

TEST_CASE("ball_stencil: cell-centre counting") {
  const Grid g1 = unit_grid(1, 100);
  const Stencil b1 = ball_stencil(g1, 3.2 * g1.h[0]);
  CHECK(b1.mass() / g1.cell_volume == doctest::Approx(7.0));
  const Grid g2 = unit_grid(2, 100);
  // integer points with i^2 + j^2 <= 10 (Gauss circle count N(10) = 37)
  const Stencil b2 = ball_stencil(g2, 3.2 * g2.h[0]);
  CHECK(b2.mass() / g2.cell_volume == doctest::Approx(37.0));
  for (int i = -b2.reach[0]; i <= b2.reach[0]; ++i)
    for (int j = -b2.reach[1]; j <= b2.reach[1]; ++j) CHECK(b2.at(i, j) == b2.at(-i, -j));
  CHECK_THROWS_AS(ball_stencil(g1, 0.5 * g1.h[0]), ConfigError);
  CHECK_THROWS_AS(ball_stencil(g1, 1.9 * g1.h[0]), ConfigError);
}

TEST_CASE("average_m: constants are preserved") {
  const Grid g = unit_grid(2, 64);
  const MaskedField dom = domain_mask(g, {ShapeKind::square, {0.5, 0.5}, 0.25, 0.0}, 0.1);
  PerforationSpec ps;
  ps.kind = PerforationKind::periodic_balls;
  ps.eps = 0.0625;
  ps.radius_ratio = 0.5;
  const MaskedField mat = perforate(g, dom, ps).material;
  MaskedField c = mat;
  for (std::size_t i = 0; i < g.size(); ++i) c.values[i] = mat.in(i) ? 0.7 : 0.0;
  const MaskedField m = average_m(c, mat, dom, {0.1, AveragingMode::perforated, std::nullopt});
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dom.in(i)) CHECK(std::abs(m.values[i] - 0.7) <= 1e-12);
    else CHECK(m.values[i] == 0.0);
  }

  const double X = 1.0 - std::numbers::pi / 16.0;
  MaskedField x = dom;
  for (std::size_t i = 0; i < g.size(); ++i) x.values[i] = dom.in(i) ? X : 0.0;
  const MaskedField one = average_m(x, x, dom, {0.1, AveragingMode::density, std::nullopt});
  for (std::size_t i = 0; i < g.size(); ++i)
    if (dom.in(i)) CHECK(std::abs(one.values[i] - 1.0) <= 1e-12);
}

TEST_CASE("average_m: direct ball-sum oracle on 16^2") {
  const Grid g = unit_grid(2, 16);
  const MaskedField dom = centred_square(g, 0.3);
  PerforationSpec ps;
  ps.kind = PerforationKind::random_balls;
  ps.count = 3;
  ps.radius = 0.07;
  ps.seed = 3;
  const MaskedField mat = perforate(g, dom, ps).material;
  const double delta = 0.2;

  // perforated: u pre-multiplied by chi_eps, weight chi_eps
  const MaskedField u = random_on(mat, 11);
  const MaskedField m = average_m(u, mat, dom, {delta, AveragingMode::perforated, 1e-9});
  const auto oracle = ball_ratio_oracle(g, u.values, mat.values, delta);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (dom.in(i)) CHECK(std::abs(m.values[i] - oracle[i]) <= 1e-12 * std::max(1.0, std::abs(oracle[i])));

  // perforated mode ignores u off the material (holes are not integrated)
  MaskedField leak = random_on(dom, 12);
  MaskedField clean = restricted(leak, mat.mask);
  const MaskedField ml = average_m(leak, mat, dom, {delta, AveragingMode::perforated, 1e-9});
  const MaskedField mc = average_m(clean, mat, dom, {delta, AveragingMode::perforated, 1e-9});
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(ml.values[i] - mc.values[i]) <= 1e-12);

  // density: weight X (a smooth positive field on Omega)
  MaskedField x = dom;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    x.values[i] = dom.in(i) ? 0.6 + 0.3 * std::sin(4.0 * p[0]) * std::cos(3.0 * p[1]) : 0.0;
  }
  const MaskedField v = random_on(dom, 13);
  const MaskedField md = average_m(v, x, dom, {delta, AveragingMode::density, 1e-9});
  const auto oracle_d = ball_ratio_oracle(g, v.values, x.values, delta);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (dom.in(i)) CHECK(std::abs(md.values[i] - oracle_d[i]) <= 1e-12 * std::max(1.0, std::abs(oracle_d[i])));

  // and through reaction_F with tanh
  const GSpec tanh_g{GFamily::tanh_scale, 1.7, 0.0, 1.0};
  const MaskedField F = reaction_F(v, {delta, AveragingMode::density, 1e-9}, tanh_g, x, dom);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dom.in(i)) CHECK(std::abs(F.values[i] - std::tanh(1.7 * oracle_d[i])) <= 1e-12);
    else CHECK(F.values[i] == 0.0);
  }
}

TEST_CASE("average_m: denominator floor names the worst point") {
  const Grid g = unit_grid(2, 32);
  const MaskedField dom = centred_square(g, 0.25);
  try {
    average_m(dom, dom, dom, {0.1, AveragingMode::perforated, 1.0});
    FAIL("expected a floor violation");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("floor") != std::string::npos);
    CHECK(msg.find('(') != std::string::npos);
  }
}

TEST_CASE("reaction_F: hand values") {
  const Grid g = unit_grid(2, 32);
  const MaskedField dom = centred_square(g, 0.25);
  MaskedField c = dom;
  for (std::size_t i = 0; i < g.size(); ++i) c.values[i] = dom.in(i) ? -0.4 : 0.0;
  const GSpec id{GFamily::linear, 1.0, 0.0, 1.0};
  for (AveragingMode mode : {AveragingMode::perforated, AveragingMode::density}) {
    const MaskedField F = reaction_F(c, {0.1, mode, std::nullopt}, id, dom, dom);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (dom.in(i)) CHECK(std::abs(F.values[i] + 0.4) <= 1e-12);
  }

  const double X = 1.0 - std::numbers::pi / 16.0;
  MaskedField x = dom, u = dom;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(-2.0, 2.0);
  std::vector<double> sv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    sv[i] = s(rng);
    x.values[i] = dom.in(i) ? X : 0.0;
    u.values[i] = dom.in(i) ? X * sv[i] : 0.0;
  }
  const GSpec logi{GFamily::clamped_logistic, 1.0, 0.0, 1.0};
  const MaskedField F = reaction_F(u, {0.1, AveragingMode::local, std::nullopt}, logi, x, dom);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dom.in(i)) CHECK(F.values[i] == doctest::Approx(logi(sv[i])).epsilon(1e-14));
    else CHECK(F.values[i] == 0.0);
  }

  MaskedField low = x;
  low.values[g.index(16, 16)] = 1e-4;
  CHECK_THROWS_AS(Reaction(logi, low, 1e-3), ConfigError);
}

TEST_CASE("Reaction: Lipschitz contract and bounded averages on random pairs") {
  const Grid g = unit_grid(2, 48);
  const MaskedField dom = domain_mask(g, {ShapeKind::square, {0.5, 0.5}, 0.3, 0.0}, 0.1);
  PerforationSpec ps;
  ps.kind = PerforationKind::periodic_balls;
  ps.eps = 0.1;
  ps.radius_ratio = 0.6;
  const MaskedField mat = perforate(g, dom, ps).material;
  auto ball = std::make_shared<const Convolver>(ball_stencil(g, 0.08));
  auto avg = std::make_shared<const BallAverage>(ball, mat, dom, AveragingMode::perforated, std::nullopt);
  const GSpec g_tanh{GFamily::tanh_scale, 2.0, 0.0, 1.0};
  const Reaction R(g_tanh, avg);
  CHECK(R.mode() == AveragingMode::perforated);
  CHECK(R.lipschitz() == doctest::Approx(2.0 * avg->ball_measure() / avg->min_denominator()));

  for (unsigned seed = 0; seed < 10; ++seed) {
    const MaskedField u = random_on(mat, 100 + seed, -3.0, 3.0), v = random_on(mat, 200 + seed, -3.0, 3.0);
    const MaskedField fu = R(u), fv = R(v);
    MaskedField df = fu, du = u;
    for (std::size_t i = 0; i < g.size(); ++i) {
      df.values[i] = fu.values[i] - fv.values[i];
      du.values[i] = u.values[i] - v.values[i];
    }
    CHECK(l2_norm(df) <= R.lipschitz() * l2_norm(du));

    // |m(x)| <= sqrt(|B|) ||u||_2 / C0 (Cauchy-Schwarz over the ball)
    const MaskedField m = (*avg)(u);
    CHECK(max_abs(m) <= std::sqrt(avg->ball_measure()) * l2_norm(u) / avg->min_denominator());
    CHECK(max_abs(m) <= max_abs(u) * (1.0 + 1e-12)); // a mean never exceeds the max
  }
}

TEST_CASE("density-mode reaction approaches the local form as delta shrinks") {
  const Grid g = unit_grid(2, 256);
  const MaskedField dom = domain_mask(g, {ShapeKind::square, {0.5, 0.5}, 0.4, 0.0}, 0.05);
  MaskedField x = dom, u = dom;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    x.values[i] = dom.in(i) ? 0.7 + 0.2 * std::sin(3.0 * p[0] + p[1]) : 0.0;
    u.values[i] = dom.in(i) ? std::exp(-8.0 * ((p[0] - 0.45) * (p[0] - 0.45) + (p[1] - 0.55) * (p[1] - 0.55))) : 0.0;
  }
  const GSpec tanh_g{GFamily::tanh_scale, 1.5, 0.0, 1.0};
  const MaskedField local = reaction_F(u, {0.1, AveragingMode::local, std::nullopt}, tanh_g, x, dom);
  double previous = 1e300;
  for (double delta : {0.16, 0.08, 0.04, 0.02}) {
    const MaskedField F = reaction_F(u, {delta, AveragingMode::density, std::nullopt}, tanh_g, x, dom);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point p = g.point(i);
      if (std::max(std::abs(p[0] - 0.5), std::abs(p[1] - 0.5)) < 0.4 - 0.16)
        err = std::max(err, std::abs(F.values[i] - local.values[i]));
    }
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-2);
}

TEST_CASE("ball-integral gradient identity") {
  const Point v{1.0, 0.0};
  SUBCASE("constant field") {
    const auto r = ball_gradient_check([](const Point&) { return 1.0; }, 2, {0.3, 0.2}, 0.25, v, 1e-3);
    CHECK(std::abs(r.lhs) <= 1e-10);
    CHECK(std::abs(r.rhs) <= 1e-12);
  }
  SUBCASE("linear field: both sides equal pi R^2 times the slope") {
    const double R = 0.2, slope = 1.7;
    const auto r = ball_gradient_check([&](const Point& x) { return slope * x[0] + 0.3; }, 2, {0.1, -0.4}, R, v,
                                           1e-3);
    const double exact = std::numbers::pi * R * R * slope;
    CHECK(std::abs(r.lhs - exact) / exact <= 1e-4);
    CHECK(std::abs(r.rhs - exact) / exact <= 1e-4);
    CHECK(r.rel_err <= 1e-4);
  }
  SUBCASE("gaussian bump, R = 0.3") {
    auto bump = [](const Point& x) { return std::exp(-((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5)) / 0.02); };
    const Point dir{std::sqrt(0.5), std::sqrt(0.5)};
    for (int samples : {256, 512}) {
      const auto r = ball_gradient_check(bump, 2, {0.42, 0.47}, 0.3, dir, 1e-3, samples);
      CHECK(r.rel_err <= 1e-4);
      CHECK(std::abs(r.rhs) > 1e-3);
    }
  }
  SUBCASE("1D: derivative of the interval integral") {
    auto f = [](const Point& x) { return std::sin(3.0 * x[0]) + x[0] * x[0]; };
    const auto r = ball_gradient_check(f, 1, {0.2, 0.0}, 0.3, v, 1e-3);
    const double exact = f({0.5, 0.0}) - f({-0.1, 0.0});
    CHECK(r.rhs == doctest::Approx(exact).epsilon(1e-14));
    // central-difference truncation: spacing^2 / 6 * |Phi'''| with Phi''' = f'' at the ends, |f''| <= 11
    CHECK(std::abs(r.lhs - exact) <= 1e-6 / 6.0 * 22.0);
  }
  SUBCASE("preconditions") {
    auto one = [](const Point&) { return 1.0; };
    CHECK_THROWS_AS(ball_gradient_check(one, 2, {0.0, 0.0}, 0.001, v, 1e-3), ConfigError);
    CHECK_THROWS_AS(ball_gradient_check(one, 2, {0.0, 0.0}, 0.3, v, 1e-3, 128), ConfigError);
  }
}
