#include "nlhom/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nlhom/error.hpp"

namespace nlhom {

MaskedField apply_linear_operator(const Convolver& kernel, const MaskedField& h, const Mask& support,
                                  const MaskedField& u, const MaskedField* weight) {
  const Grid& g = kernel.grid();
  require_same_grid(u.grid, g, "apply_linear_operator");
  std::vector<double> in(g.size(), 0.0), conv(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (support[i]) in[i] = u.values[i];
  kernel.apply(in, conv);

  MaskedField out(g);
  out.mask = support;
  if (!weight) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (support[i]) out.values[i] = h.values[i] * in[i] - conv[i];
    return out;
  }
  std::vector<double> weighted(g.size(), 0.0), conv_weighted(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (support[i]) weighted[i] = weight->values[i] * in[i];
  kernel.apply(weighted, conv_weighted);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (support[i]) out.values[i] = h.values[i] * in[i] - 0.5 * (weight->values[i] * conv[i] + conv_weighted[i]);
  return out;
}

EigenResult lambda1(const Convolver& kernel, const MaskedField& h, const Mask& support, const EigenOptions& opts,
                    const MaskedField* weight) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("lambda1: tol must be positive");
  const Grid& g = kernel.grid();
  require_same_grid(h.grid, g, "lambda1");
  const std::size_t n = count(support);
  if (n == 0) throw std::invalid_argument("lambda1: empty support");

  double hmax = -1e300;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (support[i]) hmax = std::max(hmax, h.values[i]);
  const double sigma = hmax + 1.0;

  // The ground state of the nonnegative-kernel operator is positive, so the
  // constant start vector overlaps it.
  MaskedField v(g);
  v.mask = support;
  for (std::size_t i = 0; i < g.size(); ++i) v.values[i] = support[i] ? 1.0 : 0.0;
  double nv = l2_norm(v);
  for (double& x : v.values) x /= nv;

  EigenResult res;
  double mu_prev = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const MaskedField av = apply_linear_operator(kernel, h, support, v, weight);
    MaskedField bv(g);
    bv.mask = support;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (support[i]) bv.values[i] = sigma * v.values[i] - av.values[i];
    const double mu = inner(v, bv); // v has unit norm
    // A v - lambda v = mu v - B v
    double r2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (support[i]) r2 += std::pow(mu * v.values[i] - bv.values[i], 2);
    res.residual = std::sqrt(r2 * g.cell_volume);
    res.lambda1 = sigma - mu;
    res.iterations = it;

    const double change = std::abs(mu - mu_prev) / std::max(std::abs(sigma - mu), 1.0);
    if (it > 1 && change <= opts.tol && res.residual <= 10.0 * opts.tol) {
      res.eigenfield = v;
      return res;
    }
    mu_prev = mu;
    nv = l2_norm(bv);
    if (!(nv > 0.0)) break;
    for (std::size_t i = 0; i < g.size(); ++i) v.values[i] = bv.values[i] / nv;
  }
  std::ostringstream os;
  os << "lambda1: no convergence after " << res.iterations << " iterations (lambda1 ~ " << res.lambda1
     << ", residual " << res.residual << ")";
  throw NumericalError(os.str());
}

double rayleigh_quotient(const Convolver& kernel, const MaskedField& h, const MaskedField& u,
                         const MaskedField* weight) {
  const double uu = inner(u, u);
  if (!(uu > 0.0)) throw std::invalid_argument("rayleigh_quotient: zero field");
  const MaskedField au = apply_linear_operator(kernel, h, u.mask, u, weight);
  return inner(u, au) / uu;
}

double quadratic_form_direct(const Stencil& kernel, const Mask& admissible, const MaskedField& u) {
  const Grid& g = u.grid;
  require_same_grid(g, kernel.grid, "quadratic_form_direct");
  const int r0 = kernel.reach[0], r1 = kernel.reach[1];
  double acc = 0.0;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j) {
      const std::size_t x = g.index(i, j);
      if (!admissible[x]) continue;
      const double ux = u.in(x) ? u.values[x] : 0.0;
      for (int di = -r0; di <= r0; ++di) {
        const int yi = i + di;
        if (yi < 0 || yi >= g.n[0]) continue;
        for (int dj = -r1; dj <= r1; ++dj) {
          const int yj = j + dj;
          if (yj < 0 || yj >= g.n[1]) continue;
          const std::size_t y = g.index(yi, yj);
          if (!admissible[y]) continue;
          const double d = (u.in(y) ? u.values[y] : 0.0) - ux;
          acc += kernel.at(di, dj) * d * d;
        }
      }
    }
  return 0.5 * acc * g.cell_volume * g.cell_volume;
}

nlohmann::json to_json(const EigenResult& r) {
  return {{"lambda1", r.lambda1}, {"iterations", r.iterations}, {"residual", r.residual}};
}

} // namespace nlhom
