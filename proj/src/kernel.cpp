#include "nlhom/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nlhom/error.hpp"

namespace nlhom {

std::string to_string(KernelFamily f) {
  switch (f) {
  case KernelFamily::bump: return "bump";
  case KernelFamily::tent: return "tent";
  case KernelFamily::truncated_gaussian: return "truncated_gaussian";
  }
  return "?";
}

std::string to_string(BoundaryCondition bc) { return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann"; }

double kernel_profile(KernelFamily family, double r, double R) {
  if (r > R) return 0.0;
  const double s = r / R;
  switch (family) {
  case KernelFamily::bump:
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
  case KernelFamily::tent:
    return 1.0 - s;
  case KernelFamily::truncated_gaussian: {
    const double sigma = R / 3.0;
    return std::exp(-0.5 * r * r / (sigma * sigma));
  }
  }
  return 0.0;
}

Stencil build_kernel(const Grid& g, KernelFamily family, double support_radius, double max_radius) {
  for (int a = 0; a < g.dim; ++a)
    if (!(support_radius >= 2.0 * g.h[a]))
      throw ConfigError("kernel: support_radius " + std::to_string(support_radius) +
                        " spans fewer than two cells (h = " + std::to_string(g.h[a]) + ")");
  if (support_radius > max_radius)
    throw ConfigError("kernel: support_radius " + std::to_string(support_radius) + " exceeds the padding margin " +
                      std::to_string(max_radius));

  Stencil s;
  s.grid = g;
  s.support_radius = support_radius;
  for (int a = 0; a < g.dim; ++a) s.reach[a] = static_cast<int>(std::floor(support_radius / g.h[a] + 1e-12));
  s.weights.assign(static_cast<std::size_t>(s.width(0)) * s.width(1), 0.0);

  auto sample = [&](int di, int dj) {
    const double x = di * g.h[0];
    const double y = g.dim == 2 ? dj * g.h[1] : 0.0;
    return kernel_profile(family, std::hypot(x, y), support_radius);
  };
  for (int di = -s.reach[0]; di <= s.reach[0]; ++di)
    for (int dj = -s.reach[1]; dj <= s.reach[1]; ++dj) s.at(di, dj) = 0.5 * (sample(di, dj) + sample(-di, -dj));

  const double m = s.mass();
  if (!(m > 0.0)) throw ConfigError("kernel: sampled profile is identically zero; support too small");
  for (double& w : s.weights) w /= m;
  return s;
}

MaskedField coefficient_h_eps(const Convolver& kernel, const MaskedField& domain, const MaskedField& material,
                              BoundaryCondition bc) {
  const Grid& g = kernel.grid();
  if (bc == BoundaryCondition::dirichlet) return constant_field(g, 1.0);
  MaskedField holes(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    holes.values[i] = domain.values[i] - material.values[i];
    holes.mask[i] = holes.values[i] != 0.0;
  }
  MaskedField h = kernel.apply(holes);
  for (double& v : h.values) v = 1.0 - v;
  return h;
}

MaskedField coefficient_h0(const Convolver& kernel, const MaskedField& domain, const MaskedField& density) {
  const Grid& g = kernel.grid();
  MaskedField deficit(g);
  deficit.mask = domain.mask;
  for (std::size_t i = 0; i < g.size(); ++i) deficit.values[i] = domain.in(i) ? 1.0 - density.values[i] : 0.0;
  MaskedField h = kernel.apply(deficit);
  for (double& v : h.values) v = 1.0 - v;
  return h;
}

MaskedField coefficient_lambda(const MaskedField& h0, const MaskedField& density) {
  require_same_grid(h0.grid, density.grid, "coefficient_lambda");
  MaskedField lam = constant_field(h0.grid, 0.0);
  for (std::size_t i = 0; i < lam.size(); ++i) lam.values[i] = h0.values[i] - density.values[i];
  return lam;
}

std::vector<double> smoothing_check(const Convolver& kernel, std::span<const MaskedField> materials,
                                    const MaskedField& density, const Mask& window) {
  const MaskedField limit = kernel.apply(density);
  std::vector<double> out;
  out.reserve(materials.size());
  for (const MaskedField& chi : materials) {
    const MaskedField smoothed = kernel.apply(chi);
    double worst = 0.0;
    for (std::size_t i = 0; i < smoothed.size(); ++i)
      if (window[i]) worst = std::max(worst, std::abs(smoothed.values[i] - limit.values[i]));
    out.push_back(worst);
  }
  return out;
}

void write_kernel_csv(std::ostream& os, const Stencil& s) {
  os << (s.grid.dim == 2 ? "di,dj,weight\n" : "di,weight\n");
  os << std::setprecision(17);
  for (int di = -s.reach[0]; di <= s.reach[0]; ++di)
    for (int dj = -s.reach[1]; dj <= s.reach[1]; ++dj) {
      os << di << ',';
      if (s.grid.dim == 2) os << dj << ',';
      os << s.at(di, dj) << '\n';
    }
}

} // namespace nlhom
