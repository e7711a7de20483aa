#include "nlhom/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlhom/error.hpp"

namespace nlhom {

Point Grid::point(std::size_t idx) const {
  const int i = static_cast<int>(idx / n[1]);
  const int j = static_cast<int>(idx % n[1]);
  return {coord(0, i), dim == 2 ? coord(1, j) : 0.0};
}

double Grid::min_spacing() const { return dim == 2 ? std::min(h[0], h[1]) : h[0]; }

Grid build_grid(int dim, std::span<const int> n_per_dim, std::span<const std::array<double, 2>> box) {
  if (dim != 1 && dim != 2)
    throw ConfigError("grid: dim must be 1 or 2, got " + std::to_string(dim));
  if (static_cast<int>(n_per_dim.size()) != dim || static_cast<int>(box.size()) != dim)
    throw ConfigError("grid: expected " + std::to_string(dim) + " entries for n and box");
  Grid g;
  g.dim = dim;
  g.cell_volume = 1.0;
  for (int a = 0; a < dim; ++a) {
    if (n_per_dim[a] < 4)
      throw ConfigError("grid: need at least 4 points per axis, axis " + std::to_string(a) + " has " +
                        std::to_string(n_per_dim[a]));
    if (!(box[a][1] > box[a][0]))
      throw ConfigError("grid: degenerate box on axis " + std::to_string(a));
    g.n[a] = n_per_dim[a];
    g.low[a] = box[a][0];
    g.high[a] = box[a][1];
    g.h[a] = (box[a][1] - box[a][0]) / n_per_dim[a];
    g.cell_volume *= g.h[a];
  }
  return g;
}

void MaskedField::restrict_to_mask() {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!mask[i]) values[i] = 0.0;
}

MaskedField constant_field(const Grid& g, double value) {
  MaskedField f(g);
  std::fill(f.values.begin(), f.values.end(), value);
  std::fill(f.mask.begin(), f.mask.end(), 1);
  return f;
}

MaskedField indicator_field(const Grid& g, Mask mask) {
  if (mask.size() != g.size()) throw std::invalid_argument("indicator_field: mask size mismatch");
  MaskedField f(g);
  f.mask = std::move(mask);
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = f.mask[i] ? 1.0 : 0.0;
  return f;
}

MaskedField restricted(const MaskedField& f, const Mask& mask) {
  MaskedField out = f;
  out.mask = mask;
  out.restrict_to_mask();
  return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

double integral(const MaskedField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.mask[i]) s += f.values[i];
  return s * f.grid.cell_volume;
}

double l2_norm(const MaskedField& f) { return std::sqrt(inner(f, f)); }

double inner(const MaskedField& a, const MaskedField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.mask[i] && b.mask[i]) s += a.values[i] * b.values[i];
  return s * a.grid.cell_volume;
}

double max_abs(const MaskedField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.mask[i]) m = std::max(m, std::abs(f.values[i]));
  return m;
}

std::size_t count(const Mask& m) { return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](auto v) { return v != 0; })); }

double measure(const Grid& g, const Mask& m) { return static_cast<double>(count(m)) * g.cell_volume; }

} // namespace nlhom
