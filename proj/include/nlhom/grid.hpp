#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nlhom {

using Point = std::array<double, 2>;

/// Uniform cell-centred lattice over a box in 1 or 2 dimensions.
///
/// Points sit at cell centres, so index k on an axis maps to
/// low + (k + 1/2) h. In 1D the second axis is a dummy of extent one and is
/// excluded from the cell volume.
struct Grid {
  int dim = 1;
  std::array<int, 2> n{1, 1};
  std::array<double, 2> low{0.0, 0.0};
  std::array<double, 2> high{1.0, 1.0};
  std::array<double, 2> h{1.0, 1.0};
  double cell_volume = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]); }
  std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(i) * n[1] + j; }
  double coord(int axis, int k) const { return low[axis] + (k + 0.5) * h[axis]; }
  Point point(std::size_t idx) const;
  double min_spacing() const;
  std::size_t bytes_per_field() const { return size() * sizeof(double); }

  bool operator==(const Grid&) const = default;
};

Grid build_grid(int dim, std::span<const int> n_per_dim, std::span<const std::array<double, 2>> box);

using Mask = std::vector<std::uint8_t>;

/// Real values on a grid plus a membership mask.
///
/// Values off the mask are kept at exactly zero (extension by zero); every
/// producer in the library calls restrict_to_mask() before handing a field out.
struct MaskedField {
  Grid grid;
  std::vector<double> values;
  Mask mask;

  MaskedField() = default;
  explicit MaskedField(const Grid& g) : grid(g), values(g.size(), 0.0), mask(g.size(), 0) {}

  std::size_t size() const { return values.size(); }
  bool in(std::size_t i) const { return mask[i] != 0; }
  void restrict_to_mask();
};

/// Field equal to `value` everywhere with the full-grid mask.
MaskedField constant_field(const Grid& g, double value);
/// 0/1 indicator of `mask`, with `mask` as membership.
MaskedField indicator_field(const Grid& g, Mask mask);
/// Copies `f` onto `mask`, zeroing values outside it.
MaskedField restricted(const MaskedField& f, const Mask& mask);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// Sum of f over its mask times the cell volume.
double integral(const MaskedField& f);
/// sqrt of sum of f^2 over mask times cell volume.
double l2_norm(const MaskedField& f);
/// Cell-volume weighted inner product over the intersection of masks.
double inner(const MaskedField& a, const MaskedField& b);
double max_abs(const MaskedField& f);
std::size_t count(const Mask& m);
/// Measure of the mask: count * cell_volume.
double measure(const Grid& g, const Mask& m);

} // namespace nlhom
