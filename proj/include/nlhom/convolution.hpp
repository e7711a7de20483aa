#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "nlhom/grid.hpp"

namespace nlhom {

/// Weights on grid offsets -reach..reach per axis (row-major over the
/// (2 reach_0 + 1) x (2 reach_1 + 1) block). Used both for normalized kernels
/// and for unnormalized ball indicators.
struct Stencil {
  Grid grid;
  std::array<int, 2> reach{0, 0};
  double support_radius = 0.0;
  std::vector<double> weights;

  int width(int axis) const { return 2 * reach[axis] + 1; }
  double at(int di, int dj = 0) const {
    return weights[static_cast<std::size_t>(di + reach[0]) * width(1) + (dj + reach[1])];
  }
  double& at(int di, int dj = 0) {
    return weights[static_cast<std::size_t>(di + reach[0]) * width(1) + (dj + reach[1])];
  }
  double center() const { return at(0, 0); }
  /// Sum of weights times cell volume.
  double mass() const;
};

/// Zero-padded FFT convolution on a fixed grid with a fixed stencil.
///
/// Computes (S * f)(x) = sum_y S(x - y) f(y) cell_volume, with f extended by a
/// constant outside the box. The padded length per axis is at least n + reach
/// so the circular product never wraps. Plans and the stencil spectrum are
/// built once; apply() allocates its own scratch and is safe to call from
/// several threads.
class Convolver {
public:
  explicit Convolver(Stencil stencil);
  ~Convolver();
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  const Stencil& stencil() const { return stencil_; }
  const Grid& grid() const { return stencil_.grid; }

  /// Result is defined on the whole grid (mask all true).
  MaskedField apply(const MaskedField& f, double exterior = 0.0) const;
  /// Raw path, exterior zero. `in` values are used regardless of any mask.
  void apply(std::span<const double> in, std::span<double> out) const;
  /// S * 1_box with zero exterior.
  const std::vector<double>& box_response() const { return box_response_; }

private:
  struct Plans;
  Stencil stencil_;
  std::array<int, 2> padded_{1, 1};
  std::size_t real_size_ = 0;
  std::size_t spectral_size_ = 0;
  std::vector<std::complex<double>> spectrum_;
  std::unique_ptr<Plans> plans_;
  std::vector<double> box_response_;
};

MaskedField convolve(const Convolver& conv, const MaskedField& f, double exterior = 0.0);

/// Direct double sum; the reference for convolve().
MaskedField convolve_direct(const Stencil& s, const MaskedField& f, double exterior = 0.0);

/// Smallest 2^a 3^b 5^c 7^d not below n.
int fft_friendly_size(int n);

} // namespace nlhom
