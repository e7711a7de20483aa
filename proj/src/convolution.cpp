#include "nlhom/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace nlhom {

namespace {

// The FFTW planner is not re-entrant; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealBuffer {
  explicit RealBuffer(std::size_t n) : p(fftw_alloc_real(n)) { std::fill(p, p + n, 0.0); }
  ~RealBuffer() { fftw_free(p); }
  RealBuffer(const RealBuffer&) = delete;
  RealBuffer& operator=(const RealBuffer&) = delete;
  double* p;
};

struct ComplexBuffer {
  explicit ComplexBuffer(std::size_t n) : p(fftw_alloc_complex(n)) {}
  ~ComplexBuffer() { fftw_free(p); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  fftw_complex* p;
};

} // namespace

double Stencil::mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0) * grid.cell_volume;
}

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

struct Convolver::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

Convolver::Convolver(Stencil stencil) : stencil_(std::move(stencil)) {
  const Grid& g = stencil_.grid;
  if (stencil_.weights.size() != static_cast<std::size_t>(stencil_.width(0)) * stencil_.width(1))
    throw std::invalid_argument("Convolver: stencil weight count does not match its reach");
  if (g.dim == 1 && stencil_.reach[1] != 0)
    throw std::invalid_argument("Convolver: 1D stencil with reach on the dummy axis");

  padded_ = {fft_friendly_size(g.n[0] + stencil_.reach[0]), 1};
  if (g.dim == 2) padded_[1] = fft_friendly_size(g.n[1] + stencil_.reach[1]);
  real_size_ = static_cast<std::size_t>(padded_[0]) * padded_[1];
  spectral_size_ = g.dim == 2 ? static_cast<std::size_t>(padded_[0]) * (padded_[1] / 2 + 1)
                              : static_cast<std::size_t>(padded_[0] / 2 + 1);

  RealBuffer real(real_size_);
  ComplexBuffer spec(spectral_size_);
  plans_ = std::make_unique<Plans>();
  {
    std::lock_guard lock(planner_mutex());
    int dims[2] = {padded_[0], padded_[1]};
    plans_->forward = fftw_plan_dft_r2c(g.dim, dims, real.p, spec.p, FFTW_ESTIMATE);
    plans_->backward = fftw_plan_dft_c2r(g.dim, dims, spec.p, real.p, FFTW_ESTIMATE);
  }
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("Convolver: FFTW planning failed");

  // Wrap offsets into the padded box; the cell volume and the inverse-FFT
  // scaling are folded into the spectrum.
  const double scale = g.cell_volume / static_cast<double>(real_size_);
  std::fill(real.p, real.p + real_size_, 0.0);
  for (int di = -stencil_.reach[0]; di <= stencil_.reach[0]; ++di)
    for (int dj = -stencil_.reach[1]; dj <= stencil_.reach[1]; ++dj) {
      const int pi = (di + padded_[0]) % padded_[0];
      const int pj = (dj + padded_[1]) % padded_[1];
      real.p[static_cast<std::size_t>(pi) * padded_[1] + pj] += stencil_.at(di, dj) * scale;
    }
  fftw_execute_dft_r2c(plans_->forward, real.p, spec.p);
  spectrum_.resize(spectral_size_);
  for (std::size_t k = 0; k < spectral_size_; ++k) spectrum_[k] = {spec.p[k][0], spec.p[k][1]};

  std::vector<double> ones(g.size(), 1.0);
  box_response_.assign(g.size(), 0.0);
  apply(ones, box_response_);
}

Convolver::~Convolver() = default;

void Convolver::apply(std::span<const double> in, std::span<double> out) const {
  const Grid& g = stencil_.grid;
  if (in.size() != g.size() || out.size() != g.size())
    throw std::invalid_argument("Convolver::apply: field size does not match grid");
  RealBuffer real(real_size_);
  ComplexBuffer spec(spectral_size_);
  for (int i = 0; i < g.n[0]; ++i)
    std::copy_n(in.data() + g.index(i), g.n[1], real.p + static_cast<std::size_t>(i) * padded_[1]);
  fftw_execute_dft_r2c(plans_->forward, real.p, spec.p);
  for (std::size_t k = 0; k < spectral_size_; ++k) {
    const std::complex<double> v = std::complex<double>(spec.p[k][0], spec.p[k][1]) * spectrum_[k];
    spec.p[k][0] = v.real();
    spec.p[k][1] = v.imag();
  }
  fftw_execute_dft_c2r(plans_->backward, spec.p, real.p);
  for (int i = 0; i < g.n[0]; ++i)
    std::copy_n(real.p + static_cast<std::size_t>(i) * padded_[1], g.n[1], out.data() + g.index(i));
}

MaskedField Convolver::apply(const MaskedField& f, double exterior) const {
  require_same_grid(f.grid, grid(), "convolve");
  MaskedField out = constant_field(grid(), 0.0);
  apply(f.values, out.values);
  if (exterior != 0.0)
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += exterior * (1.0 - box_response_[i]);
  return out;
}

MaskedField convolve(const Convolver& conv, const MaskedField& f, double exterior) { return conv.apply(f, exterior); }

MaskedField convolve_direct(const Stencil& s, const MaskedField& f, double exterior) {
  require_same_grid(f.grid, s.grid, "convolve_direct");
  const Grid& g = s.grid;
  MaskedField out = constant_field(g, 0.0);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j) {
      double acc = 0.0;
      for (int di = -s.reach[0]; di <= s.reach[0]; ++di)
        for (int dj = -s.reach[1]; dj <= s.reach[1]; ++dj) {
          const int yi = i - di;
          const int yj = j - dj;
          const bool inside = yi >= 0 && yi < g.n[0] && yj >= 0 && yj < g.n[1];
          acc += s.at(di, dj) * (inside ? f.values[g.index(yi, yj)] : exterior);
        }
      out.values[g.index(i, j)] = acc * g.cell_volume;
    }
  return out;
}

} // namespace nlhom
