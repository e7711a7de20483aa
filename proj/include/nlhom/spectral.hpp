#pragma once

#include <string>

#include <json.hpp>

#include "nlhom/convolution.hpp"
#include "nlhom/grid.hpp"

namespace nlhom {

struct EigenOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

struct EigenResult {
  double lambda1 = 0.0;
  int iterations = 0;
  double residual = 0.0; // ||A v - lambda1 v|| / ||v||
  MaskedField eigenfield;
};

/// The operator A u = h u - 1/2 (a (J * u) + J * (a u)) on fields supported by
/// `support`. With a == 1 this is h u - J * u, the linear part of the evolution
/// with the sign flipped; a general weight gives the symmetric part of
/// h u - a (J * u). A null `weight` means a == 1.
MaskedField apply_linear_operator(const Convolver& kernel, const MaskedField& h, const Mask& support,
                                  const MaskedField& u, const MaskedField* weight = nullptr);

/// Smallest eigenvalue of A by shifted power iteration on (sigma I - A), with
/// sigma = max h + 1 over the support. Stops when the relative eigenvalue change
/// is <= tol and the residual is <= 10 tol; throws NumericalError otherwise.
EigenResult lambda1(const Convolver& kernel, const MaskedField& h, const Mask& support, const EigenOptions& opts = {},
                    const MaskedField* weight = nullptr);

/// <u, A u> / <u, u>. Throws std::invalid_argument for u == 0.
double rayleigh_quotient(const Convolver& kernel, const MaskedField& h, const MaskedField& u,
                         const MaskedField* weight = nullptr);

/// 1/2 sum_{x,y admissible} J(x-y) (u(y) - u(x))^2 cv^2, summed over the
/// stencil offsets directly (no FFT).
double quadratic_form_direct(const Stencil& kernel, const Mask& admissible, const MaskedField& u);

nlohmann::json to_json(const EigenResult& r);

} // namespace nlhom
