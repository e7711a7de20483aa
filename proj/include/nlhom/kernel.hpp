#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nlhom/convolution.hpp"
#include "nlhom/grid.hpp"

namespace nlhom {

enum class KernelFamily { bump, tent, truncated_gaussian };
enum class BoundaryCondition { dirichlet, neumann };

std::string to_string(KernelFamily f);
std::string to_string(BoundaryCondition bc);

/// Radial profile before normalization, r in [0, support_radius].
double kernel_profile(KernelFamily family, double r, double support_radius);

/// Samples the profile on grid offsets, symmetrizes J(x) and J(-x) by averaging,
/// and rescales so that sum(weights) * cell_volume == 1.
///
/// support_radius must span at least two cells on every axis and must not
/// exceed `max_radius` (the padding margin between Omega and the box).
Stencil build_kernel(const Grid& g, KernelFamily family, double support_radius,
                     double max_radius = std::numeric_limits<double>::infinity());

/// Dirichlet: 1 everywhere. Neumann: 1 - J * A^eps with A^eps = chi_Omega - chi_eps.
MaskedField coefficient_h_eps(const Convolver& kernel, const MaskedField& domain, const MaskedField& material,
                              BoundaryCondition bc);

/// h_0 = 1 - J * (chi_Omega - X).
MaskedField coefficient_h0(const Convolver& kernel, const MaskedField& domain, const MaskedField& density);

/// Lambda = h_0 - X pointwise.
MaskedField coefficient_lambda(const MaskedField& h0, const MaskedField& density);

/// max over `window` of |J * chi_eps - J * X| for each member of the family.
std::vector<double> smoothing_check(const Convolver& kernel, std::span<const MaskedField> materials,
                                    const MaskedField& density, const Mask& window);

/// One row per offset: "di[,dj],weight".
void write_kernel_csv(std::ostream& os, const Stencil& s);

} // namespace nlhom
