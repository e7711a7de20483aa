#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "nlhom/grid.hpp"

namespace nlhom {

enum class ShapeKind { square, disk };

/// The fixed domain Omega. A square is the closed axis-aligned cube of the given
/// half-width; a disk is the open ball of the given radius (1D: an interval).
struct DomainShape {
  ShapeKind kind = ShapeKind::square;
  Point center{0.5, 0.5};
  double half_width = 0.25;
  double radius = 0.25;
};

/// chi_Omega. Throws ConfigError unless every part of the shape stays at least
/// `required_margin` (and strictly more than zero) away from the box boundary.
MaskedField domain_mask(const Grid& g, const DomainShape& shape, double required_margin);

enum class PerforationKind { none, periodic_balls, random_balls };

struct PerforationSpec {
  PerforationKind kind = PerforationKind::none;
  double eps = 0.125;          // periodic: centres on 2 eps Z^N
  double radius_ratio = 0.5;   // periodic: r = radius_ratio * eps, in (0, 1)
  int count = 0;               // random
  double radius = 0.0;         // random
  std::uint64_t seed = 0;      // random
};

void validate(const PerforationSpec& spec);

/// Uniform lower bound on |B_delta(x) cap Omega^eps| over x in Omega.
struct CoverageSpec {
  double delta = 0.1;
  double floor = 0.0;
};

struct Perforation {
  MaskedField material; // chi_eps, membership Omega^eps
  MaskedField holes;    // A^eps = chi_Omega - chi_eps, membership A^eps
  double worst_coverage = 0.0;
};

/// Removes every Omega cell whose centre lies strictly inside a hole. When
/// `coverage` is given the ball-coverage bound is verified and a ConfigError
/// reports the worst measure if it fails.
Perforation perforate(const Grid& g, const MaskedField& domain, const PerforationSpec& spec,
                      const std::optional<CoverageSpec>& coverage = std::nullopt);

/// min over x in Omega of |B_delta(x) cap material| (discrete measure).
double worst_ball_coverage(const Grid& g, const MaskedField& domain, const MaskedField& material, double delta);

enum class DensityMode { analytic, cell_average };

struct DensitySpec {
  DensityMode mode = DensityMode::analytic;
  double window = 0.0;  // cell_average window side; 0 means one period 2 eps
  double floor = 1e-3;  // lower bound c on Omega
};

/// |Q \ B| / |Q| for the periodic ball lattice.
double periodic_density(int dim, double radius_ratio);

/// The effective density X on Omega, zero off it. Throws ConfigError if X
/// drops below the floor anywhere on Omega.
MaskedField effective_density(const Grid& g, const MaskedField& domain, const MaskedField& material,
                              const PerforationSpec& spec, const DensitySpec& density);

std::string to_string(PerforationKind k);
std::string to_string(DensityMode m);

} // namespace nlhom
