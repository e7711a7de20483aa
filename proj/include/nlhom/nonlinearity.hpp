#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "nlhom/convolution.hpp"
#include "nlhom/grid.hpp"

namespace nlhom {

enum class GFamily { linear, tanh_scale, clamped_logistic };

/// Globally Lipschitz scalar reaction g.
///   linear:           g(s) = a s + b
///   tanh_scale:       g(s) = tanh(a s)
///   clamped_logistic: g(s) = s (1 - s) on [-M, M], continued linearly with
///                     matching slope outside
struct GSpec {
  GFamily family = GFamily::linear;
  double a = 1.0;
  double b = 0.0;
  double M = 1.0;

  double operator()(double s) const;
  /// A global Lipschitz bound for the realized function.
  double lipschitz() const;
  double g0() const { return (*this)(0.0); }
};

void validate(const GSpec& g);
std::string to_string(GFamily f);

enum class AveragingMode { perforated, density, local };
std::string to_string(AveragingMode m);

struct AveragingSpec {
  double delta = 0.1;
  AveragingMode mode = AveragingMode::density;
  /// Absolute lower bound C_0 on the ball-average denominator. Unset means
  /// 5% of the discrete ball measure.
  std::optional<double> denominator_floor;
};

/// Unit weight on every offset whose cell centre lies strictly inside B_delta(0).
Stencil ball_stencil(const Grid& g, double delta);

/// Ball average m(x) = (1_B * u)(x) / (1_B * w)(x) on Omega with the denominator
/// computed once at construction and checked against the floor.
///
/// In perforated mode the weight is chi_eps and u is restricted to Omega^eps
/// before averaging; in density mode the weight is X.
class BallAverage {
public:
  BallAverage(std::shared_ptr<const Convolver> ball, const MaskedField& weight, const MaskedField& domain,
              AveragingMode mode, std::optional<double> floor);

  MaskedField operator()(const MaskedField& u) const;

  double min_denominator() const { return min_denominator_; }
  double floor() const { return floor_; }
  double ball_measure() const { return ball_measure_; }
  /// L2 -> L2 bound of the averaging map: |B_delta| / C_0.
  double operator_bound() const { return ball_measure_ / min_denominator_; }
  const Convolver& ball() const { return *ball_; }
  AveragingMode mode() const { return mode_; }

private:
  std::shared_ptr<const Convolver> ball_;
  AveragingMode mode_;
  Mask domain_;
  Mask weight_support_;
  std::vector<double> denominator_;
  double min_denominator_ = 0.0;
  double floor_ = 0.0;
  double ball_measure_ = 0.0;
};

/// One-shot form of BallAverage.
MaskedField average_m(const MaskedField& u, const MaskedField& weight, const MaskedField& domain,
                      const AveragingSpec& spec);

/// F(u) = g(m(u)) on Omega for perforated/density modes, g(u / X) on Omega in
/// local mode; zero off Omega.
class Reaction {
public:
  /// Nonlocal modes.
  Reaction(GSpec g, std::shared_ptr<const BallAverage> average);
  /// Local mode.
  Reaction(GSpec g, const MaskedField& density, double density_floor);

  MaskedField operator()(const MaskedField& u) const;

  AveragingMode mode() const { return mode_; }
  const GSpec& g() const { return g_; }
  const BallAverage* average() const { return average_.get(); }
  /// L2 Lipschitz constant of u -> F(u): L_g |B| / C_0, or L_g / min X locally.
  double lipschitz() const;

private:
  GSpec g_;
  AveragingMode mode_;
  std::shared_ptr<const BallAverage> average_;
  MaskedField density_;
  double min_density_ = 1.0;
};

MaskedField reaction_F(const MaskedField& u, const AveragingSpec& spec, const GSpec& g, const MaskedField& weight,
                       const MaskedField& domain);

struct GradientCheck {
  double lhs = 0.0;     // central difference of Phi(x) = int_{B_R(x)} u
  double rhs = 0.0;     // boundary integral of u (v . N) over dB_R(x)
  double rel_err = 0.0; // |lhs - rhs| / max(|rhs|, |Phi(x)| / R)
};

/// Checks grad Phi(x) . v against the boundary integral of u v.N.
/// `spacing` is the finite-difference step; R must be at least two steps.
GradientCheck ball_gradient_check(const std::function<double(const Point&)>& u, int dim, const Point& x,
                                      double radius, const Point& direction, double spacing,
                                      int boundary_samples = 256);

} // namespace nlhom
