#pragma once

#include <filesystem>
#include <vector>

#include "glrom/grid.hpp"
#include "glrom/types.hpp"

namespace glrom {

/// Axis-aligned high-conductivity strip, in unrotated coordinates.
struct Strip {
  double x0, x1, y0, y1;
};

struct ChannelLayout {
  std::vector<Strip> strips;
  bool rotated = false;  // swap x and y: horizontal channels become vertical

  // Three long horizontal channels plus four short inclusions.
  static ChannelLayout standard();
};

/// Piecewise-constant conductivity, one value per fine triangle.
struct PermeabilityField {
  std::vector<double> values;
  double kappa_min = 1.0;
  double kappa_max = 1.0;
};

PermeabilityField channel_permeability(const FineMesh& mesh, double eta,
                                       const ChannelLayout& layout);

/// One value per line (optionally `id,value`), in triangle order.
PermeabilityField load_permeability_csv(const std::filesystem::path& path, const FineMesh& mesh);
void save_permeability_csv(const PermeabilityField& field, const std::filesystem::path& path);

enum class NonlinearityKind { ExpMuU, ExpMuShifted };

/// b(u, mu) = exp(mu * (shift + u)); shift is 0 for ExpMuU.
struct Nonlinearity {
  NonlinearityKind kind = NonlinearityKind::ExpMuU;
  double shift = 0.0;
  double exponent_bound = 700.0;

  static Nonlinearity exp_mu_u() { return {}; }
  static Nonlinearity exp_mu_shifted(double shift = 0.9) {
    return {NonlinearityKind::ExpMuShifted, shift, 700.0};
  }

  double exponent(double u, double mu) const { return mu * (shift + u); }

  // Exponent clamped at the bound; callers check `exceeds` where it matters.
  double value(double u, double mu) const;
  double derivative(double u, double mu) const { return mu * value(u, mu); }

  // For this family db/du = mu * b, so derivatives reuse sampled values.
  double derivative_from_value(double b, double mu) const { return mu * b; }

  bool exceeds(double u, double mu) const { return exponent(u, mu) > exponent_bound; }

  // Throws OverflowError instead of clamping.
  double checked_value(double u, double mu) const;
  double checked_derivative(double u, double mu) const { return mu * checked_value(u, mu); }
};

enum class SourceKind { Sin2Pi, Sin4Pi, Constant };

/// Forcing term h(x).
struct Source {
  SourceKind kind = SourceKind::Sin2Pi;
  double constant = 0.0;  // used by SourceKind::Constant

  static Source sin2pi() { return {SourceKind::Sin2Pi, 0.0}; }
  static Source sin4pi() { return {SourceKind::Sin4Pi, 0.0}; }
  static Source uniform(double c) { return {SourceKind::Constant, c}; }

  double operator()(Point p) const;
};

/// 1 + sin(k pi x) sin(k pi y) with k = 2 or 4.
double source_term(Point p, SourceKind variant);

struct InitialCondition {
  enum class Kind { ScaledW0, Zero, Explicit };
  Kind kind = Kind::ScaledW0;
  double scale = 1.0;
  Vec values;  // interior-dof vector for Kind::Explicit

  static InitialCondition scaled_w0(double s) { return {Kind::ScaledW0, s, {}}; }
  static InitialCondition zero() { return {Kind::Zero, 0.0, {}}; }
};

/// One offline or online parameter sample: source, mu values, initial state.
struct ParameterSet {
  Source h;
  std::vector<double> mu_values;
  InitialCondition u0;

  void validate() const;
};

}  // namespace glrom
