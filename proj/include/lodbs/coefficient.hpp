#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "lodbs/mesh.hpp"

namespace lodbs {

/// Scalar diffusion coefficient a(s) on the boundary curve, parameterized by
/// arclength. Three kinds:
///  - constant:  a(s) = value
///  - smooth:    a(s) = 1 / (2 + cos(2 pi s / epsilon))
///  - random:    piecewise constant on cells [k eps, (k+1) eps), values drawn
///               uniformly from [0.1, 1] by a seeded splitmix64 stream
struct Coefficient {
  enum class Kind { constant, smooth, random };

  Kind kind = Kind::constant;
  double epsilon = 0.0;
  /// Ellipticity bounds: lower <= a(s) <= upper everywhere. For the random
  /// kind these are the exact min/max over the drawn cell values.
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;                ///< constant kind
  std::vector<double> cell_values;   ///< random kind
  double domain_length = 0.0;        ///< random kind: length of the cell table
  std::uint64_t seed = 0;
};

Coefficient make_constant_coefficient(double value);
Coefficient make_smooth_coefficient(double epsilon);

/// Random piecewise-constant field covering [0, total_length]. total_length
/// must be an integer multiple of epsilon (checked to 1e-12). The same
/// (epsilon, seed, total_length) triple reproduces the same field.
Coefficient make_random_coefficient(double epsilon, std::uint64_t seed,
                                    double total_length);

/// Point value a(s). Piecewise-constant fields are right-continuous at cell
/// boundaries; for the random kind s must lie in [0, domain_length].
double eval_coefficient(const Coefficient& c, double s_pos);

/// Integral of a over [s0, s1], exact for constant and piecewise-constant
/// fields; the smooth kind uses composite 5-point Gauss on sub-intervals of
/// length at most epsilon/10 (better than ten digits of relative accuracy).
double integrate_coefficient(const Coefficient& c, double s0, double s1);

/// Integral of 1/a over [s0, s1], same quadrature policy.
double integrate_coefficient_inverse(const Coefficient& c, double s0, double s1);

/// Per-element harmonic averages (|T|^-1 int_T a^-1)^-1.
Eigen::VectorXd harmonic_element_averages(const Coefficient& c,
                                          const BoundaryMesh& mesh);

/// splitmix64 step: advances the state and returns the next 64-bit output.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace lodbs
