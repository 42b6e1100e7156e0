#include "lodbs/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lodbs/gauss.hpp"

namespace lodbs {

namespace {

constexpr double kPi = 3.14159265358979323846;

double smooth_value(double epsilon, double s) {
  return 1.0 / (2.0 + std::cos(2.0 * kPi * s / epsilon));
}

int random_cell(const Coefficient& c, double s) {
  if (s < -1e-12 || s > c.domain_length + 1e-12)
    throw std::out_of_range("eval_coefficient: s outside the sampled domain");
  int k = static_cast<int>(std::floor(s / c.epsilon));
  k = std::clamp(k, 0, static_cast<int>(c.cell_values.size()) - 1);
  return k;
}

// Composite Gauss integration of s -> f(a(s)) for the smooth kind.
template <typename F>
double smooth_integral(const Coefficient& c, double s0, double s1, F f) {
  const int pieces =
      std::max(1, static_cast<int>(std::ceil((s1 - s0) / (c.epsilon / 10.0))));
  const double h = (s1 - s0) / pieces;
  double sum = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double mid = s0 + (p + 0.5) * h;
    for (int q = 0; q < 5; ++q)
      sum += gauss::kW5[q] * f(smooth_value(c.epsilon, mid + 0.5 * h * gauss::kX5[q]));
  }
  return sum * 0.5 * h;
}

// Exact piecewise integration of f(value_k) over [s0, s1] for the random kind.
template <typename F>
double random_integral(const Coefficient& c, double s0, double s1, F f) {
  double sum = 0.0;
  int k = random_cell(c, s0);
  double left = s0;
  while (left < s1 - 1e-15) {
    const double right = std::min(s1, (k + 1) * c.epsilon);
    sum += f(c.cell_values[static_cast<std::size_t>(k)]) * (right - left);
    left = right;
    ++k;
    if (k >= static_cast<int>(c.cell_values.size())) break;
  }
  return sum;
}

template <typename F>
double integral(const Coefficient& c, double s0, double s1, F f) {
  if (s1 < s0) throw std::invalid_argument("coefficient integral: s1 < s0");
  if (s1 == s0) return 0.0;
  switch (c.kind) {
    case Coefficient::Kind::constant:
      return f(c.value) * (s1 - s0);
    case Coefficient::Kind::smooth:
      return smooth_integral(c, s0, s1, f);
    case Coefficient::Kind::random:
      return random_integral(c, s0, s1, f);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Coefficient make_constant_coefficient(double value) {
  if (value <= 0.0)
    throw std::invalid_argument("make_constant_coefficient: value must be positive");
  Coefficient c;
  c.kind = Coefficient::Kind::constant;
  c.value = value;
  c.lower = value;
  c.upper = value;
  return c;
}

Coefficient make_smooth_coefficient(double epsilon) {
  if (epsilon <= 0.0)
    throw std::invalid_argument("make_smooth_coefficient: epsilon must be positive");
  Coefficient c;
  c.kind = Coefficient::Kind::smooth;
  c.epsilon = epsilon;
  c.lower = 1.0 / 3.0;
  c.upper = 1.0;
  return c;
}

Coefficient make_random_coefficient(double epsilon, std::uint64_t seed,
                                    double total_length) {
  if (epsilon <= 0.0)
    throw std::invalid_argument("make_random_coefficient: epsilon must be positive");
  const double cells_real = total_length / epsilon;
  const int cells = static_cast<int>(std::llround(cells_real));
  if (cells < 1 || std::abs(cells_real - cells) > 1e-12)
    throw std::invalid_argument(
        "make_random_coefficient: total_length must be an integer multiple of epsilon");

  Coefficient c;
  c.kind = Coefficient::Kind::random;
  c.epsilon = epsilon;
  c.seed = seed;
  c.domain_length = total_length;
  c.cell_values.resize(static_cast<std::size_t>(cells));
  std::uint64_t state = seed;
  for (auto& v : c.cell_values) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    v = 0.1 + 0.9 * u;
  }
  c.lower = *std::min_element(c.cell_values.begin(), c.cell_values.end());
  c.upper = *std::max_element(c.cell_values.begin(), c.cell_values.end());
  return c;
}

double eval_coefficient(const Coefficient& c, double s_pos) {
  switch (c.kind) {
    case Coefficient::Kind::constant:
      return c.value;
    case Coefficient::Kind::smooth:
      return smooth_value(c.epsilon, s_pos);
    case Coefficient::Kind::random:
      return c.cell_values[static_cast<std::size_t>(random_cell(c, s_pos))];
  }
  throw std::logic_error("unreachable");
}

double integrate_coefficient(const Coefficient& c, double s0, double s1) {
  return integral(c, s0, s1, [](double a) { return a; });
}

double integrate_coefficient_inverse(const Coefficient& c, double s0, double s1) {
  return integral(c, s0, s1, [](double a) { return 1.0 / a; });
}

Eigen::VectorXd harmonic_element_averages(const Coefficient& c,
                                          const BoundaryMesh& mesh) {
  Eigen::VectorXd avg(mesh.num_segments());
  for (int t = 0; t < mesh.num_segments(); ++t) {
    const double left = mesh.segment_left(t);
    const double len = mesh.segment_length(t);
    avg[t] = len / integrate_coefficient_inverse(c, left, left + len);
  }
  return avg;
}

}  // namespace lodbs
