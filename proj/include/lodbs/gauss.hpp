#pragma once

namespace lodbs::gauss {

// Gauss-Legendre rules on [-1, 1].

constexpr double kX2[2] = {-0.5773502691896257, 0.5773502691896257};
constexpr double kW2[2] = {1.0, 1.0};

constexpr double kX3[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kW3[3] = {0.5555555555555556, 0.8888888888888888,
                           0.5555555555555556};

constexpr double kX5[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                           0.5384693101056831, 0.9061798459386640};
constexpr double kW5[5] = {0.2369268850561891, 0.4786286704993665,
                           0.5688888888888889, 0.4786286704993665,
                           0.2369268850561891};

}  // namespace lodbs::gauss
