#pragma once

#include <vector>

namespace screenlab::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Probabilists' Gauss-Hermite: weights sum to 1, E[f(Z)] for Z ~ N(0,1).
Rule gauss_hermite(int order);
// Gauss-Legendre on [-1, 1].
Rule gauss_legendre(int order);

// Composite Gauss-Legendre on [a, b]: the interval is cut at every point of
// `cuts` inside (a, b), then each piece into panels no wider than max_panel.
Rule composite_legendre(double a, double b, std::vector<double> cuts,
                        double max_panel, int order);

}  // namespace screenlab::quad
