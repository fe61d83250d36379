#pragma once

#include <functional>
#include <vector>

namespace screenlab::opt {

struct ScalarMax {
  double x;
  double fx;
};

// Maximizes f on [a, b]; assumes unimodality inside the bracket.
ScalarMax golden_max(const std::function<double(double)>& f, double a, double b,
                     double xtol, int max_iter = 200);

// Grid scan then golden refinement around the best grid point.
ScalarMax grid_golden_max(const std::function<double(double)>& f, double a, double b,
                          int grid, double xtol);

// Root of f on [a, b] with f(a), f(b) of opposite sign (Brent).
double brent_root(const std::function<double(double)>& f, double a, double b, double xtol,
                  int max_iter = 300);

struct NelderMeadOptions {
  int max_evals = 4000;
  double ftol = 1e-14;
  double xtol = 1e-11;
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx;
  int evals;
  bool converged;
};

// Minimizes f starting from a simplex around x0 with per-coordinate steps.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& opts = {});

}  // namespace screenlab::opt
