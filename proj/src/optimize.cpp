#include "screenlab/optimize.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "screenlab/errors.hpp"

namespace screenlab::opt {

ScalarMax golden_max(const std::function<double(double)>& f, double a, double b, double xtol,
                     int max_iter) {
  if (!(b >= a)) throw DomainError("golden_max: empty bracket");
  if (b == a) return {a, f(a)};
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto neg = [&](double x) { return -f(x); };
  // Brent's parabolic/golden hybrid; bits chosen from the requested tolerance.
  int bits = std::numeric_limits<double>::digits / 2;
  if (xtol > 0) {
    double rel = xtol / std::max(std::abs(a), std::abs(b));
    if (rel > 0) bits = std::clamp(static_cast<int>(-std::log2(rel)), 8, bits);
  }
  auto r = boost::math::tools::brent_find_minima(neg, a, b, bits, iters);
  ScalarMax best{r.first, -r.second};
  for (double e : {a, b}) {
    double fe = f(e);
    if (fe > best.fx) best = {e, fe};
  }
  return best;
}

ScalarMax grid_golden_max(const std::function<double(double)>& f, double a, double b, int grid,
                          double xtol) {
  if (grid < 2) throw DomainError("grid_golden_max: grid too small");
  const double h = (b - a) / (grid - 1);
  int best = 0;
  double fbest = f(a);
  for (int i = 1; i < grid; ++i) {
    double v = f(a + i * h);
    if (v > fbest) {
      fbest = v;
      best = i;
    }
  }
  double lo = a + std::max(best - 1, 0) * h;
  double hi = a + std::min(best + 1, grid - 1) * h;
  ScalarMax r = golden_max(f, lo, hi, xtol);
  if (fbest > r.fx) r = {a + best * h, fbest};
  return r;
}

double brent_root(const std::function<double(double)>& f, double a, double b, double xtol,
                  int max_iter) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) throw NumericError("brent_root: bracket does not change sign");
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto tol = [xtol](double lo, double hi) { return std::abs(hi - lo) <= xtol; };
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (r.first + r.second);
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  if (step.size() != n || n == 0) throw DomainError("nelder_mead: bad dimensions");
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);
  std::vector<std::size_t> order(n + 1);
  bool converged = false;
  while (evals < opts.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return vals[i] < vals[j]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = pts[order[i]];
      v2[i] = vals[order[i]];
    }
    pts.swap(p2);
    vals.swap(v2);

    double size = 0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(pts[i][k] - pts[0][k]));
    if (std::abs(vals[n] - vals[0]) <= opts.ftol * (1 + std::abs(vals[0])) && size <= opts.xtol) {
      converged = true;
      break;
    }

    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) c[k] += pts[i][k] / n;
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = c[k] + t * (pts[n][k] - c[k]);
      return x;
    };
    std::vector<double> xr = along(-1.0);
    double fr = eval(xr);
    if (fr < vals[0]) {
      std::vector<double> xe = along(-2.0);
      double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      bool outside = fr < vals[n];
      std::vector<double> xc = along(outside ? -0.5 : 0.5);
      double fc = eval(xc);
      if (fc < (outside ? fr : vals[n])) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }
  std::size_t best = std::min_element(vals.begin(), vals.end()) - vals.begin();
  return {pts[best], vals[best], evals, converged};
}

}  // namespace screenlab::opt
