#include "screenlab/mechanisms.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "screenlab/errors.hpp"
#include "screenlab/gauss.hpp"
#include "screenlab/optimize.hpp"
#include "screenlab/quadrature.hpp"
#include "screenlab/single_good.hpp"

namespace screenlab::mech {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfWidth = 10.0;  // standardized integration range

double bundle_mean(const MultiGoodEnv& env, unsigned mask) {
  return gauss::bundle_indicator(mask, env.goods()).dot(env.theta_star);
}

double bundle_sd(const MultiGoodEnv& env, unsigned mask) {
  Vec one = gauss::bundle_indicator(mask, env.goods());
  return std::sqrt(one.dot(env.belief_cov() * one));
}

bool has_cost(const MultiGoodEnv& env) {
  if (!env.cost) return false;
  return std::any_of(env.cost->begin(), env.cost->end(), [](double c) { return c != 0.0; });
}

// E[kernel] where the buyer picks argmax_B (1^B theta - off_B). The last
// good is integrated in closed form given the others. Earlier goods use
// composite Gauss-Legendre against the normal density, split where the
// integrand jumps: for the second-to-last good at every switch of the
// within-group argmax, for the first of three goods wherever two bundles
// differing only in that good tie.
//
// kernel(u_out, off_out, u_in, off_in, m, s): u_out is the best utility among
// bundles without the last good, u_in the best utility excluding the last
// good's value among bundles with it, m and s the conditional mean and sd of
// the last good's value.
template <class Kernel>
double choice_expectation(const MultiGoodEnv& env, const std::vector<double>& off, Kernel kernel,
                          int order, double panel) {
  const int d = env.goods(), nb = env.bundles();
  const Vec& mu = env.theta_star;
  Mat L = env.belief_cov().llt().matrixL();
  const unsigned last = 1u << (d - 1);
  const double s = L(d - 1, d - 1);

  auto best_of = [&](const std::vector<double>& u, bool with_last, double* off_best) {
    double best = -kInf;
    *off_best = 0;
    for (int b = 0; b < nb; ++b) {
      if (((b & last) != 0) != with_last || !std::isfinite(off[b])) continue;
      if (u[b] > best) {
        best = u[b];
        *off_best = off[b];
      }
    }
    return best;
  };

  if (d == 1) {
    std::vector<double> u{-off[0], -off[1]};
    double o0, o1;
    double u0 = best_of(u, false, &o0), u1 = best_of(u, true, &o1);
    return kernel(u0, o0, u1, o1, mu(0), s);
  }

  std::vector<double> outer_nodes{0.0}, outer_weights{1.0};
  if (d == 3) {
    std::vector<double> cuts;
    for (int a = 0; a < nb; a += 2) {
      if (std::isfinite(off[a]) && std::isfinite(off[a + 1]))
        cuts.push_back((off[a + 1] - off[a] - mu(0)) / L(0, 0));
    }
    const quad::Rule r = quad::composite_legendre(-kHalfWidth, kHalfWidth, cuts, panel, order);
    outer_nodes = r.nodes;
    outer_weights.clear();
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      outer_weights.push_back(r.weights[i] * gauss::std_normal_pdf(r.nodes[i]));
  }

  double total = 0;
  std::vector<double> c(nb), k(nb), u(nb);
  for (std::size_t oi = 0; oi < outer_nodes.size(); ++oi) {
    const double z0 = outer_nodes[oi];
    // With three goods theta_0 is fixed by z0; theta_{d-2} and the
    // conditional mean of the last good are affine in t = z_{d-2}.
    const int g2 = d - 2;
    double theta0 = d == 3 ? mu(0) + L(0, 0) * z0 : 0.0;
    double a2 = mu(g2), k2 = L(g2, g2);
    double am = mu(d - 1), km = L(d - 1, g2);
    if (d == 3) {
      a2 += L(g2, 0) * z0;
      am += L(d - 1, 0) * z0;
    }

    for (int b = 0; b < nb; ++b) {
      c[b] = -off[b];
      k[b] = 0;
      if (d == 3 && (b & 1)) c[b] += theta0;
      if (b & (1 << g2)) {
        c[b] += a2;
        k[b] += k2;
      }
    }
    std::vector<double> cuts;
    for (int a = 0; a < nb; ++a) {
      if (!std::isfinite(off[a])) continue;
      for (int b = a + 1; b < nb; ++b) {
        if (!std::isfinite(off[b]) || ((a & last) != 0) != ((b & last) != 0)) continue;
        if (k[a] != k[b]) cuts.push_back((c[a] - c[b]) / (k[b] - k[a]));
      }
    }
    const quad::Rule rule = quad::composite_legendre(-kHalfWidth, kHalfWidth, cuts, panel, order);
    double inner = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double t = rule.nodes[i];
      for (int b = 0; b < nb; ++b) u[b] = c[b] + k[b] * t;
      double o0, o1;
      double u0 = best_of(u, false, &o0), u1 = best_of(u, true, &o1);
      inner += rule.weights[i] * gauss::std_normal_pdf(t) * kernel(u0, o0, u1, o1, am + km * t, s);
    }
    total += outer_weights[oi] * inner;
  }
  return total;
}

double revenue_kernel(double u0, double p0, double u1, double p1, double m, double s) {
  if (!std::isfinite(u1)) return p0;
  if (!std::isfinite(u0)) return p1;
  // Buys from the group with the last good iff theta_last > u0 - u1.
  double x = (m + u1 - u0) / s;
  return p0 * gauss::std_normal_sf(x) + p1 * gauss::std_normal_cdf(x);
}

double surplus_kernel(double u0, double, double u1, double, double m, double s) {
  // E[max(u0, u1 + theta_last)]
  double a = (u1 + m - u0) / s;
  return u0 + s * (a * gauss::std_normal_cdf(a) + gauss::std_normal_pdf(a));
}

}  // namespace

void MultiGoodEnv::validate() const {
  const int d = goods();
  if (d < 1 || d > 3) throw DomainError("MultiGoodEnv: between 1 and 3 goods supported");
  if (!theta_star.allFinite()) throw DomainError("MultiGoodEnv: non-finite theta*");
  if (inv_fisher.rows() != d || inv_fisher.cols() != d)
    throw DomainError("MultiGoodEnv: inverse Fisher dimension mismatch");
  if (!(n >= 1) || !std::isfinite(n)) throw DomainError("MultiGoodEnv: n must be at least 1");
  gauss::require_spd(belief_cov(), "MultiGoodEnv");
  if (cost) {
    if (static_cast<int>(cost->size()) != bundles())
      throw DomainError("MultiGoodEnv: cost table needs one entry per bundle");
    if ((*cost)[0] != 0.0) throw DomainError("MultiGoodEnv: cost of the empty bundle must be 0");
    for (double c : *cost)
      if (!(c >= 0) || !std::isfinite(c)) throw DomainError("MultiGoodEnv: costs must be finite and >= 0");
  }
}

RevenueBreakdown make_breakdown(double revenue, double first_best, double n) {
  RevenueBreakdown r;
  r.revenue = revenue;
  r.first_best = first_best;
  r.gap = first_best - revenue;
  r.scaled_gap = n > 1 ? r.gap * std::sqrt(n / std::log(n)) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double first_best(const MultiGoodEnv& env, QuadratureInfo* info) {
  env.validate();
  if (!has_cost(env)) {
    if (info) *info = {0, 0.0};
    return env.theta_star.sum();
  }
  const int q = 8;
  auto eval = [&](int order) { return choice_expectation(env, *env.cost, surplus_kernel, order, 0.5); };
  double v1 = eval(q), v2 = eval(2 * q);
  double rel = std::abs(v2 - v1) / std::max(1e-12, std::abs(v2));
  if (rel > 1e-6) throw NumericError("first_best: quadrature orders disagree");
  if (info) *info = {2 * q, rel};
  return v2;
}

BundlingResult bundling_revenue(const MultiGoodEnv& env) {
  env.validate();
  if (has_cost(env)) throw DomainError("bundling_revenue: cost-free environment required");
  const unsigned g = static_cast<unsigned>(env.bundles() - 1);
  single_good::PriceResult r = single_good::optimal_price({bundle_mean(env, g), bundle_sd(env, g)});
  return {r.price, make_breakdown(r.revenue, env.theta_star.sum(), env.n)};
}

SeparateResult separate_revenue(const MultiGoodEnv& env) {
  env.validate();
  if (has_cost(env)) throw DomainError("separate_revenue: cost-free environment required");
  SeparateResult out;
  double total = 0;
  for (int g = 0; g < env.goods(); ++g) {
    unsigned mask = 1u << g;
    single_good::PriceResult r = single_good::optimal_price({bundle_mean(env, mask), bundle_sd(env, mask)});
    out.prices.push_back(r.price);
    total += r.revenue;
  }
  out.breakdown = make_breakdown(total, env.theta_star.sum(), env.n);
  return out;
}

double menu_revenue(const MultiGoodEnv& env, const PriceMenu& menu) {
  env.validate();
  if (static_cast<int>(menu.prices.size()) != env.bundles())
    throw DomainError("menu_revenue: one price per bundle required");
  if (menu.prices[0] != 0.0) throw DomainError("menu_revenue: the empty bundle must cost 0");
  return choice_expectation(env, menu.prices, revenue_kernel, 8, 0.5);
}

MixedResult mixed_bundling_revenue(const MultiGoodEnv& env, const MixedOptions& opts) {
  env.validate();
  if (has_cost(env)) throw DomainError("mixed_bundling_revenue: cost-free environment required");
  const int nb = env.bundles();
  const double fb = env.theta_star.sum();
  BundlingResult bd = bundling_revenue(env);
  SeparateResult sep = separate_revenue(env);

  std::vector<double> sd(nb), mean(nb);
  for (int b = 1; b < nb; ++b) {
    sd[b] = bundle_sd(env, b);
    mean[b] = bundle_mean(env, b);
  }
  // Exact embeddings of the two simple mechanisms.
  PriceMenu bd_menu{std::vector<double>(nb, kInf)};
  bd_menu.prices[0] = 0;
  bd_menu.prices[nb - 1] = bd.price;
  PriceMenu sep_menu{std::vector<double>(nb, 0.0)};
  for (int b = 1; b < nb; ++b)
    for (int g = 0; g < env.goods(); ++g)
      if (b & (1 << g)) sep_menu.prices[b] += sep.prices[g];

  MixedResult best{bd_menu, make_breakdown(bd.breakdown.revenue, fb, env.n), true};
  double sep_rev = menu_revenue(env, sep_menu);
  if (sep_rev > best.breakdown.revenue) best = {sep_menu, make_breakdown(sep_rev, fb, env.n), true};

  auto objective = [&](const std::vector<double>& x) {
    PriceMenu m{std::vector<double>(nb, 0.0)};
    for (int b = 1; b < nb; ++b) m.prices[b] = x[b - 1];
    return -menu_revenue(env, m);
  };
  std::vector<double> step(nb - 1);
  for (int b = 1; b < nb; ++b) step[b - 1] = 0.5 * sd[b];
  opt::NelderMeadOptions nmo;
  nmo.max_evals = opts.max_evals;
  nmo.xtol = 1e-9 * (1.0 + std::abs(fb));

  std::vector<std::vector<double>> starts;
  {
    // Bundling price on every bundle: weakly better than pure bundling.
    std::vector<double> x(nb - 1, bd.price);
    starts.push_back(x);
    std::vector<double> y(nb - 1);
    for (int b = 1; b < nb; ++b) y[b - 1] = sep_menu.prices[b];
    starts.push_back(y);
  }
  std::vector<double> best_x;
  bool best_conv = false;
  double best_val = -kInf;
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> x0;
    std::vector<double> st = step;
    if (r < static_cast<int>(starts.size())) {
      x0 = starts[r];
    } else {
      // Restart from the incumbent with a shrinking simplex.
      x0 = best_x;
      double scale = std::pow(0.5, r - static_cast<int>(starts.size()) + 1);
      for (double& s : st) s *= scale;
    }
    opt::NelderMeadResult nm = opt::nelder_mead(objective, x0, st, nmo);
    if (-nm.fx > best_val) {
      best_val = -nm.fx;
      best_x = nm.x;
      best_conv = nm.converged;
    }
  }
  if (best_val > best.breakdown.revenue) {
    PriceMenu m{std::vector<double>(nb, 0.0)};
    for (int b = 1; b < nb; ++b) m.prices[b] = best_x[b - 1];
    best = {m, make_breakdown(best_val, fb, env.n), best_conv};
  }
  return best;
}

SingleBundleResult single_bundle_revenue(const MultiGoodEnv& env) {
  env.validate();
  if (!env.cost) throw DomainError("single_bundle_revenue: cost table required");
  const int nb = env.bundles();
  std::vector<unsigned> order;
  for (int b = 1; b < nb; ++b) order.push_back(b);
  std::stable_sort(order.begin(), order.end(), [](unsigned a, unsigned b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  SingleBundleResult best{0, 0.0, -kInf, {}};
  for (unsigned b : order) {
    double c = (*env.cost)[b];
    // Profit (p - c) P(sale) is the posted-price problem for the margin p - c.
    single_good::PriceResult r = single_good::optimal_price({bundle_mean(env, b) - c, bundle_sd(env, b)});
    if (r.revenue > best.profit) best = {b, r.price + c, r.revenue, {}};
  }
  best.breakdown = make_breakdown(best.profit, first_best(env), env.n);
  return best;
}

}  // namespace screenlab::mech
