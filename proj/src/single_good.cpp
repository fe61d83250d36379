#include "screenlab/single_good.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "screenlab/errors.hpp"
#include "screenlab/gauss.hpp"
#include "screenlab/optimize.hpp"

namespace screenlab::single_good {

namespace {

void check_belief(const ScalarBelief& b) {
  if (!std::isfinite(b.mean) || !(b.sd > 0) || !std::isfinite(b.sd))
    throw DomainError("ScalarBelief: need finite mean and sd > 0");
}

}  // namespace

double gamma_constant() {
  // d/dx [x phi(x)] = phi(x)(1 - x^2) vanishes at x = 1.
  return gauss::std_normal_pdf(1.0);
}

double revenue_at(const ScalarBelief& belief, double price) {
  check_belief(belief);
  return price * gauss::std_normal_sf((price - belief.mean) / belief.sd);
}

PriceResult optimal_price(const ScalarBelief& belief) {
  check_belief(belief);
  // The revenue p (1 - Phi((p - mu)/sd)) is log-concave in p > 0, so the
  // maximizer is the unique root of the first-order condition
  //   R(x) = mu/sd + x,   x = (p - mu)/sd,   R the Mills ratio,
  // whose left side minus right side is strictly decreasing in x.
  const double k = belief.mean / belief.sd;
  auto h = [k](double x) { return gauss::mills_ratio(x) - x - k; };
  double lo = std::max(-k, -37.0);
  double hi = std::max(1.0, 1.0 - k);
  if (h(lo) <= 0) lo = -k;
  double x = opt::brent_root(h, lo, hi, 1e-15 * std::max(1.0, std::abs(lo)));
  double price = belief.mean + x * belief.sd;
  return {price, price * gauss::std_normal_sf(x)};
}

double rule_of_thumb_price(double theta_star, double sigma, double n) {
  if (!(sigma > 0)) throw DomainError("rule_of_thumb_price: sigma must be positive");
  if (!(n >= 2)) throw DomainError("rule_of_thumb_price: n must be at least 2");
  return theta_star - std::sqrt(std::log(n)) * sigma / std::sqrt(n);
}

MarginReport margin_decomposition(double theta_star, double price, const ScalarBelief& belief) {
  check_belief(belief);
  double f = gauss::std_normal_cdf((price - belief.mean) / belief.sd);
  MarginReport r;
  r.price = price;
  r.revenue = price * (1.0 - f);
  r.intensive = theta_star - price;
  r.extensive = theta_star * f;
  r.cross = (theta_star - price) * f;
  r.gap = r.intensive + r.extensive - r.cross;
  return r;
}

RevenueBounds revenue_bounds(double mu, double sigma, double n) {
  if (!(mu >= 0)) throw DomainError("revenue_bounds: mu must be nonnegative");
  if (!(sigma > 0)) throw DomainError("revenue_bounds: sigma must be positive");
  if (!(n >= 2)) throw DomainError("revenue_bounds: n must be at least 2");
  const double g = gamma_constant();
  const double rn = std::sqrt(n), ln = std::log(n);
  double inner = std::abs(std::log(mu / (sigma * std::sqrt(2 * M_PI) * (1 + g))));
  double up1 = mu - sigma * std::sqrt(ln / n) + sigma / rn * std::sqrt(2 * inner);
  double up2 = 0.5 * (mu + sigma / rn);
  double lower = mu - sigma * std::sqrt(ln / n) - mu / std::sqrt(2 * M_PI * n * ln);
  return {lower, std::max(up1, up2)};
}

double revenue_upper_bound_nonpositive(double sigma, double n) {
  if (!(sigma > 0) || !(n >= 1)) throw DomainError("revenue_upper_bound_nonpositive: bad input");
  return std::sqrt(2 * M_PI / n) * sigma;
}

}  // namespace screenlab::single_good
