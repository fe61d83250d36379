#include <cmath>
#include <limits>

#include "screenlab/errors.hpp"
#include "screenlab/gauss.hpp"
#include "screenlab/optimize.hpp"
#include "screenlab/single_good.hpp"

namespace screenlab::single_good {

namespace {

class GaussianTail final : public TailFamily {
 public:
  explicit GaussianTail(double sigma) : s_(sigma) {}
  double log_cdf(double z) const override { return gauss::log_std_normal_cdf(z / s_); }
  double log_sf(double z) const override { return gauss::log_std_normal_cdf(-z / s_); }
  double log_pdf(double z) const override {
    return -0.5 * (z / s_) * (z / s_) - std::log(s_ * std::sqrt(2 * M_PI));
  }
  double alpha_minus() const override { return 0.5 / (s_ * s_); }
  double beta_minus() const override { return 2.0; }
  double alpha_plus() const override { return 0.5 / (s_ * s_); }
  double beta_plus() const override { return 2.0; }

 private:
  double s_;
};

class LaplaceTail final : public TailFamily {
 public:
  explicit LaplaceTail(double b) : b_(b) {}
  double log_cdf(double z) const override {
    return z < 0 ? z / b_ - M_LN2 : std::log1p(-0.5 * std::exp(-z / b_));
  }
  double log_sf(double z) const override { return log_cdf(-z); }
  double log_pdf(double z) const override { return -std::abs(z) / b_ - std::log(2 * b_); }
  double alpha_minus() const override { return 1.0 / b_; }
  double beta_minus() const override { return 1.0; }
  double alpha_plus() const override { return 1.0 / b_; }
  double beta_plus() const override { return 1.0; }

 private:
  double b_;
};

}  // namespace

double TailFamily::cdf(double z) const { return std::exp(log_cdf(z)); }
double TailFamily::pdf(double z) const { return std::exp(log_pdf(z)); }

std::shared_ptr<const TailFamily> gaussian_tail(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw DomainError("gaussian_tail: sigma must be positive");
  return std::make_shared<GaussianTail>(sigma);
}

std::shared_ptr<const TailFamily> laplace_tail(double b) {
  if (!(b > 0) || !std::isfinite(b)) throw DomainError("laplace_tail: scale must be positive");
  return std::make_shared<LaplaceTail>(b);
}

TailPriceResult tail_optimal_price(const TailFamily& family, double theta_star, double n) {
  if (!(theta_star > 0)) throw DomainError("tail_optimal_price: theta* must be positive");
  if (!(n >= 1)) throw DomainError("tail_optimal_price: n must be at least 1");
  const double rn = std::sqrt(n);
  // u = (p - theta*) sqrt(n); work with log revenue on u > -theta* sqrt(n).
  auto log_rev = [&](double u) {
    double p = theta_star + u / rn;
    if (!(p > 0)) return -std::numeric_limits<double>::infinity();
    return std::log(p) + family.log_sf(u);
  };
  // Below -L the buyer almost surely buys; above U almost surely not.
  double L = 1.0, U = 1.0;
  const double floor_lo = -(std::log(n) + 60.0);
  while (family.log_cdf(-L) > floor_lo) {
    L *= 2;
    if (L > 1e8) throw NumericError("tail_optimal_price: search bracket exhausted");
  }
  while (family.log_sf(U) > -60.0) {
    U *= 2;
    if (U > 1e8) throw NumericError("tail_optimal_price: search bracket exhausted");
  }
  const double lo = std::max(-theta_star * rn, -L);
  const int grid = 4001;
  const double h = (U - lo) / (grid - 1);
  int best = 0;
  double fbest = log_rev(lo);
  for (int i = 1; i < grid; ++i) {
    double v = log_rev(lo + i * h);
    if (v > fbest) {
      fbest = v;
      best = i;
    }
  }
  if (!std::isfinite(fbest)) throw NumericError("tail_optimal_price: no positive revenue found");
  double a = lo + std::max(best - 1, 0) * h;
  double b = lo + std::min(best + 1, grid - 1) * h;
  // Stationarity: S(u)/f(u) = p sqrt(n).
  auto foc = [&](double u) {
    double p = theta_star + u / rn;
    if (!(p > 0)) return std::numeric_limits<double>::infinity();
    return family.log_sf(u) - family.log_pdf(u) - std::log(p * rn);
  };
  double u;
  double fa = foc(a), fb = foc(b);
  if (fa > 0 && fb < 0) {
    u = opt::brent_root(foc, a, b, 1e-14 * std::max(1.0, std::abs(a)));
  } else {
    u = opt::golden_max(log_rev, a, b, 1e-12).x;
  }
  if (log_rev(u) < fbest) u = lo + best * h;

  TailPriceResult r;
  r.price = theta_star + u / rn;
  r.revenue = r.price * std::exp(family.log_sf(u));
  r.gamma = -u;
  double F = family.cdf(u);
  r.margins.price = r.price;
  r.margins.revenue = r.revenue;
  r.margins.intensive = theta_star - r.price;
  r.margins.extensive = theta_star * F;
  r.margins.cross = (theta_star - r.price) * F;
  r.margins.gap = r.margins.intensive + r.margins.extensive - r.margins.cross;
  return r;
}

double elasticity_ratio(const TailFamily& family, double gamma) {
  if (!(gamma > 0)) throw DomainError("elasticity_ratio: gamma must be positive");
  return std::exp(family.log_cdf(-gamma) - family.log_pdf(-gamma)) / gamma;
}

}  // namespace screenlab::single_good
