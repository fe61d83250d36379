#pragma once

#include <memory>

namespace screenlab::single_good {

struct ScalarBelief {
  double mean;
  double sd;
};

struct PriceResult {
  double price;
  double revenue;
};

struct MarginReport {
  double price;
  double revenue;
  double intensive;  // theta* - p
  double extensive;  // theta* F(p)
  double cross;      // (theta* - p) F(p)
  double gap;
};

struct RevenueBounds {
  double lower;
  double upper;
};

// sup_x x phi(x), attained at x = 1.
double gamma_constant();

double revenue_at(const ScalarBelief& belief, double price);
PriceResult optimal_price(const ScalarBelief& belief);
double rule_of_thumb_price(double theta_star, double sigma, double n);
MarginReport margin_decomposition(double theta_star, double price, const ScalarBelief& belief);

// Explicit sandwich around R(mu, sigma^2/n) for mu >= 0, n >= 2.
RevenueBounds revenue_bounds(double mu, double sigma, double n);
// Upper bound sqrt(2 pi / n) sigma valid for mu <= 0.
double revenue_upper_bound_nonpositive(double sigma, double n);

// Noise law z with F(-z) = exp(-alpha_minus z^beta_minus + o(z^beta_minus)).
class TailFamily {
 public:
  virtual ~TailFamily() = default;
  virtual double log_cdf(double z) const = 0;  // log F(z)
  virtual double log_sf(double z) const = 0;   // log(1 - F(z))
  virtual double log_pdf(double z) const = 0;
  virtual double alpha_minus() const = 0;
  virtual double beta_minus() const = 0;
  virtual double alpha_plus() const = 0;
  virtual double beta_plus() const = 0;
  double cdf(double z) const;
  double pdf(double z) const;
};

// z ~ N(0, sigma^2)
std::shared_ptr<const TailFamily> gaussian_tail(double sigma);
// F(-z) = exp(-z / b) / 2 for z >= 0
std::shared_ptr<const TailFamily> laplace_tail(double b);

struct TailPriceResult {
  double price;
  double revenue;
  double gamma;  // (theta* - p) sqrt(n), the normalized discount
  MarginReport margins;
};

// Maximizes p (1 - F((p - theta*) sqrt(n))).
TailPriceResult tail_optimal_price(const TailFamily& family, double theta_star, double n);
// F(-gamma) / (gamma f(-gamma)), computed in log space.
double elasticity_ratio(const TailFamily& family, double gamma);

}  // namespace screenlab::single_good
