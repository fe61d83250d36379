#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "screenlab/parallel.hpp"

namespace screenlab::mech {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bundles are bitmasks over goods; bundle 0 is the empty bundle.
struct MultiGoodEnv {
  Vec theta_star;
  Mat inv_fisher;
  double n = 1;
  std::optional<std::vector<double>> cost;  // indexed by bundle mask

  int goods() const { return static_cast<int>(theta_star.size()); }
  int bundles() const { return 1 << goods(); }
  Mat belief_cov() const { return inv_fisher / n; }
  void validate() const;
};

struct PriceMenu {
  std::vector<double> prices;  // indexed by bundle mask, prices[0] = 0
};

struct RevenueBreakdown {
  double revenue = 0;
  double first_best = 0;
  double gap = 0;
  double scaled_gap = 0;  // gap sqrt(n / ln n); NaN when n = 1
};

RevenueBreakdown make_breakdown(double revenue, double first_best, double n);

struct QuadratureInfo {
  int order = 0;
  double doubled_diff = 0;
};

double first_best(const MultiGoodEnv& env, QuadratureInfo* info = nullptr);

struct BundlingResult {
  double price;
  RevenueBreakdown breakdown;
};
BundlingResult bundling_revenue(const MultiGoodEnv& env);

struct SeparateResult {
  std::vector<double> prices;
  RevenueBreakdown breakdown;
};
SeparateResult separate_revenue(const MultiGoodEnv& env);

// Expected revenue of a full menu under the Gaussian belief.
double menu_revenue(const MultiGoodEnv& env, const PriceMenu& menu);

struct MixedOptions {
  int restarts = 6;
  int max_evals = 3000;
};

struct MixedResult {
  PriceMenu menu;
  RevenueBreakdown breakdown;
  bool converged;
};
MixedResult mixed_bundling_revenue(const MultiGoodEnv& env, const MixedOptions& opts = {});

struct SingleBundleResult {
  unsigned bundle;
  double price;
  double profit;
  RevenueBreakdown breakdown;
};
SingleBundleResult single_bundle_revenue(const MultiGoodEnv& env);

struct SegmentReport {
  Vec z;  // standardized node
  double weight;
  double value;
  double seed_value;
  double bundling_price;
  double bundling_value;
  bool converged;
};

struct RelaxedOptions {
  int panels = 64;          // composite Gauss-Legendre panels per axis
  int panel_order = 8;
  double half_width = 8.0;  // standardized z range
  int hermite_order = 48;   // per axis, three goods only
  int restarts = 5;
  Execution exec = Execution::parallel;
};

struct RelaxedResult {
  double value;
  double bundling_average;
  double mixed_revenue;
  std::vector<SegmentReport> segments;
  int nonconverged;
};

RelaxedResult relaxed_upper_bound(const MultiGoodEnv& env, const PriceMenu& mixed_menu,
                                  double mixed_revenue, const RelaxedOptions& opts = {});
RelaxedResult relaxed_upper_bound(const MultiGoodEnv& env, const RelaxedOptions& opts = {});

}  // namespace screenlab::mech
