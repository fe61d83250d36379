#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "screenlab/mechanisms.hpp"
#include "screenlab/parallel.hpp"
#include "screenlab/signal_models.hpp"
#include "screenlab/single_good.hpp"
#include "screenlab/table.hpp"

namespace screenlab::exp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Trend helpers.
bool strictly_decreasing(const std::vector<double>& v);
bool strictly_increasing(const std::vector<double>& v);
// Number of consecutive strict decreases ending at the last entry.
int decreasing_tail_steps(const std::vector<double>& v);
// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
std::vector<double> decades(int lo_exp, int hi_exp);

// ---------------------------------------------------------------------------
// Convergence-curve environment: theta* = (0.3, 0.3), J = [[1, rho], [rho, 1]].
mech::MultiGoodEnv figure1_env(double rho, double n);
std::vector<double> figure1_default_grid();

struct ConvergenceCurve {
  double rho;
  std::vector<double> n_grid;
  Table table;  // one row per n
};

struct Figure1Options {
  mech::RelaxedOptions relaxed;
  mech::MixedOptions mixed;
  Execution exec = Execution::parallel;
};

// Columns: n, R_bd, R_sep, R_mix, R_relaxed, R_fb, gap_*, scaled_gap_*,
// p_bd, mix_converged, relaxed_nonconverged, chain_ok, solver_error.
std::vector<ConvergenceCurve> figure1_curves(const std::vector<double>& rho_list,
                                             const std::vector<double>& n_grid,
                                             const Figure1Options& opts = {});

// Slack of the chain R_sep, R_bd <= R_mix <= R_relaxed <= R_fb (min over links).
double chain_slack(const Table& t, std::size_t row);

// ---------------------------------------------------------------------------
struct RateOptions {
  bool include_mixed = true;
  Execution exec = Execution::parallel;
};

// gap sqrt(n / ln n) / lambda for lambda in {lambda^G, sum_g lambda^g}.
Table rate_scan(const Vec& theta_star, const Mat& inv_fisher, const std::vector<double>& n_list,
                const RateOptions& opts = {});

// Single-good closed form: (theta* - R*_n) sqrt(n / ln n) / sigma.
Table single_good_rate_scan(double theta_star, double sigma, const std::vector<double>& n_list);

// ---------------------------------------------------------------------------
// Per n: optimal price and its margins, plus theta* F_n(p_n) / sqrt(ln n / n)
// for the underpricing rules p_n = theta* - delta sqrt(ln n) sigma / sqrt(n).
Table margin_scan(double theta_star, double sigma, const std::vector<double>& n_list,
                  const std::vector<double>& deltas = {0.5, 0.9, 0.99, 1.0});

// ---------------------------------------------------------------------------
struct Prior {
  enum class Kind { point, uniform, beta };
  Kind kind = Kind::point;
  Vec point;            // point mass
  signals::Box box;     // support for uniform / beta, and the estimation box
  double a = 2, b = 2;  // product-beta shape on the box

  Vec draw(std::uint64_t seed) const;
  void validate(int dim) const;
};

struct MonteCarloConfig {
  signals::SignalModel model = signals::LogisticPurchase{2.0, Vec::Constant(2, 0.5)};
  Prior prior;
  std::vector<int> n_list;
  int replications = 1;
  std::uint64_t seed = 0;
  Execution exec = Execution::parallel;

  void validate() const;
};

// Columns: n, reps, sale_freq, sale_se, revenue, revenue_se, value, gap,
// gap_se, scaled_gap, scaled_gap_se, lambda_g, mle_failures.
Table mle_pricing_experiment(const MonteCarloConfig& config);

// Plug-in price sum(theta_hat) - sqrt(ln n / n) lambda from an estimate and an empirical Fisher matrix.
double mle_price(const Vec& theta_hat, const Mat& fisher_matrix, double n);

// ---------------------------------------------------------------------------
// Columns: n, price, revenue, gamma, gap, rate, ratio, ext_int, elasticity.
Table tail_rate_scan(const single_good::TailFamily& family, double theta_star,
                     const std::vector<double>& n_list);

}  // namespace screenlab::exp
