#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace screenlab::onedim {

using Vec = Eigen::VectorXd;

// Scalar type law: either N(mean, sd^2) or finitely many weighted points.
class TypeDistribution {
 public:
  static TypeDistribution gaussian(double mean, double sd);
  static TypeDistribution discrete(std::vector<double> points, std::vector<double> weights);

  bool is_discrete() const { return discrete_; }
  double mean() const;
  double sd() const { return sd_; }
  double cdf(double x) const;  // P(tau <= x)
  // P(tau in the interval from a to b) with the given endpoint closedness.
  double mass(double a, double b, bool a_closed, bool b_closed) const;
  double lower() const;
  double upper() const;
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  bool discrete_ = false;
  double mean_ = 0, sd_ = 1;
  std::vector<double> points_, weights_;
};

// alpha(tau) = alpha0 + tau beta over allocations; null_index has 0, 0.
struct OneDimEnv {
  Vec alpha0;
  Vec beta;
  TypeDistribution dist = TypeDistribution::gaussian(0, 1);
  int null_index = 0;

  int size() const { return static_cast<int>(alpha0.size()); }
  void validate() const;
  double beta_min() const { return beta.minCoeff(); }
  double beta_max() const { return beta.maxCoeff(); }
};

// G(z) = max_l alpha0_l - z beta_l. Vertices sorted by increasing beta;
// vertex i is active on [z_i, z_{i-1}] with z_0 = +inf.
struct PiecewiseLinearEnvelope {
  std::vector<double> breakpoints_z;  // decreasing, size k
  std::vector<int> active_indices;    // size k + 1
  std::vector<double> alpha;          // alpha0 at active vertices
  std::vector<double> beta;           // beta at active vertices

  double g(double z) const;
};

PiecewiseLinearEnvelope dual_envelope(const OneDimEnv& env);
double h_value(const OneDimEnv& env, double x);
double h_value(const PiecewiseLinearEnvelope& envelope, double x);

struct Lottery {
  Vec probs;
};

struct BaseLottery {
  Lottery lottery;
  double value;
};

BaseLottery base_lottery(const OneDimEnv& env);

// Convex piecewise-linear indirect utility: V = slopes[j] tau + offsets[j]
// on piece j, pieces separated by nondecreasing cuts. A type sitting on a
// cut belongs to the right piece iff the right slope is positive.
struct StepUtility {
  std::vector<double> cuts;
  std::vector<double> slopes;
  std::vector<double> offsets;

  int pieces() const { return static_cast<int>(slopes.size()); }
  int piece_of(double tau) const;
  double value(double tau) const;
  // Probability of piece j under dist, respecting the boundary rule.
  double piece_mass(const TypeDistribution& dist, int j) const;

  // Offsets fixed by continuity and min over [lo, hi] of V equal to 0.
  static StepUtility anchored(std::vector<double> cuts, std::vector<double> slopes, double lo,
                              double hi);
};

double value_from_indirect_utility(const OneDimEnv& env, const StepUtility& v);

struct MenuItem {
  int allocation;  // index into the env, or -1 for the base lottery
  Vec probs;       // the allocation as a lottery
  double price;
};

struct SimpleMechanism {
  StepUtility utility;
  std::vector<MenuItem> items;  // one per piece
  double value = 0;
  bool converged = true;

  Vec allocation_at(double tau) const;
  double transfer_at(double tau) const;
};

// Menu that offers allocation l at prices[l] (non-finite = not offered);
// the null allocation is always available at price 0.
SimpleMechanism mechanism_from_menu(const OneDimEnv& env, const Vec& prices);

struct SimpleOptions {
  std::optional<Vec> seed_prices;
  int restarts = 5;
  std::uint64_t rng_seed = 1;
  int grid = 1200;          // DP discretization of a Gaussian type law
  double truncation = 8.0;  // its half-width in standard deviations
};

struct SimpleResult {
  SimpleMechanism mechanism;
  double value;
  double seed_value;  // NaN when no seed menu given
  bool converged;
};

SimpleResult optimal_simple_mechanism(const OneDimEnv& env, const SimpleOptions& opts = {});

struct LpOracleResult {
  double value;
  double max_ic_violation;  // over all ordered pairs and IR
  Eigen::MatrixXd q;        // grid x allocations
  Vec t;
  std::vector<double> points;  // sorted, merged grid
  int iterations;
};

LpOracleResult discrete_lp_oracle(const OneDimEnv& env, const std::vector<double>& points,
                                  const std::vector<double>& weights);

}  // namespace screenlab::onedim
