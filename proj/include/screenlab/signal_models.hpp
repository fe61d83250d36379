#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>

namespace screenlab::signals {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// x ~ N(theta, cov)
struct GaussianLocation {
  Mat cov;
};

// x_g in {0,1}, P(x_g = 1) = logistic(beta (theta_g - p_g)), independent goods.
struct LogisticPurchase {
  double beta;
  Vec ref_prices;
};

class SignalModel {
 public:
  SignalModel(GaussianLocation m);
  SignalModel(LogisticPurchase m);

  int dim() const { return dim_; }
  bool is_gaussian() const { return std::holds_alternative<GaussianLocation>(v_); }
  const GaussianLocation* gaussian() const { return std::get_if<GaussianLocation>(&v_); }
  const LogisticPurchase* logistic() const { return std::get_if<LogisticPurchase>(&v_); }
  // Gaussian variant only.
  const Mat& precision() const { return cov_inv_; }
  double log_norm() const { return log_norm_; }

 private:
  std::variant<GaussianLocation, LogisticPurchase> v_;
  int dim_;
  Mat cov_inv_;
  double log_norm_ = 0.0;
};

struct Box {
  Vec lo;
  Vec hi;
  bool contains(const Vec& x) const;
  Vec project(const Vec& x) const;
};

// Widens each side by `frac` of the width; a positive lower edge is kept
// positive (never below half of its original value).
Box inflate(const Box& box, double frac = 0.2);

struct SignalDataset {
  Mat records;  // n x dim
  int n() const { return static_cast<int>(records.rows()); }
};

enum class FisherKind { exact, empirical };

struct FisherMatrix {
  Mat matrix;
  FisherKind kind;
};

double log_density(const SignalModel& model, const Vec& x, const Vec& theta);
FisherMatrix fisher(const SignalModel& model, const Vec& theta);
FisherMatrix empirical_fisher(const SignalModel& model, const SignalDataset& data,
                              const Vec& theta);
SignalDataset sample(const SignalModel& model, const Vec& theta, int n, std::uint64_t seed);

double total_log_likelihood(const SignalModel& model, const SignalDataset& data,
                            const Vec& theta);

struct EstimationError : std::runtime_error {
  EstimationError(const std::string& what, Vec best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  Vec best_iterate;
};

Vec mle(const SignalModel& model, const SignalDataset& data, const Box& box);

void write_csv(std::ostream& os, const SignalDataset& data);
SignalDataset read_csv(std::istream& is);

}  // namespace screenlab::signals
