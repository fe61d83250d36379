#pragma once

#include <Eigen/Dense>

namespace screenlab::gauss {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

double std_normal_pdf(double z);
double std_normal_cdf(double z);
// 1 - Phi(z), accurate in the upper tail.
double std_normal_sf(double z);
double log_std_normal_cdf(double z);
// sf(x) / pdf(x); accurate in both tails, overflows to inf below about -37.
double mills_ratio(double x);
double std_normal_quantile(double u);

double lambda_coeff(const Vec& indicator, const Mat& inv_fisher);
// Indicator of the goods in a bitmask bundle.
Vec bundle_indicator(unsigned mask, int goods);

void require_spd(const Mat& m, const char* what);

class GaussianBelief {
 public:
  GaussianBelief(Vec mean, Mat cov);
  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }
  int dim() const { return static_cast<int>(mean_.size()); }

 private:
  Vec mean_;
  Mat cov_;
};

// Slices a Gaussian law along the direction cov * 1: z = A theta is
// independent of 1 . theta, and theta | z lives on a line.
struct SegmentDecomposition {
  Mat a_matrix;   // (m-1) x m, orthonormal rows
  Mat b_matrix;   // m x (m-1)
  Mat cond_cov;   // m x m
  Vec direction;  // cov * 1
  Vec z_mean;
  Mat z_cov;

  Vec conditional_mean(const Vec& y, const Vec& z) const;
};

SegmentDecomposition make_segments(const Mat& cov);
SegmentDecomposition make_segments(const GaussianBelief& belief);

}  // namespace screenlab::gauss
