#include "screenlab/gauss.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "screenlab/errors.hpp"

namespace screenlab::gauss {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) throw DomainError(std::string(what) + ": non-finite input");
}

// Continued fraction for the Mills ratio, evaluated by modified Lentz.
double mills_cf(double x) {
  const double tiny = 1e-300;
  double f = x;
  double c = x, d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = x + k * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + k / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace

double std_normal_pdf(double z) {
  require_finite(z, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double std_normal_cdf(double z) {
  require_finite(z, "std_normal_cdf");
  return 0.5 * std::erfc(-z * M_SQRT1_2);
}

double std_normal_sf(double z) {
  require_finite(z, "std_normal_sf");
  return 0.5 * std::erfc(z * M_SQRT1_2);
}

double mills_ratio(double x) {
  require_finite(x, "mills_ratio");
  if (x > 5.0) return mills_cf(x);
  if (x < -37.0) return std::numeric_limits<double>::infinity();
  return std_normal_sf(x) / std_normal_pdf(x);
}

double log_std_normal_cdf(double z) {
  require_finite(z, "log_std_normal_cdf");
  if (z > 0) return std::log1p(-std_normal_sf(z));
  if (z > -5.0) return std::log(std_normal_cdf(z));
  // Phi(z) = pdf(z) * R(-z)
  return -0.5 * z * z - kLogSqrt2Pi + std::log(mills_cf(-z));
}

double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("std_normal_quantile: u must lie in (0, 1)");
  // Acklam's rational approximation, then Halley steps on the exact cdf.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (u < plow) {
    double q = std::sqrt(-2 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (u <= 1 - plow) {
    double q = u - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  for (int it = 0; it < 2; ++it) {
    double e = (x < 0) ? std_normal_cdf(x) - u : (1.0 - u) - std_normal_sf(x);
    double step = e / std_normal_pdf(x);
    x -= step / (1 + 0.5 * x * step);
  }
  return x;
}

void require_spd(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DomainError(std::string(what) + ": matrix must be square and nonempty");
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
  double scale = m.cwiseAbs().maxCoeff();
  if (!(m - m.transpose()).isZero(1e-12 * std::max(scale, 1e-300)))
    throw DomainError(std::string(what) + ": matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  double trace = m.trace();
  if (!(trace > 0) || es.eigenvalues()(0) <= 1e-12 * trace)
    throw DomainError(std::string(what) + ": matrix not positive definite");
}

double lambda_coeff(const Vec& indicator, const Mat& inv_fisher) {
  require_spd(inv_fisher, "lambda_coeff");
  if (indicator.size() != inv_fisher.rows()) throw DomainError("lambda_coeff: dimension mismatch");
  for (Eigen::Index i = 0; i < indicator.size(); ++i)
    if (indicator(i) != 0.0 && indicator(i) != 1.0)
      throw DomainError("lambda_coeff: indicator entries must be 0 or 1");
  return std::sqrt(std::max(0.0, indicator.dot(inv_fisher * indicator)));
}

Vec bundle_indicator(unsigned mask, int goods) {
  Vec v = Vec::Zero(goods);
  for (int g = 0; g < goods; ++g)
    if (mask & (1u << g)) v(g) = 1.0;
  return v;
}

GaussianBelief::GaussianBelief(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw DomainError("GaussianBelief: mean and covariance dimensions disagree");
  if (!mean_.allFinite()) throw DomainError("GaussianBelief: non-finite mean");
  Eigen::SelfAdjointEigenSolver<Mat> es(cov_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -1e-10 * std::abs(cov_.trace()))
    throw DomainError("GaussianBelief: covariance not positive semidefinite");
}

Vec SegmentDecomposition::conditional_mean(const Vec& y, const Vec& z) const {
  return y + b_matrix * (z - a_matrix * y);
}

SegmentDecomposition make_segments(const Mat& cov) {
  require_spd(cov, "make_segments");
  const int m = static_cast<int>(cov.rows());
  if (m < 2) throw DomainError("make_segments: dimension must be at least 2");
  SegmentDecomposition s;
  s.direction = cov * Vec::Ones(m);

  // Orthonormal basis of the complement of `direction`: Gram-Schmidt over
  // the unit vectors, taking at each step the largest remaining residual.
  std::vector<Vec> basis;
  double dn = s.direction.norm();
  if (dn > 0) basis.push_back(s.direction / dn);
  std::vector<bool> used(m, false);
  while (static_cast<int>(basis.size()) < m) {
    int best = -1;
    double best_norm = -1;
    Vec best_res;
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      Vec r = Vec::Unit(m, j);
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec& q : basis) r -= q.dot(r) * q;
      if (r.norm() > best_norm) {
        best_norm = r.norm();
        best = j;
        best_res = r;
      }
    }
    used[best] = true;
    if (best_norm < 1e-10) continue;
    basis.push_back(best_res / best_norm);
  }
  const int first = dn > 0 ? 1 : 0;
  s.a_matrix.resize(m - 1, m);
  for (int i = 0; i < m - 1; ++i) s.a_matrix.row(i) = basis[first + i].transpose();

  Mat asat = s.a_matrix * cov * s.a_matrix.transpose();
  Eigen::LLT<Mat> llt(asat);
  if (llt.info() != Eigen::Success) throw InternalError("make_segments: singular A cov A^T");
  s.b_matrix = cov * s.a_matrix.transpose() * llt.solve(Mat::Identity(m - 1, m - 1));
  s.cond_cov = cov - s.b_matrix * s.a_matrix * cov;
  s.cond_cov = 0.5 * (s.cond_cov + s.cond_cov.transpose()).eval();
  s.z_cov = asat;
  s.z_mean = Vec::Zero(m - 1);
  return s;
}

SegmentDecomposition make_segments(const GaussianBelief& belief) {
  SegmentDecomposition s = make_segments(belief.cov());
  s.z_mean = s.a_matrix * belief.mean();
  return s;
}

}  // namespace screenlab::gauss
