#include "screenlab/signal_models.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <istream>
#include <locale>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "screenlab/errors.hpp"
#include "screenlab/gauss.hpp"

namespace screenlab::signals {

namespace {

double logistic(double u) {
  return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

// log(1 + e^u) without overflow
double softplus(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

void check_theta(const SignalModel& model, const Vec& theta) {
  if (theta.size() != model.dim()) throw DomainError("signal model: dimension mismatch");
  if (!theta.allFinite()) throw DomainError("signal model: non-finite theta");
}

// Negative total log-likelihood with gradient and Hessian.
struct Objective {
  const SignalModel& model;
  Vec xbar;  // column means of the data
  Mat scatter;  // Gaussian only: sum (x_i - xbar)(x_i - xbar)^T
  int n;

  Objective(const SignalModel& m, const SignalDataset& data) : model(m), n(data.n()) {
    xbar = data.records.colwise().mean().transpose();
    if (model.is_gaussian()) {
      Mat c = data.records.rowwise() - xbar.transpose();
      scatter = c.transpose() * c;
    }
  }

  double value(const Vec& th) const {
    if (model.is_gaussian()) {
      Vec d = xbar - th;
      const Mat& P = model.precision();
      return 0.5 * (P.cwiseProduct(scatter).sum() + n * d.dot(P * d)) - n * model.log_norm();
    }
    const auto& lp = *model.logistic();
    double v = 0;
    for (int g = 0; g < model.dim(); ++g) {
      double u = lp.beta * (th(g) - lp.ref_prices(g));
      v -= n * (xbar(g) * u - softplus(u));
    }
    return v;
  }

  Vec gradient(const Vec& th) const {
    if (model.is_gaussian()) return -n * (model.precision() * (xbar - th));
    const auto& lp = *model.logistic();
    Vec gr(model.dim());
    for (int g = 0; g < model.dim(); ++g) {
      double u = lp.beta * (th(g) - lp.ref_prices(g));
      gr(g) = -n * lp.beta * (xbar(g) - logistic(u));
    }
    return gr;
  }

  Mat hessian(const Vec& th) const {
    if (model.is_gaussian()) return n * model.precision();
    const auto& lp = *model.logistic();
    Mat h = Mat::Zero(model.dim(), model.dim());
    for (int g = 0; g < model.dim(); ++g) {
      double s = logistic(lp.beta * (th(g) - lp.ref_prices(g)));
      h(g, g) = std::max(n * lp.beta * lp.beta * s * (1 - s), 1e-300);
    }
    return h;
  }
};

}  // namespace

SignalModel::SignalModel(GaussianLocation m) : v_(m), dim_(static_cast<int>(m.cov.rows())) {
  gauss::require_spd(m.cov, "GaussianLocation");
  Eigen::LLT<Mat> llt(m.cov);
  cov_inv_ = llt.solve(Mat::Identity(dim_, dim_));
  double logdet = 0;
  for (int i = 0; i < dim_; ++i) logdet += 2 * std::log(llt.matrixL()(i, i));
  log_norm_ = -0.5 * (dim_ * std::log(2 * M_PI) + logdet);
}

SignalModel::SignalModel(LogisticPurchase m) : v_(m), dim_(static_cast<int>(m.ref_prices.size())) {
  if (!(m.beta > 0) || !std::isfinite(m.beta)) throw DomainError("LogisticPurchase: beta must be positive");
  if (dim_ < 1 || !(m.ref_prices.array() > 0).all())
    throw DomainError("LogisticPurchase: reference prices must be positive");
}

bool Box::contains(const Vec& x) const {
  return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

Vec Box::project(const Vec& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Box inflate(const Box& box, double frac) {
  if (box.lo.size() != box.hi.size() || !(box.hi.array() >= box.lo.array()).all())
    throw DomainError("inflate: malformed box");
  Vec w = box.hi - box.lo;
  Box out{box.lo - frac * w, box.hi + frac * w};
  for (Eigen::Index i = 0; i < out.lo.size(); ++i)
    if (box.lo(i) > 0) out.lo(i) = std::max(out.lo(i), 0.5 * box.lo(i));
  return out;
}

double log_density(const SignalModel& model, const Vec& x, const Vec& theta) {
  check_theta(model, theta);
  if (x.size() != model.dim()) throw DomainError("log_density: dimension mismatch");
  if (model.is_gaussian()) {
    Vec d = x - theta;
    return model.log_norm() - 0.5 * d.dot(model.precision() * d);
  }
  const auto& lp = *model.logistic();
  double v = 0;
  for (int g = 0; g < model.dim(); ++g) {
    double u = lp.beta * (theta(g) - lp.ref_prices(g));
    v += x(g) * u - softplus(u);
  }
  return v;
}

FisherMatrix fisher(const SignalModel& model, const Vec& theta) {
  check_theta(model, theta);
  if (model.is_gaussian()) return {model.precision(), FisherKind::exact};
  const auto& lp = *model.logistic();
  Mat m = Mat::Zero(model.dim(), model.dim());
  for (int g = 0; g < model.dim(); ++g) {
    double s = logistic(lp.beta * (theta(g) - lp.ref_prices(g)));
    m(g, g) = lp.beta * lp.beta * s * (1 - s);
  }
  return {m, FisherKind::exact};
}

FisherMatrix empirical_fisher(const SignalModel& model, const SignalDataset& data,
                              const Vec& theta) {
  check_theta(model, theta);
  if (data.n() < 1) throw DomainError("empirical_fisher: empty dataset");
  if (data.records.cols() != model.dim()) throw DomainError("empirical_fisher: dimension mismatch");
  // Both log-densities have record-independent Hessians, so the sample
  // average collapses to a single evaluation.
  Objective obj(model, data);
  return {obj.hessian(theta) / data.n(), FisherKind::empirical};
}

SignalDataset sample(const SignalModel& model, const Vec& theta, int n, std::uint64_t seed) {
  check_theta(model, theta);
  if (n < 1) throw DomainError("sample: n must be at least 1");
  std::mt19937_64 rng(seed);
  SignalDataset out{Mat(n, model.dim())};
  if (model.is_gaussian()) {
    Mat L = model.gaussian()->cov.llt().matrixL();
    std::normal_distribution<double> nd;
    Vec z(model.dim());
    for (int i = 0; i < n; ++i) {
      for (int g = 0; g < model.dim(); ++g) z(g) = nd(rng);
      out.records.row(i) = (theta + L * z).transpose();
    }
  } else {
    const auto& lp = *model.logistic();
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Vec prob(model.dim());
    for (int g = 0; g < model.dim(); ++g) prob(g) = logistic(lp.beta * (theta(g) - lp.ref_prices(g)));
    for (int i = 0; i < n; ++i)
      for (int g = 0; g < model.dim(); ++g) out.records(i, g) = ud(rng) < prob(g) ? 1.0 : 0.0;
  }
  return out;
}

double total_log_likelihood(const SignalModel& model, const SignalDataset& data, const Vec& theta) {
  check_theta(model, theta);
  if (data.records.cols() != model.dim()) throw DomainError("total_log_likelihood: dimension mismatch");
  return -Objective(model, data).value(theta);
}

Vec mle(const SignalModel& model, const SignalDataset& data, const Box& box) {
  if (data.n() < 1) throw DomainError("mle: empty dataset");
  if (data.records.cols() != model.dim()) throw DomainError("mle: dimension mismatch");
  if (box.lo.size() != model.dim() || box.hi.size() != model.dim() ||
      !(box.hi.array() >= box.lo.array()).all())
    throw DomainError("mle: box empty or wrong dimension");
  Objective obj(model, data);
  const int d = model.dim();
  Vec x = box.project(model.is_gaussian() ? Vec(obj.xbar) : Vec(0.5 * (box.lo + box.hi)));
  double fx = obj.value(x);
  const double width = (box.hi - box.lo).cwiseAbs().maxCoeff();
  const double eps_active = 1e-12 * std::max(width, 1.0);

  for (int it = 0; it < 200; ++it) {
    Vec g = obj.gradient(x);
    Vec pg = x - box.project(x - g);
    if (pg.norm() <= 1e-9) return x;

    std::vector<int> free;
    Vec dir = Vec::Zero(d);
    Mat H = obj.hessian(x);
    for (int i = 0; i < d; ++i) {
      bool at_lo = x(i) <= box.lo(i) + eps_active && g(i) > 0;
      bool at_hi = x(i) >= box.hi(i) - eps_active && g(i) < 0;
      if (at_lo || at_hi)
        dir(i) = -g(i) / H(i, i);
      else
        free.push_back(i);
    }
    if (!free.empty()) {
      const int k = static_cast<int>(free.size());
      Mat hf(k, k);
      Vec gf(k);
      for (int a = 0; a < k; ++a) {
        gf(a) = g(free[a]);
        for (int b = 0; b < k; ++b) hf(a, b) = H(free[a], free[b]);
      }
      Vec step = hf.ldlt().solve(-gf);
      for (int a = 0; a < k; ++a) dir(free[a]) = step(a);
    }

    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Vec xn = box.project(x + t * dir);
      double fn = obj.value(xn);
      // Slack for rounding in fx; near the optimum the decrease is below it.
      if (fn <= fx + 1e-4 * g.dot(xn - x) + 1e-14 * std::abs(fx)) {
        moved = (xn - x).norm() > 0;
        x = xn;
        fx = fn;
        break;
      }
    }
    if (!moved) {
      // No admissible decrease left: the iterate is optimal to working precision
      // unless the projected gradient is still large.
      Vec pg2 = x - box.project(x - obj.gradient(x));
      if (pg2.norm() <= 1e-6 * std::max(1.0, static_cast<double>(data.n()))) return x;
      throw EstimationError("mle: line search failed", x);
    }
  }
  throw EstimationError("mle: iteration cap reached", x);
}

void write_csv(std::ostream& os, const SignalDataset& data) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss.precision(17);
  for (Eigen::Index g = 0; g < data.records.cols(); ++g) ss << (g ? "," : "") << "x" << (g + 1);
  ss << "\n";
  for (Eigen::Index i = 0; i < data.records.rows(); ++i) {
    for (Eigen::Index g = 0; g < data.records.cols(); ++g)
      ss << (g ? "," : "") << data.records(i, g);
    ss << "\n";
  }
  os << ss.str();
}

SignalDataset read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("read_csv: missing header");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::vector<double> row;
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      std::istringstream cs(cell);
      cs.imbue(std::locale::classic());
      double v;
      if (!(cs >> v)) throw DomainError("read_csv: bad number '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DomainError("read_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DomainError("read_csv: no records");
  SignalDataset out{Mat(rows.size(), rows.front().size())};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t g = 0; g < rows[i].size(); ++g) out.records(i, g) = rows[i][g];
  return out;
}

}  // namespace screenlab::signals
