#include "screenlab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "screenlab/errors.hpp"

namespace screenlab::quad {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights the
// squared first eigenvector components.
Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) jac(i, i) = diag(i);
  for (int i = 0; i + 1 < n; ++i) jac(i, i + 1) = jac(i + 1, i) = off(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success) throw NumericError("quadrature: eigen solve failed");
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    double v = es.eigenvectors()(0, i);
    r.weights[i] = v * v;
  }
  return r;
}

void refine_hermite(Rule& r) {
  // Newton polish on He_n with the three-term recurrence; weights from
  // w = n! / (n He_{n-1}(x))^2 in normalized form.
  const int n = static_cast<int>(r.nodes.size());
  if (n == 1) return;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.nodes[i];
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 3; ++it) {
      // normalized Hermite: h_k = He_k / sqrt(k!)
      p0 = 1.0;
      p1 = x;
      for (int k = 1; k < n; ++k) {
        double p2 = (x * p1 - std::sqrt(static_cast<double>(k)) * p0) / std::sqrt(k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      double dp = std::sqrt(static_cast<double>(n)) * p0;
      x -= p1 / dp;
    }
    p0 = 1.0;
    p1 = x;
    for (int k = 1; k < n; ++k) {
      double p2 = (x * p1 - std::sqrt(static_cast<double>(k)) * p0) / std::sqrt(k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    r.nodes[i] = x;
    r.weights[i] = 1.0 / (n * p0 * p0);
    total += r.weights[i];
  }
  for (double& w : r.weights) w /= total;
}

}  // namespace

Rule gauss_hermite(int order) {
  if (order < 1 || order > 200) throw DomainError("gauss_hermite: order must be in [1, 200]");
  static std::mutex mu;
  static std::map<int, Rule> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int k = 0; k + 1 < order; ++k) off(k) = std::sqrt(k + 1.0);
  Rule r = golub_welsch(diag, off);
  refine_hermite(r);
  // symmetrize
  for (int i = 0; i < order / 2; ++i) {
    int j = order - 1 - i;
    double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (order % 2 == 1) r.nodes[order / 2] = 0.0;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(order, r);
  return r;
}

Rule gauss_legendre(int order) {
  if (order < 1 || order > 200) throw DomainError("gauss_legendre: order must be in [1, 200]");
  Rule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[order - 1 - i] = x;
    r.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

Rule composite_legendre(double a, double b, std::vector<double> cuts, double max_panel,
                        int order) {
  if (!(b > a) || !(max_panel > 0)) throw DomainError("composite_legendre: bad interval");
  std::vector<double> pts{a};
  std::sort(cuts.begin(), cuts.end());
  for (double c : cuts)
    if (c > a && c < b && c > pts.back()) pts.push_back(c);
  pts.push_back(b);
  const Rule base = gauss_legendre(order);
  Rule r;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double lo = pts[k], hi = pts[k + 1];
    if (!(hi > lo)) continue;
    int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_panel)));
    double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      double pl = lo + p * h;
      double mid = pl + 0.5 * h;
      for (int i = 0; i < order; ++i) {
        r.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
        r.weights.push_back(0.5 * h * base.weights[i]);
      }
    }
  }
  return r;
}

}  // namespace screenlab::quad
