#include "screenlab/lp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "screenlab/errors.hpp"

namespace screenlab::lp {

namespace {

using Vec = Eigen::VectorXd;
using Sp = Eigen::SparseMatrix<double>;

class NormalSolver {
 public:
  NormalSolver(const Sp& a) : a_(a), at_(a.transpose()) {}

  void factor(const Vec& d) {
    m_ = a_ * d.asDiagonal() * at_;
    double reg = 1e-14 * (1.0 + m_.diagonal().cwiseAbs().maxCoeff());
    for (int i = 0; i < m_.rows(); ++i) m_.coeffRef(i, i) += reg;
    if (!analyzed_) {
      ldlt_.analyzePattern(m_);
      analyzed_ = true;
    }
    ldlt_.factorize(m_);
    if (ldlt_.info() != Eigen::Success) throw NumericError("lp: normal-equation factorization failed");
  }

  // One step of iterative refinement against the regularized matrix.
  Vec solve(const Vec& r) const {
    Vec x = ldlt_.solve(r);
    x += ldlt_.solve(r - m_ * x);
    return x;
  }

 private:
  const Sp& a_;
  Sp at_;
  Sp m_;
  Eigen::SimplicialLDLT<Sp> ldlt_;
  bool analyzed_ = false;
};

double max_step(const Vec& v, const Vec& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
  return a;
}

}  // namespace

Result solve(const Problem& p, const Options& opts) {
  const Eigen::Index m = p.a.rows(), n = p.a.cols();
  if (p.b.size() != m || p.c.size() != n || m == 0 || n == 0)
    throw DomainError("lp: inconsistent problem dimensions");
  NormalSolver ns(p.a);

  // Mehrotra starting point.
  ns.factor(Vec::Ones(n));
  Vec x = p.a.transpose() * ns.solve(p.b);
  Vec y = ns.solve(p.a * p.c);
  Vec s = p.c - p.a.transpose() * y;
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  {
    double xs = x.dot(s);
    double dx = 0.5 * xs / std::max(s.sum(), 1e-300);
    double ds = 0.5 * xs / std::max(x.sum(), 1e-300);
    x.array() += dx;
    s.array() += ds;
    if (!(x.minCoeff() > 0)) x.array() += 1.0;
    if (!(s.minCoeff() > 0)) s.array() += 1.0;
  }

  const double bnorm = 1.0 + p.b.norm(), cnorm = 1.0 + p.c.norm();
  Result r;
  // Near the end the normal equations lose accuracy and iterates can drift;
  // the best iterate seen is what gets returned.
  double best_merit = std::numeric_limits<double>::infinity();
  Vec bx = x, by = y, bs = s;
  for (int it = 0; it < opts.max_iter; ++it) {
    Vec rb = p.a * x - p.b;
    Vec rc = p.a.transpose() * y + s - p.c;
    double mu = x.dot(s) / n;
    double pobj = p.c.dot(x), dobj = p.b.dot(y);
    double merit = std::max({rb.norm() / bnorm, rc.norm() / cnorm,
                             std::abs(pobj - dobj) / (1.0 + std::abs(pobj))});
    r.iterations = it;
    if (merit < best_merit) {
      best_merit = merit;
      bx = x;
      by = y;
      bs = s;
    }
    if (merit < opts.tol) break;
    if (mu < 1e-16 * (1.0 + std::abs(pobj))) break;
    Vec d = x.cwiseQuotient(s);
    ns.factor(d);

    auto direction = [&](const Vec& rxs, Vec& dx, Vec& dy, Vec& ds) {
      Vec t = rxs.cwiseQuotient(s) + d.cwiseProduct(rc);
      dy = ns.solve(-rb - p.a * t);
      // Refine against the primal residual; A dx + rb is the normal-equation residual.
      for (int k = 0;; ++k) {
        ds = -rc - p.a.transpose() * dy;
        dx = rxs.cwiseQuotient(s) - d.cwiseProduct(ds);
        if (k == 3) break;
        Vec e = -rb - p.a * dx;
        if (e.norm() <= 1e-3 * opts.tol * bnorm) break;
        dy += ns.solve(e);
      }
    };

    Vec dxa, dya, dsa;
    direction(-x.cwiseProduct(s), dxa, dya, dsa);
    double ap = max_step(x, dxa), ad = max_step(s, dsa);
    double mu_aff = (x + ap * dxa).dot(s + ad * dsa) / n;
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    Vec rxs = -x.cwiseProduct(s) - dxa.cwiseProduct(dsa);
    rxs.array() += sigma * mu;
    Vec dx, dy, ds;
    direction(rxs, dx, dy, ds);
    const double eta = std::clamp(1.0 - 10 * mu, 0.9, 0.9995);
    ap = std::min(1.0, eta * max_step(x, dx));
    ad = std::min(1.0, eta * max_step(s, ds));
    x += ap * dx;
    y += ad * dy;
    s += ad * ds;
    if (!x.allFinite() || !y.allFinite() || !s.allFinite()) break;
  }
  r.optimal = best_merit < 100 * opts.tol;
  x = bx;
  y = by;
  s = bs;
  r.x = x;
  r.y = y;
  r.s = s;
  r.objective = p.c.dot(x);
  return r;
}

}  // namespace screenlab::lp
