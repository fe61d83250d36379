#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "screenlab/lp.hpp"

using namespace screenlab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

lp::Problem make(const MatrixXd& a, const VectorXd& b, const VectorXd& c) {
  lp::Problem p;
  p.a = a.sparseView();
  p.b = b;
  p.c = c;
  return p;
}

// min c.x over A x = b, x >= 0 by enumerating every basis.
double vertex_oracle(const MatrixXd& a, const VectorXd& b, const VectorXd& c) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  double best = INFINITY;
  std::vector<int> pick(m);
  std::function<void(int, int)> rec = [&](int k, int start) {
    if (k == m) {
      MatrixXd bm(m, m);
      for (int i = 0; i < m; ++i) bm.col(i) = a.col(pick[i]);
      Eigen::FullPivLU<MatrixXd> lu(bm);
      if (lu.rank() < m) return;
      VectorXd xb = lu.solve(b);
      if (xb.minCoeff() < -1e-12) return;
      double v = 0;
      for (int i = 0; i < m; ++i) v += c(pick[i]) * xb(i);
      best = std::min(best, v);
      return;
    }
    for (int j = start; j < n; ++j) {
      pick[k] = j;
      rec(k + 1, j + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("hand example") {
  // max x1 + 2 x2 s.t. x1 + x2 <= 4, x2 <= 3  -> x = (1, 3), value 7.
  MatrixXd a(2, 4);
  a << 1, 1, 1, 0, 0, 1, 0, 1;
  VectorXd b(2), c(4);
  b << 4, 3;
  c << -1, -2, 0, 0;
  auto r = lp::solve(make(a, b, c));
  CHECK(r.optimal);
  CHECK(r.objective == doctest::Approx(-7).epsilon(1e-9));
  CHECK(r.x(0) == doctest::Approx(1).epsilon(1e-7));
  CHECK(r.x(1) == doctest::Approx(3).epsilon(1e-7));
  // Dual feasibility and complementary slackness.
  CHECK((a.transpose() * r.y + r.s - c).norm() < 1e-8);
  CHECK(r.x.dot(r.s) < 1e-8);
}

TEST_CASE("degenerate optimum face") {
  // min x1 + x2 s.t. x1 + x2 + x3 = 1 with x3 costless: whole face optimal at 0.
  MatrixXd a(1, 3);
  a << 1, 1, 1;
  VectorXd b(1), c(3);
  b << 1;
  c << 1, 1, 0;
  auto r = lp::solve(make(a, b, c));
  CHECK(r.optimal);
  CHECK(std::abs(r.objective) < 1e-9);
}

TEST_CASE("random problems against basis enumeration") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ud(-1, 1), up(0, 1);
  for (int t = 0; t < 40; ++t) {
    const int m = 2 + t % 3, n = m + 3 + t % 3;
    MatrixXd a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = ud(rng);
    VectorXd x0(n), c(n);
    for (int j = 0; j < n; ++j) x0(j) = up(rng), c(j) = up(rng) + 0.05 * ud(rng);
    VectorXd b = a * x0;
    double want = vertex_oracle(a, b, c);
    auto r = lp::solve(make(a, b, c));
    REQUIRE(r.optimal);
    CHECK(std::abs(r.objective - want) <= 1e-8 * (1 + std::abs(want)));
    CHECK((a * r.x - b).norm() <= 1e-8 * (1 + b.norm()));
    CHECK(r.x.minCoeff() >= -1e-12);
  }
}

}  // TEST_SUITE
