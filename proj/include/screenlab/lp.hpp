#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace screenlab::lp {

// min c^T x  subject to  A x = b,  x >= 0
struct Problem {
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

struct Options {
  double tol = 1e-10;
  int max_iter = 200;
};

struct Result {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  double objective = 0;
  int iterations = 0;
  bool optimal = false;
};

// Mehrotra predictor-corrector on the normal equations A D A^T.
Result solve(const Problem& problem, const Options& opts = {});

}  // namespace screenlab::lp
