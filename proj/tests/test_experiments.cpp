#include <cmath>
#include <locale>
#include <random>

#include "doctest.h"
#include "screenlab/errors.hpp"
#include "screenlab/experiments.hpp"
#include "screenlab/gauss.hpp"
#include "screenlab/table.hpp"

using namespace screenlab;
using exp::Mat;
using exp::Vec;

namespace {

std::vector<double> abs_dev(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(std::abs(x - 1));
  return out;
}

Mat rho_matrix(double rho) { return (Mat(2, 2) << 1, rho, rho, 1).finished(); }

// Comma decimal point, to show output ignores the global locale.
struct CommaPunct : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("trend helpers") {
  CHECK(exp::strictly_decreasing({3, 2, 1}));
  CHECK_FALSE(exp::strictly_decreasing({3, 3, 1}));
  CHECK(exp::strictly_increasing({-1, 0, 5}));
  CHECK(exp::decreasing_tail_steps({1, 5, 4, 3, 2}) == 3);
  CHECK(exp::decreasing_tail_steps({1, 2}) == 0);
  std::vector<double> x{1, 10, 100, 1000}, y;
  for (double v : x) y.push_back(3 * std::pow(v, -0.5));
  CHECK(exp::loglog_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_THROWS_AS(exp::loglog_slope({1}, {1}), DomainError);
  CHECK(exp::decades(2, 4) == std::vector<double>{100, 1000, 10000});
}

TEST_CASE("convergence curves") {
  CHECK_THROWS_AS(exp::figure1_env(1.0, 5), DomainError);
  const auto grid = exp::figure1_default_grid();
  auto curves = exp::figure1_curves({-0.5, 0.0, 0.5}, grid);
  REQUIRE(curves.size() == 3);
  for (const auto& c : curves) {
    const Table& t = c.table;
    REQUIRE(t.rows.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(t.at(i, "R_fb") == 0.6);
      CHECK(t.at(i, "solver_error") == 0);
      for (std::string m : {"bd", "sep", "mix", "relaxed"}) {
        double rev = t.at(i, m == "relaxed" ? "R_relaxed" : "R_" + m);
        CHECK(std::abs(t.at(i, "gap_" + m) - (0.6 - rev)) <= 1e-12);
        double n = grid[i];
        if (n > 1)
          CHECK(std::abs(t.at(i, "scaled_gap_" + m) - t.at(i, "gap_" + m) * std::sqrt(n / std::log(n))) <= 1e-12);
        else
          CHECK(std::isnan(t.at(i, "scaled_gap_" + m)));
      }
      // The chain holds except where free disposal pushes the bound past 0.6.
      bool known = c.rho == -0.5 && grid[i] == 1;
      CHECK(t.at(i, "chain_ok") == (known ? 0 : 1));
      if (known) CHECK(t.at(i, "R_relaxed") > 0.6);
    }
  }
  // Separate-versus-bundling gap is wider under negative correlation.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double neg = std::abs(curves[0].table.at(i, "R_sep") - curves[0].table.at(i, "R_bd"));
    double pos = std::abs(curves[2].table.at(i, "R_sep") - curves[2].table.at(i, "R_bd"));
    CHECK(neg > pos);
  }
  // At the largest n, mixed bundling closes more of the bundling gap than of the separate gap.
  for (const auto& c : curves) {
    std::size_t last = grid.size() - 1;
    const Table& t = c.table;
    double fb = 0.6, mix = t.at(last, "R_mix");
    double via_bd = (mix - t.at(last, "R_bd")) / (fb - t.at(last, "R_bd"));
    double via_sep = (mix - t.at(last, "R_sep")) / (fb - t.at(last, "R_sep"));
    CHECK(via_bd < via_sep);
  }
  // Bundling revenue first falls then rises in n.
  auto bd = curves[1].table.column("R_bd");
  auto lowest = std::min_element(bd.begin(), bd.end()) - bd.begin();
  CHECK(lowest > 0);
  CHECK(lowest < static_cast<long>(bd.size()) - 1);
}

TEST_CASE("convergence curves: mixed revenue audited by Monte Carlo") {
  auto env = exp::figure1_env(-0.5, 500);
  auto m = mech::mixed_bundling_revenue(env);
  Mat l = env.belief_cov().llt().matrixL();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const int n = 2000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    Vec th = env.theta_star + l * Vec((Vec(2) << nd(rng), nd(rng)).finished());
    double best = 0, pay = 0;
    for (unsigned b = 1; b < 4; ++b) {
      double u = gauss::bundle_indicator(b, 2).dot(th) - m.menu.prices[b];
      if (u > best) best = u, pay = m.menu.prices[b];
    }
    s += pay;
    s2 += pay * pay;
  }
  double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - m.breakdown.revenue) <= 3 * se);
}

TEST_CASE("convergence curves are schedule independent") {
  exp::Figure1Options a, b;
  a.exec = Execution::serial;
  b.exec = Execution::parallel;
  auto x = exp::figure1_curves({0.3}, {3, 40}, a);
  auto y = exp::figure1_curves({0.3}, {3, 40}, b);
  CHECK(to_csv(x[0].table) == to_csv(y[0].table));
}

TEST_CASE("rate scan") {
  exp::RateOptions o;
  o.include_mixed = false;
  auto t = exp::rate_scan(Vec::Constant(2, 0.3), rho_matrix(0), exp::decades(2, 12), o);
  CHECK(t.at(0, "lambda_sum") / t.at(0, "lambda_G") == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  for (double rho : {-0.5, 0.0, 0.5}) {
    auto r = exp::rate_scan(Vec::Constant(2, 0.3), rho_matrix(rho), exp::decades(2, 12), o);
    CHECK(r.at(0, "lambda_G") == doctest::Approx(std::sqrt(2 * (1 + rho))));
    CHECK(r.at(0, "lambda_sum") == doctest::Approx(2.0));
    CHECK(exp::decreasing_tail_steps(abs_dev(r.column("ratio_bd_G"))) >= 4);
    CHECK(exp::decreasing_tail_steps(abs_dev(r.column("ratio_sep_sum"))) >= 4);
    CHECK(std::abs(r.column("ratio_bd_G").back() - 1) < 0.25);
    CHECK(std::abs(r.column("ratio_sep_sum").back() - 1) < 0.25);
  }
  CHECK_THROWS_AS(exp::rate_scan(Vec::Constant(2, 0.3), rho_matrix(0), {1.0}, o), DomainError);
}

TEST_CASE("rate scan: mixed bundling order separation") {
  for (double rho : {-0.5, 0.0}) {
    auto t = exp::rate_scan(Vec::Constant(2, 0.3), rho_matrix(rho), exp::decades(2, 6));
    auto bd = t.column("scaled_mix_minus_bd"), sep = t.column("scaled_mix_minus_sep");
    // Mixed bundling collapses onto pure bundling; the scaled difference vanishes.
    for (std::size_t i = 2; i < bd.size(); ++i) CHECK(std::abs(bd[i]) < 1e-6);
    CHECK(bd.front() > 0);
    for (double v : sep) CHECK(v > 0.1);
  }
}

TEST_CASE("bundling gap log-log slope") {
  exp::RateOptions o;
  o.include_mixed = false;
  auto t = exp::rate_scan(Vec::Constant(2, 0.3), rho_matrix(0), exp::decades(3, 9), o);
  std::vector<double> gap;
  for (double r : t.column("R_bd")) gap.push_back(0.6 - r);
  double slope = exp::loglog_slope(t.column("n"), gap);
  CHECK(slope >= -0.58);
  CHECK(slope <= -0.42);
  auto s = exp::single_good_rate_scan(0.6, std::sqrt(2.0), exp::decades(3, 9));
  double s2 = exp::loglog_slope(s.column("n"), s.column("gap"));
  CHECK(s2 == doctest::Approx(slope).epsilon(1e-9));
}

TEST_CASE("single good rate law") {
  for (double th : {0.3, 1.0, 3.0})
    for (double sg : {0.5, 1.0}) {
      auto t = exp::single_good_rate_scan(th, sg, exp::decades(4, 12));
      for (double r : t.column("ratio")) {
        CHECK(r > 0);
        CHECK(r < 2);
      }
      CHECK(exp::decreasing_tail_steps(abs_dev(t.column("ratio"))) >= 4);
    }
}

TEST_CASE("margin scan") {
  auto t = exp::margin_scan(0.3, 1.0, exp::decades(2, 10));
  CHECK(exp::strictly_decreasing(t.column("ext_int")));
  CHECK(exp::strictly_increasing(t.column("scaled_ext_delta_0.5")));
  auto d1 = t.column("scaled_ext_delta_1");
  CHECK(exp::strictly_decreasing(d1));
  CHECK(d1.back() < 0.3 * d1.front());
  // Direct evaluation at two decades.
  for (std::size_t row : {std::size_t{0}, std::size_t{6}}) {
    double n = t.at(row, "n"), p = t.at(row, "price"), sd = 1 / std::sqrt(n);
    double F = 0.5 * std::erfc(-(p - 0.3) / sd / std::sqrt(2.0));
    CHECK(t.at(row, "ext_int") == doctest::Approx(0.3 * F / (0.3 - p)).epsilon(1e-10));
    double d5 = 0.3 * 0.5 * std::erfc(0.5 * std::sqrt(std::log(n)) / std::sqrt(2.0)) / std::sqrt(std::log(n) / n);
    CHECK(t.at(row, "scaled_ext_delta_0.5") == doctest::Approx(d5).epsilon(1e-10));
  }
}

TEST_CASE("priors") {
  exp::Prior p;
  p.kind = exp::Prior::Kind::uniform;
  p.box = {Vec::Zero(2), Vec::Ones(2)};
  CHECK_NOTHROW(p.validate(2));
  Vec mean = Vec::Zero(2);
  for (int i = 0; i < 4000; ++i) {
    Vec d = p.draw(split_seed(1, i));
    CHECK(p.box.contains(d));
    mean += d / 4000;
  }
  CHECK(std::abs(mean(0) - 0.5) < 0.02);
  p.kind = exp::Prior::Kind::beta;
  p.a = 2;
  p.b = 6;
  mean.setZero();
  for (int i = 0; i < 4000; ++i) mean += p.draw(split_seed(2, i)) / 4000;
  CHECK(std::abs(mean(1) - 0.25) < 0.02);
  p.kind = exp::Prior::Kind::point;
  p.point = Vec::Constant(2, 2.0);
  CHECK_THROWS_AS(p.validate(2), DomainError);
  p.point = Vec::Constant(2, 0.5);
  CHECK(p.draw(9) == p.point);
  CHECK_THROWS_AS(p.validate(3), DomainError);
}

TEST_CASE("plug-in price identity") {
  auto model = signals::SignalModel(signals::LogisticPurchase{2.0, Vec::Constant(2, 0.5)});
  Vec th = (Vec(2) << 0.6, 0.4).finished();
  Mat info = signals::fisher(model, th).matrix;
  double lam = gauss::lambda_coeff(Vec::Ones(2), info.inverse());
  for (double n : {10.0, 1e3, 1e6}) {
    double p = exp::mle_price(th, info, n);
    CHECK(p <= th.sum());
    CHECK(th.sum() - p == doctest::Approx(std::sqrt(std::log(n) / n) * lam).epsilon(1e-12));
  }
  CHECK_THROWS_AS(exp::mle_price(th, -Mat::Identity(2, 2), 10), NumericError);
}

TEST_CASE("mle pricing experiment") {
  exp::MonteCarloConfig c;
  c.prior.kind = exp::Prior::Kind::point;
  c.prior.point = Vec::Constant(2, 0.5);
  c.prior.box = {Vec::Zero(2), Vec::Ones(2)};
  c.n_list = {100, 400};
  c.replications = 400;
  c.seed = 5;
  auto a = exp::mle_pricing_experiment(c);
  auto b = exp::mle_pricing_experiment(c);
  CHECK(to_csv(a) == to_csv(b));
  c.exec = Execution::serial;
  CHECK(to_csv(exp::mle_pricing_experiment(c)) == to_csv(a));
  for (std::size_t i = 0; i < 2; ++i) {
    double n = a.at(i, "n");
    CHECK(a.at(i, "lambda_g") == doctest::Approx(std::sqrt(2.0)));
    CHECK(a.at(i, "value") == doctest::Approx(1.0));
    CHECK(a.at(i, "sale_freq") > 0.9);
    CHECK(a.at(i, "sale_freq") <= 1.0);
    CHECK(std::abs(a.at(i, "gap") - (a.at(i, "value") - a.at(i, "revenue"))) <= 1e-12);
    CHECK(std::abs(a.at(i, "scaled_gap") - a.at(i, "gap") * std::sqrt(n / std::log(n))) <= 1e-12);
    CHECK(a.at(i, "mle_failures") == 0);
  }
  c.seed = 6;
  CHECK(to_csv(exp::mle_pricing_experiment(c)) != to_csv(a));
  c.replications = 0;
  CHECK_THROWS_AS(exp::mle_pricing_experiment(c), DomainError);
  c.replications = 5;
  c.n_list = {1};
  CHECK_THROWS_AS(exp::mle_pricing_experiment(c), DomainError);
}

TEST_CASE("tail rate scan") {
  auto ns = exp::decades(2, 12);
  auto g = exp::tail_rate_scan(*single_good::gaussian_tail(0.7), 1.0, ns);
  auto s = exp::single_good_rate_scan(1.0, 0.7, ns);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    CHECK(g.at(i, "rate") == doctest::Approx(std::sqrt(std::log(ns[i])) * 0.7 / std::sqrt(ns[i])).epsilon(1e-12));
    CHECK(std::abs(g.at(i, "gap") - s.at(i, "gap")) <= 1e-8);
  }
  auto l = exp::tail_rate_scan(*single_good::laplace_tail(1.0), 1.0, ns);
  CHECK(exp::decreasing_tail_steps(abs_dev(l.column("ratio"))) >= 4);
  std::vector<double> track;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    CHECK(l.at(i, "elasticity") == doctest::Approx(1 / l.at(i, "gamma")).epsilon(1e-12));
    track.push_back(std::abs(l.at(i, "ext_int") * l.at(i, "gamma") - 1));
  }
  CHECK(track.back() < 0.2);
  CHECK(exp::decreasing_tail_steps(track) >= 4);
}

}  // TEST_SUITE

TEST_SUITE("table") {

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3) == "0.333333333333");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  std::locale old = std::locale::global(std::locale(std::locale::classic(), new CommaPunct));
  CHECK(format_number(1234.5) == "1234.5");
  std::locale::global(old);
}

TEST_CASE("csv layout") {
  Table t{{"n", "x"}, {}};
  t.add_row({1, 0.5});
  t.add_row({2, NAN});
  CHECK(to_csv(t) == "n,x\n1,0.5\n2,nan\n");
  CHECK(t.column("x")[0] == 0.5);
  CHECK_THROWS_AS(t.index_of("y"), DomainError);
  CHECK_THROWS(t.add_row({1}));
}

}  // TEST_SUITE
