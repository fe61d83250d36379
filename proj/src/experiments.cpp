#include "screenlab/experiments.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "screenlab/errors.hpp"
#include "screenlab/gauss.hpp"

namespace screenlab::exp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double scale_factor(double n) { return n > 1 ? std::sqrt(n / std::log(n)) : kNaN; }

}  // namespace

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

int decreasing_tail_steps(const std::vector<double>& v) {
  int steps = 0;
  for (std::size_t i = v.size(); i-- > 1;) {
    if (!(v[i] < v[i - 1])) break;
    ++steps;
  }
  return steps;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need two or more points");
  double mx = 0, my = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("loglog_slope: values must be positive");
    mx += std::log(x[i]) / k;
    my += std::log(y[i]) / k;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<double> decades(int lo_exp, int hi_exp) {
  std::vector<double> out;
  for (int e = lo_exp; e <= hi_exp; ++e) out.push_back(std::pow(10.0, e));
  return out;
}

// ---------------------------------------------------------------------------

mech::MultiGoodEnv figure1_env(double rho, double n) {
  if (!(rho > -1 && rho < 1)) throw DomainError("figure1_env: rho must lie in (-1, 1)");
  mech::MultiGoodEnv env;
  env.theta_star = Vec::Constant(2, 0.3);
  env.inv_fisher = Mat::Identity(2, 2);
  env.inv_fisher(0, 1) = env.inv_fisher(1, 0) = rho;
  env.n = n;
  return env;
}

std::vector<double> figure1_default_grid() { return {1, 2, 5, 10, 20, 50, 100, 200, 500}; }

double chain_slack(const Table& t, std::size_t row) {
  double bd = t.at(row, "R_bd"), sep = t.at(row, "R_sep"), mix = t.at(row, "R_mix");
  double rel = t.at(row, "R_relaxed"), fb = t.at(row, "R_fb");
  return std::min({mix - bd, mix - sep, rel - mix, fb - rel});
}

std::vector<ConvergenceCurve> figure1_curves(const std::vector<double>& rho_list,
                                             const std::vector<double>& n_grid,
                                             const Figure1Options& opts) {
  if (rho_list.empty() || n_grid.empty()) throw DomainError("figure1_curves: empty grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (!(n_grid[i] > n_grid[i - 1])) throw DomainError("figure1_curves: n grid must be increasing");
  const std::vector<std::string> cols = {
      "n",           "R_bd",           "R_sep",           "R_mix",       "R_relaxed",
      "R_fb",        "gap_bd",         "gap_sep",         "gap_mix",     "gap_relaxed",
      "scaled_gap_bd", "scaled_gap_sep", "scaled_gap_mix", "scaled_gap_relaxed",
      "p_bd",        "mix_converged",  "relaxed_nonconverged", "chain_ok", "solver_error"};
  const std::size_t nn = n_grid.size();
  mech::RelaxedOptions ropt = opts.relaxed;
  ropt.exec = Execution::serial;  // parallelism over grid points instead

  auto point = [&](std::size_t k) {
    const double rho = rho_list[k / nn], n = n_grid[k % nn];
    std::vector<double> row(cols.size(), kNaN);
    row[0] = n;
    try {
      mech::MultiGoodEnv env = figure1_env(rho, n);
      mech::BundlingResult bd = mech::bundling_revenue(env);
      mech::SeparateResult sep = mech::separate_revenue(env);
      mech::MixedResult mix = mech::mixed_bundling_revenue(env, opts.mixed);
      mech::RelaxedResult rel = mech::relaxed_upper_bound(env, mix.menu, mix.breakdown.revenue, ropt);
      const double fb = mech::first_best(env);
      mech::RevenueBreakdown rb = mech::make_breakdown(rel.value, fb, n);
      const mech::RevenueBreakdown* all[] = {&bd.breakdown, &sep.breakdown, &mix.breakdown, &rb};
      for (int i = 0; i < 4; ++i) {
        row[1 + i] = all[i]->revenue;
        row[6 + i] = all[i]->gap;
        row[10 + i] = all[i]->scaled_gap;
      }
      row[5] = fb;
      row[14] = bd.price;
      row[15] = mix.converged ? 1 : 0;
      row[16] = rel.nonconverged;
      row[18] = 0;
    } catch (const NumericError&) {
      row[18] = 1;
    }
    return row;
  };
  std::vector<std::vector<double>> rows =
      parallel_map<std::vector<double>>(rho_list.size() * nn, point, opts.exec);

  std::vector<ConvergenceCurve> out;
  for (std::size_t r = 0; r < rho_list.size(); ++r) {
    ConvergenceCurve c{rho_list[r], n_grid, Table{cols, {}}};
    for (std::size_t i = 0; i < nn; ++i) {
      c.table.add_row(rows[r * nn + i]);
      std::size_t last = c.table.rows.size() - 1;
      bool ok = c.table.rows[last][18] == 0 && chain_slack(c.table, last) >= -1e-6;
      c.table.rows[last][17] = ok ? 1 : 0;
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------

Table rate_scan(const Vec& theta_star, const Mat& inv_fisher, const std::vector<double>& n_list,
                const RateOptions& opts) {
  for (double n : n_list)
    if (!(n >= 2)) throw DomainError("rate_scan: n must be at least 2");
  const int d = static_cast<int>(theta_star.size());
  const double lam_g = std::sqrt(inv_fisher.sum());
  double lam_sum = 0;
  for (int g = 0; g < d; ++g) lam_sum += std::sqrt(inv_fisher(g, g));

  Table t{{"n", "R_bd", "R_sep", "R_mix", "R_fb", "lambda_G", "lambda_sum", "ratio_bd_G",
           "ratio_bd_sum", "ratio_sep_G", "ratio_sep_sum", "ratio_mix_G", "scaled_mix_minus_bd",
           "scaled_mix_minus_sep"},
          {}};
  auto row_for = [&](std::size_t i) {
    const double n = n_list[i];
    mech::MultiGoodEnv env{theta_star, inv_fisher, n, std::nullopt};
    mech::BundlingResult bd = mech::bundling_revenue(env);
    mech::SeparateResult sep = mech::separate_revenue(env);
    double mix = kNaN;
    if (opts.include_mixed) mix = mech::mixed_bundling_revenue(env).breakdown.revenue;
    const double fb = theta_star.sum(), s = scale_factor(n);
    const double gbd = bd.breakdown.gap * s, gsep = sep.breakdown.gap * s;
    return std::vector<double>{n,
                               bd.breakdown.revenue,
                               sep.breakdown.revenue,
                               mix,
                               fb,
                               lam_g,
                               lam_sum,
                               gbd / lam_g,
                               gbd / lam_sum,
                               gsep / lam_g,
                               gsep / lam_sum,
                               (fb - mix) * s / lam_g,
                               (mix - bd.breakdown.revenue) * s,
                               (mix - sep.breakdown.revenue) * s};
  };
  for (auto& r : parallel_map<std::vector<double>>(n_list.size(), row_for, opts.exec)) t.add_row(r);
  return t;
}

Table single_good_rate_scan(double theta_star, double sigma, const std::vector<double>& n_list) {
  if (!(sigma > 0)) throw DomainError("single_good_rate_scan: sigma must be positive");
  Table t{{"n", "price", "revenue", "gap", "ratio"}, {}};
  for (double n : n_list) {
    if (!(n >= 2)) throw DomainError("single_good_rate_scan: n must be at least 2");
    single_good::PriceResult r = single_good::optimal_price({theta_star, sigma / std::sqrt(n)});
    double gap = theta_star - r.revenue;
    t.add_row({n, r.price, r.revenue, gap, gap * scale_factor(n) / sigma});
  }
  return t;
}

// ---------------------------------------------------------------------------

Table margin_scan(double theta_star, double sigma, const std::vector<double>& n_list,
                  const std::vector<double>& deltas) {
  if (!(theta_star > 0)) throw DomainError("margin_scan: theta* must be positive");
  if (!(sigma > 0)) throw DomainError("margin_scan: sigma must be positive");
  Table t{{"n", "price", "revenue", "intensive", "extensive", "cross", "ext_int"}, {}};
  for (double dl : deltas) t.columns.push_back("scaled_ext_delta_" + format_number(dl));
  for (double n : n_list) {
    if (!(n >= 2)) throw DomainError("margin_scan: n must be at least 2");
    single_good::ScalarBelief belief{theta_star, sigma / std::sqrt(n)};
    single_good::PriceResult r = single_good::optimal_price(belief);
    single_good::MarginReport m = single_good::margin_decomposition(theta_star, r.price, belief);
    std::vector<double> row{n, r.price, r.revenue, m.intensive, m.extensive, m.cross,
                            m.extensive / m.intensive};
    const double rate = std::sqrt(std::log(n) / n);
    for (double dl : deltas) {
      // F_n(p_n) = Phi(-delta sqrt(ln n)) for p_n = theta* - delta sqrt(ln n) sigma / sqrt(n)
      row.push_back(theta_star * gauss::std_normal_cdf(-dl * std::sqrt(std::log(n))) / rate);
    }
    t.add_row(row);
  }
  return t;
}

// ---------------------------------------------------------------------------

void Prior::validate(int dim) const {
  if (kind == Kind::point) {
    if (point.size() != dim || !point.allFinite()) throw DomainError("prior: point mass has wrong size");
  }
  if (box.lo.size() != dim || box.hi.size() != dim) throw DomainError("prior: box has wrong size");
  if (!((box.hi - box.lo).minCoeff() > 0)) throw DomainError("prior: box must have positive width");
  if (kind == Kind::point && !box.contains(point)) throw DomainError("prior: point mass outside the box");
  if (kind == Kind::beta && !(a > 0 && b > 0)) throw DomainError("prior: beta shapes must be positive");
}

Vec Prior::draw(std::uint64_t seed) const {
  if (kind == Kind::point) return point;
  std::mt19937_64 rng(seed);
  Vec out(box.lo.size());
  for (Eigen::Index g = 0; g < out.size(); ++g) {
    double u;
    if (kind == Kind::uniform) {
      u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    } else {
      double x = std::gamma_distribution<double>(a, 1.0)(rng);
      double y = std::gamma_distribution<double>(b, 1.0)(rng);
      u = x / (x + y);
    }
    out(g) = box.lo(g) + u * (box.hi(g) - box.lo(g));
  }
  return out;
}

void MonteCarloConfig::validate() const {
  prior.validate(model.dim());
  if (replications < 1) throw DomainError("monte carlo: replications must be at least 1");
  if (n_list.empty()) throw DomainError("monte carlo: empty n list");
  for (int n : n_list)
    if (n < 2) throw DomainError("monte carlo: n must be at least 2");
}

double mle_price(const Vec& theta_hat, const Mat& fisher_matrix, double n) {
  Eigen::LLT<Mat> llt(fisher_matrix);
  if (llt.info() != Eigen::Success) throw NumericError("mle_price: empirical Fisher matrix not SPD");
  const Vec one = Vec::Ones(theta_hat.size());
  const double lam = std::sqrt(one.dot(llt.solve(one)));
  return theta_hat.sum() - std::sqrt(std::log(n) / n) * lam;
}

namespace {

struct Draw {
  bool ok = false;
  double sale = 0, revenue = 0, value = 0, lambda = 0;
};

struct Moments {
  double mean = 0, se = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return {kNaN, kNaN};
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {m.mean, kNaN};
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return m;
}

}  // namespace

Table mle_pricing_experiment(const MonteCarloConfig& config) {
  config.validate();
  const signals::Box est_box = signals::inflate(config.prior.box);
  Table t{{"n", "reps", "sale_freq", "sale_se", "revenue", "revenue_se", "value", "gap", "gap_se",
           "scaled_gap", "scaled_gap_se", "lambda_g", "mle_failures"},
          {}};
  const std::size_t reps = static_cast<std::size_t>(config.replications);
  for (std::size_t k = 0; k < config.n_list.size(); ++k) {
    const int n = config.n_list[k];
    auto one = [&](std::size_t r) {
      const std::uint64_t s = split_seed(config.seed, k * reps + r);
      Draw d;
      Vec theta = config.prior.draw(split_seed(s, 0));
      signals::SignalDataset data = signals::sample(config.model, theta, n, split_seed(s, 1));
      Vec theta_hat;
      try {
        theta_hat = signals::mle(config.model, data, est_box);
      } catch (const signals::EstimationError&) {
        return d;
      }
      Mat info = signals::empirical_fisher(config.model, data, theta_hat).matrix;
      double price;
      try {
        price = mle_price(theta_hat, info, n);
      } catch (const NumericError&) {
        return d;
      }
      Mat exact = signals::fisher(config.model, theta).matrix;
      const Vec ones = Vec::Ones(theta.size());
      d.ok = true;
      d.value = theta.sum();
      d.sale = price <= d.value ? 1.0 : 0.0;
      d.revenue = d.sale * price;
      d.lambda = std::sqrt(ones.dot(exact.llt().solve(ones)));
      return d;
    };
    std::vector<Draw> draws = parallel_map<Draw>(reps, one, config.exec);
    std::vector<double> sale, rev, val, gap, lam;
    int failures = 0;
    for (const Draw& d : draws) {
      if (!d.ok) {
        ++failures;
        continue;
      }
      sale.push_back(d.sale);
      rev.push_back(d.revenue);
      val.push_back(d.value);
      gap.push_back(d.value - d.revenue);
      lam.push_back(d.lambda);
    }
    if (failures > 0.01 * static_cast<double>(reps))
      throw NumericError("mle_pricing_experiment: estimation failed on more than 1% of replications");
    Moments ms = moments(sale), mr = moments(rev), mv = moments(val), mg = moments(gap), ml = moments(lam);
    const double sc = scale_factor(n);
    t.add_row({static_cast<double>(n), static_cast<double>(sale.size()), ms.mean, ms.se, mr.mean, mr.se,
               mv.mean, mg.mean, mg.se, mg.mean * sc, mg.se * sc, ml.mean, static_cast<double>(failures)});
  }
  return t;
}

// ---------------------------------------------------------------------------

Table tail_rate_scan(const single_good::TailFamily& family, double theta_star,
                     const std::vector<double>& n_list) {
  if (!(theta_star > 0)) throw DomainError("tail_rate_scan: theta* must be positive");
  Table t{{"n", "price", "revenue", "gamma", "gap", "rate", "ratio", "ext_int", "elasticity"}, {}};
  const double am = family.alpha_minus(), bm = family.beta_minus();
  for (double n : n_list) {
    if (!(n >= 2)) throw DomainError("tail_rate_scan: n must be at least 2");
    single_good::TailPriceResult r = single_good::tail_optimal_price(family, theta_star, n);
    const double gap = theta_star - r.revenue;
    const double rate = std::pow(std::log(n) / (2 * am), 1.0 / bm) / std::sqrt(n);
    t.add_row({n, r.price, r.revenue, r.gamma, gap, rate, gap / rate,
               r.margins.extensive / r.margins.intensive, single_good::elasticity_ratio(family, r.gamma)});
  }
  return t;
}

}  // namespace screenlab::exp
