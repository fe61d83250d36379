#include "screenlab/onedim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "screenlab/errors.hpp"
#include "screenlab/gauss.hpp"
#include "screenlab/lp.hpp"
#include "screenlab/optimize.hpp"

namespace screenlab::onedim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double env_scale(const OneDimEnv& env) {
  return 1.0 + env.alpha0.cwiseAbs().maxCoeff() + env.beta.cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------- types

TypeDistribution TypeDistribution::gaussian(double mean, double sd) {
  if (!std::isfinite(mean) || !(sd > 0) || !std::isfinite(sd))
    throw DomainError("TypeDistribution: need finite mean and sd > 0");
  TypeDistribution d;
  d.mean_ = mean;
  d.sd_ = sd;
  return d;
}

TypeDistribution TypeDistribution::discrete(std::vector<double> points,
                                            std::vector<double> weights) {
  if (points.empty() || points.size() != weights.size())
    throw DomainError("TypeDistribution: points and weights must be nonempty and aligned");
  std::map<double, double> merged;
  double total = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]) || !(weights[i] >= 0))
      throw DomainError("TypeDistribution: bad point or weight");
    merged[points[i]] += weights[i];
    total += weights[i];
  }
  if (!(total > 0)) throw DomainError("TypeDistribution: weights sum to zero");
  TypeDistribution d;
  d.discrete_ = true;
  for (auto& [p, w] : merged) {
    d.points_.push_back(p);
    d.weights_.push_back(w / total);
  }
  d.mean_ = 0;
  for (std::size_t i = 0; i < d.points_.size(); ++i) d.mean_ += d.points_[i] * d.weights_[i];
  double var = 0;
  for (std::size_t i = 0; i < d.points_.size(); ++i)
    var += d.weights_[i] * (d.points_[i] - d.mean_) * (d.points_[i] - d.mean_);
  d.sd_ = std::sqrt(var);
  return d;
}

double TypeDistribution::mean() const { return mean_; }

double TypeDistribution::cdf(double x) const {
  if (!discrete_) {
    if (x == kInf) return 1;
    if (x == -kInf) return 0;
    return gauss::std_normal_cdf((x - mean_) / sd_);
  }
  double c = 0;
  for (std::size_t i = 0; i < points_.size() && points_[i] <= x; ++i) c += weights_[i];
  return c;
}

double TypeDistribution::mass(double a, double b, bool a_closed, bool b_closed) const {
  if (!(b >= a)) return 0;
  if (!discrete_) {
    if (a == b) return 0;
    double za = a == -kInf ? -kInf : (a - mean_) / sd_;
    double zb = b == kInf ? kInf : (b - mean_) / sd_;
    if (za > 0) {
      double sa = std::isfinite(za) ? gauss::std_normal_sf(za) : 0.0;
      double sb = std::isfinite(zb) ? gauss::std_normal_sf(zb) : 0.0;
      return sa - sb;
    }
    double ca = std::isfinite(za) ? gauss::std_normal_cdf(za) : 0.0;
    double cb = std::isfinite(zb) ? gauss::std_normal_cdf(zb) : 1.0;
    return cb - ca;
  }
  double m = 0;
  auto lo = std::lower_bound(points_.begin(), points_.end(), a);
  for (auto it = lo; it != points_.end() && *it <= b; ++it) {
    double p = *it;
    if (p == a && !a_closed) continue;
    if (p == b && !b_closed) continue;
    m += weights_[it - points_.begin()];
  }
  return m;
}

double TypeDistribution::lower() const { return discrete_ ? points_.front() : -kInf; }
double TypeDistribution::upper() const { return discrete_ ? points_.back() : kInf; }

void OneDimEnv::validate() const {
  if (alpha0.size() < 1 || alpha0.size() != beta.size())
    throw DomainError("OneDimEnv: alpha0 and beta must be nonempty and aligned");
  if (!alpha0.allFinite() || !beta.allFinite()) throw DomainError("OneDimEnv: non-finite entries");
  if (null_index < 0 || null_index >= size()) throw DomainError("OneDimEnv: null index out of range");
  if (alpha0(null_index) != 0.0 || beta(null_index) != 0.0)
    throw DomainError("OneDimEnv: null allocation must have alpha0 = beta = 0");
}

// ------------------------------------------------------------- envelope

double PiecewiseLinearEnvelope::g(double z) const {
  double v = -kInf;
  for (std::size_t i = 0; i < alpha.size(); ++i) v = std::max(v, alpha[i] - z * beta[i]);
  return v;
}

PiecewiseLinearEnvelope dual_envelope(const OneDimEnv& env) {
  env.validate();
  const int m = env.size();
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (env.beta(a) != env.beta(b)) return env.beta(a) < env.beta(b);
    return env.alpha0(a) > env.alpha0(b);
  });
  // Upper concave hull of the points (beta_l, alpha0_l); collinear points dropped.
  std::vector<int> hull;
  for (int l : idx) {
    if (!hull.empty() && env.beta(hull.back()) == env.beta(l)) continue;
    while (hull.size() >= 2) {
      int o = hull[hull.size() - 2], a = hull.back();
      double cross = (env.beta(a) - env.beta(o)) * (env.alpha0(l) - env.alpha0(o)) -
                     (env.alpha0(a) - env.alpha0(o)) * (env.beta(l) - env.beta(o));
      if (cross >= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(l);
  }
  PiecewiseLinearEnvelope e;
  e.active_indices = hull;
  for (int l : hull) {
    e.alpha.push_back(env.alpha0(l));
    e.beta.push_back(env.beta(l));
  }
  for (std::size_t i = 0; i + 1 < hull.size(); ++i)
    e.breakpoints_z.push_back((e.alpha[i + 1] - e.alpha[i]) / (e.beta[i + 1] - e.beta[i]));
  return e;
}

double h_value(const PiecewiseLinearEnvelope& e, double x) {
  const double lo = e.beta.front(), hi = e.beta.back();
  const double tol = 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  if (!(x >= lo - tol && x <= hi + tol)) throw DomainError("h_value: x outside [beta_min, beta_max]");
  if (e.breakpoints_z.empty()) return e.alpha.front();
  x = std::clamp(x, lo, hi);
  // H(x) = min_z z x + G(z); the minimum sits at a breakpoint.
  double h = kInf;
  for (double z : e.breakpoints_z) h = std::min(h, z * x + e.g(z));
  return h;
}

double h_value(const OneDimEnv& env, double x) { return h_value(dual_envelope(env), x); }

BaseLottery base_lottery(const OneDimEnv& env) {
  PiecewiseLinearEnvelope e = dual_envelope(env);
  const int m = env.size();
  const double h0 = h_value(e, 0.0);
  const double tol = 1e-12 * env_scale(env);
  BaseLottery out{{Vec::Zero(m)}, h0};
  // Deterministic allocations first, lowest index among ties.
  for (int l = 0; l < m; ++l) {
    if (env.beta(l) == 0.0 && env.alpha0(l) >= h0 - tol) {
      out.lottery.probs(l) = 1.0;
      out.value = env.alpha0(l);
      return out;
    }
  }
  std::size_t k = 0;
  while (k + 1 < e.beta.size() && e.beta[k + 1] < 0) ++k;
  // e.beta[k] < 0 < e.beta[k+1]
  double bl = e.beta[k], br = e.beta[k + 1];
  double wr = -bl / (br - bl);
  out.lottery.probs(e.active_indices[k]) = 1.0 - wr;
  out.lottery.probs(e.active_indices[k + 1]) = wr;
  out.value = (1.0 - wr) * e.alpha[k] + wr * e.alpha[k + 1];
  return out;
}

// ------------------------------------------------------- step utilities

int StepUtility::piece_of(double tau) const {
  const int k = static_cast<int>(cuts.size());
  int j = static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), tau) - cuts.begin());
  if (j == k || tau < cuts[j]) return j;
  int r = j;
  while (r + 1 < k && cuts[r + 1] == tau) ++r;
  return slopes[r + 1] > 0 ? r + 1 : j;
}

double StepUtility::value(double tau) const {
  int p = piece_of(tau);
  return slopes[p] * tau + offsets[p];
}

double StepUtility::piece_mass(const TypeDistribution& dist, int j) const {
  double a = j > 0 ? cuts[j - 1] : -kInf;
  double b = j < static_cast<int>(cuts.size()) ? cuts[j] : kInf;
  if (!dist.is_discrete()) return dist.mass(a, b, false, false);
  bool ac = std::isfinite(a) && piece_of(a) == j;
  bool bc = std::isfinite(b) && piece_of(b) == j;
  return dist.mass(a, b, ac, bc);
}

StepUtility StepUtility::anchored(std::vector<double> cuts, std::vector<double> slopes, double lo,
                                  double hi) {
  const int K = static_cast<int>(slopes.size());
  if (K < 1 || static_cast<int>(cuts.size()) != K - 1)
    throw DomainError("StepUtility: need one more slope than cuts");
  for (int j = 0; j + 1 < K; ++j) {
    if (slopes[j + 1] < slopes[j]) throw DomainError("StepUtility: slopes must be nondecreasing");
    if (j + 1 < K - 1 && cuts[j + 1] < cuts[j]) throw DomainError("StepUtility: cuts must be nondecreasing");
  }
  StepUtility v{std::move(cuts), std::move(slopes), std::vector<double>(K, 0.0)};
  auto left_edge = [&](int j) { return j > 0 ? v.cuts[j - 1] : -kInf; };
  auto right_edge = [&](int j) { return j < K - 1 ? v.cuts[j] : kInf; };
  int js = 0;
  while (js < K && v.slopes[js] < 0) ++js;
  double tmin;
  if (js == K) {
    tmin = std::min(hi, right_edge(K - 1));
  } else if (v.slopes[js] == 0) {
    double a = std::max(left_edge(js), lo), b = std::min(right_edge(js), hi);
    tmin = std::isfinite(a) ? a : (std::isfinite(b) ? b : 0.0);
  } else {
    tmin = std::clamp(left_edge(js), lo, hi);
  }
  if (!std::isfinite(tmin)) throw DomainError("StepUtility: indirect utility unbounded below");
  int p = v.piece_of(tmin);
  v.offsets[p] = -v.slopes[p] * tmin;
  for (int j = p; j + 1 < K; ++j)
    v.offsets[j + 1] = v.slopes[j] == v.slopes[j + 1]
                           ? v.offsets[j]
                           : v.offsets[j] + (v.slopes[j] - v.slopes[j + 1]) * v.cuts[j];
  for (int j = p; j > 0; --j)
    v.offsets[j - 1] = v.slopes[j] == v.slopes[j - 1]
                           ? v.offsets[j]
                           : v.offsets[j] + (v.slopes[j] - v.slopes[j - 1]) * v.cuts[j - 1];
  return v;
}

double value_from_indirect_utility(const OneDimEnv& env, const StepUtility& v) {
  PiecewiseLinearEnvelope e = dual_envelope(env);
  for (int j = 0; j + 1 < v.pieces(); ++j)
    if (v.slopes[j + 1] < v.slopes[j]) throw DomainError("value_from_indirect_utility: V not convex");
  double total = 0;
  for (int j = 0; j < v.pieces(); ++j) {
    double mass = v.piece_mass(env.dist, j);
    if (mass <= 0) continue;
    // E[H(V') + tau V' - V] on the piece reduces to mass (H(s) - offset).
    total += mass * (h_value(e, v.slopes[j]) - v.offsets[j]);
  }
  return total;
}

// ------------------------------------------------------------ mechanisms

Vec SimpleMechanism::allocation_at(double tau) const { return items[utility.piece_of(tau)].probs; }

double SimpleMechanism::transfer_at(double tau) const { return items[utility.piece_of(tau)].price; }

SimpleMechanism mechanism_from_menu(const OneDimEnv& env, const Vec& prices) {
  env.validate();
  const int m = env.size();
  if (prices.size() != m) throw DomainError("mechanism_from_menu: one price per allocation");
  struct Line {
    double slope, icpt, price;
    int l;
  };
  std::vector<Line> lines;
  for (int l = 0; l < m; ++l) {
    double p = l == env.null_index ? 0.0 : prices(l);
    if (!std::isfinite(p)) continue;
    lines.push_back({env.beta(l), env.alpha0(l) - p, p, l});
  }
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    if (a.icpt != b.icpt) return a.icpt > b.icpt;
    return a.price > b.price;
  });
  auto cross = [](const Line& a, const Line& b) { return (a.icpt - b.icpt) / (b.slope - a.slope); };
  std::vector<Line> env_lines;
  for (const Line& ln : lines) {
    if (!env_lines.empty() && env_lines.back().slope == ln.slope) continue;
    while (env_lines.size() >= 2 &&
           cross(env_lines[env_lines.size() - 2], ln) <=
               cross(env_lines[env_lines.size() - 2], env_lines.back()))
      env_lines.pop_back();
    env_lines.push_back(ln);
  }
  SimpleMechanism mech;
  for (std::size_t i = 0; i < env_lines.size(); ++i) {
    const Line& ln = env_lines[i];
    if (i + 1 < env_lines.size()) mech.utility.cuts.push_back(cross(ln, env_lines[i + 1]));
    mech.utility.slopes.push_back(ln.slope);
    mech.utility.offsets.push_back(ln.icpt);
    Vec q = Vec::Zero(m);
    q(ln.l) = 1.0;
    mech.items.push_back({ln.l, q, ln.price});
  }
  mech.value = 0;
  for (int j = 0; j < mech.utility.pieces(); ++j) {
    double mass = mech.utility.piece_mass(env.dist, j);
    if (mass > 0) mech.value += mass * mech.items[j].price;
  }
  return mech;
}

namespace {

struct SlopeSet {
  std::vector<double> s;
  std::vector<double> h;
  std::vector<MenuItem> items;  // allocation realizing H at each slope
  int zero;                     // index of slope 0
};

SlopeSet slope_set(const OneDimEnv& env, const PiecewiseLinearEnvelope& e) {
  SlopeSet ss;
  std::vector<std::pair<double, int>> sl;
  for (std::size_t i = 0; i < e.beta.size(); ++i) sl.push_back({e.beta[i], static_cast<int>(i)});
  bool has_zero = std::any_of(e.beta.begin(), e.beta.end(), [](double b) { return b == 0.0; });
  if (!has_zero) sl.push_back({0.0, -1});
  std::sort(sl.begin(), sl.end());
  BaseLottery b0 = base_lottery(env);
  for (auto [s, vi] : sl) {
    ss.s.push_back(s);
    if (vi >= 0) {
      int l = e.active_indices[vi];
      Vec q = Vec::Zero(env.size());
      q(l) = 1.0;
      ss.h.push_back(e.alpha[vi]);
      ss.items.push_back({l, q, 0.0});
    } else {
      int det = -1;
      for (int l = 0; l < env.size(); ++l)
        if (b0.lottery.probs(l) == 1.0) det = l;
      ss.h.push_back(b0.value);
      ss.items.push_back({det, b0.lottery.probs, 0.0});
    }
    if (s == 0.0) ss.zero = static_cast<int>(ss.s.size()) - 1;
  }
  return ss;
}

// Exact optimum over nondecreasing slope assignments on a sorted discrete
// support (dynamic program over types x slopes).
std::vector<int> dp_assign(const std::vector<double>& tau, const std::vector<double>& w,
                           const SlopeSet& ss, double* value) {
  const int N = static_cast<int>(tau.size()), K = static_cast<int>(ss.s.size());
  std::vector<double> wlt(N, 0.0), wgt(N, 0.0);
  for (int i = 1; i < N; ++i) wlt[i] = wlt[i - 1] + w[i - 1];
  for (int i = N - 2; i >= 0; --i) wgt[i] = wgt[i + 1] + w[i + 1];
  std::vector<double> best(K), prev(K);
  std::vector<std::vector<int>> arg(N, std::vector<int>(K));
  for (int i = 0; i < N; ++i) {
    double gap_r = i + 1 < N ? tau[i + 1] - tau[i] : 0.0;
    double gap_l = i > 0 ? tau[i] - tau[i - 1] : 0.0;
    double run = -kInf;
    int run_arg = 0;
    for (int k = 0; k < K; ++k) {
      double s = ss.s[k];
      // Each type's slope shifts the utility of all types on the far side
      // of the zero-utility point by s times its gap.
      double pen = s >= 0 ? s * gap_r * wgt[i] : -s * gap_l * wlt[i];
      double phi = w[i] * (ss.h[k] + tau[i] * s) - pen;
      if (i == 0) {
        best[k] = phi;
        arg[i][k] = k;
      } else {
        if (prev[k] > run) {
          run = prev[k];
          run_arg = k;
        }
        best[k] = phi + run;
        arg[i][k] = run_arg;
      }
    }
    prev = best;
  }
  int kbest = static_cast<int>(std::max_element(prev.begin(), prev.end()) - prev.begin());
  *value = prev[kbest];
  std::vector<int> assign(N);
  assign[N - 1] = kbest;
  for (int i = N - 1; i > 0; --i) assign[i - 1] = arg[i][assign[i]];
  return assign;
}

// Cuts for a DP assignment on discrete support: an increasing slope step
// sits at the first type of the higher slope when that slope is positive,
// and at the last type of the lower slope otherwise.
std::vector<double> cuts_from_assignment(const std::vector<double>& tau,
                                         const std::vector<int>& assign, const SlopeSet& ss) {
  const int K = static_cast<int>(ss.s.size()), N = static_cast<int>(tau.size());
  std::vector<double> cuts(K - 1);
  for (int j = 0; j + 1 < K; ++j) {
    if (ss.s[j + 1] > 0) {
      int i = 0;
      while (i < N && assign[i] <= j) ++i;
      cuts[j] = i < N ? tau[i] : kInf;
    } else {
      int i = N - 1;
      while (i >= 0 && assign[i] > j) --i;
      cuts[j] = i >= 0 ? tau[i] : -kInf;
    }
  }
  return cuts;
}

SimpleMechanism build_mechanism(const OneDimEnv& env, const SlopeSet& ss, std::vector<double> cuts) {
  SimpleMechanism mech;
  mech.utility =
      StepUtility::anchored(std::move(cuts), ss.s, env.dist.lower(), env.dist.upper());
  for (int j = 0; j < mech.utility.pieces(); ++j) {
    MenuItem it = ss.items[j];
    it.price = ss.h[j] - mech.utility.offsets[j];
    mech.items.push_back(it);
  }
  mech.value = 0;
  for (int j = 0; j < mech.utility.pieces(); ++j) {
    double mass = mech.utility.piece_mass(env.dist, j);
    if (mass > 0) mech.value += mass * mech.items[j].price;
  }
  return mech;
}

// Revenue of the step utility with slopes ss.s and the given cuts under a
// Gaussian law; V vanishes on the zero-slope piece.
double gaussian_revenue(const TypeDistribution& dist, const SlopeSet& ss,
                        const std::vector<double>& c) {
  const int K = static_cast<int>(ss.s.size());
  double b_here = 0.0;
  double total = 0.0;
  auto piece_mass = [&](int j) {
    double a = j > 0 ? c[j - 1] : -kInf, b = j < K - 1 ? c[j] : kInf;
    return dist.mass(a, b, false, false);
  };
  total += ss.h[ss.zero] * piece_mass(ss.zero);
  for (int j = ss.zero + 1; j < K; ++j) {
    b_here += (ss.s[j - 1] - ss.s[j]) * c[j - 1];
    total += (ss.h[j] - b_here) * piece_mass(j);
  }
  b_here = 0.0;
  for (int j = ss.zero - 1; j >= 0; --j) {
    b_here += (ss.s[j + 1] - ss.s[j]) * c[j];
    total += (ss.h[j] - b_here) * piece_mass(j);
  }
  return total;
}

struct Refined {
  std::vector<double> cuts;
  double value;
  bool converged;
};

Refined refine_cuts(const TypeDistribution& dist, const SlopeSet& ss, std::vector<double> cuts,
                    double lo, double hi) {
  const int nc = static_cast<int>(cuts.size());
  for (double& c : cuts) c = std::clamp(c, lo, hi);
  for (int j = 1; j < nc; ++j) cuts[j] = std::max(cuts[j], cuts[j - 1]);
  double val = gaussian_revenue(dist, ss, cuts);
  bool converged = nc == 0;
  for (int sweep = 0; sweep < 200 && nc > 0; ++sweep) {
    double old = val;
    for (int j = 0; j < nc; ++j) {
      double a = j > 0 ? cuts[j - 1] : lo, b = j + 1 < nc ? cuts[j + 1] : hi;
      std::vector<double> trial = cuts;
      auto f = [&](double x) {
        trial[j] = x;
        return gaussian_revenue(dist, ss, trial);
      };
      opt::ScalarMax r = opt::golden_max(f, a, b, 1e-10 * dist.sd());
      if (r.fx > val) {
        cuts[j] = r.x;
        val = r.fx;
      }
    }
    if (val - old <= 1e-14 * (1.0 + std::abs(val))) {
      converged = true;
      break;
    }
  }
  return {cuts, val, converged};
}

}  // namespace

SimpleResult optimal_simple_mechanism(const OneDimEnv& env, const SimpleOptions& opts) {
  env.validate();
  PiecewiseLinearEnvelope e = dual_envelope(env);
  SlopeSet ss = slope_set(env, e);
  const int K = static_cast<int>(ss.s.size());

  SimpleResult res;
  res.seed_value = std::numeric_limits<double>::quiet_NaN();
  std::optional<SimpleMechanism> seed;
  if (opts.seed_prices) {
    seed = mechanism_from_menu(env, *opts.seed_prices);
    res.seed_value = seed->value;
  }

  if (env.dist.is_discrete()) {
    double v;
    std::vector<int> assign = dp_assign(env.dist.points(), env.dist.weights(), ss, &v);
    res.mechanism = build_mechanism(env, ss, cuts_from_assignment(env.dist.points(), assign, ss));
    res.converged = true;
  } else {
    const double m = env.dist.mean(), sd = env.dist.sd();
    const double lo = m - 12 * sd, hi = m + 12 * sd;
    std::vector<std::vector<double>> starts;

    // Seed 1: exact optimum on a truncated discretization of the law.
    {
      const int N = std::max(opts.grid, 10);
      const double a = -opts.truncation, h = 2 * opts.truncation / N;
      std::vector<double> tau(N), w(N);
      for (int i = 0; i < N; ++i) {
        tau[i] = m + sd * (a + (i + 0.5) * h);
        w[i] = env.dist.mass(m + sd * (a + i * h), m + sd * (a + (i + 1) * h), false, false);
      }
      double v;
      std::vector<int> assign = dp_assign(tau, w, ss, &v);
      std::vector<double> cuts(K - 1);
      for (int j = 0; j + 1 < K; ++j) {
        int first_above = 0;
        while (first_above < N && assign[first_above] <= j) ++first_above;
        if (first_above == N)
          cuts[j] = hi;
        else if (first_above == 0)
          cuts[j] = lo;
        else
          cuts[j] = 0.5 * (tau[first_above - 1] + tau[first_above]);
      }
      starts.push_back(cuts);
    }
    // Seed 2: the user menu projected onto the slope set.
    if (seed) {
      const StepUtility& su = seed->utility;
      const double tol = 1e-12 * env_scale(env);
      std::vector<double> cuts(K - 1);
      for (int j = 0; j + 1 < K; ++j) {
        int p = 0;
        while (p < su.pieces() && su.slopes[p] <= ss.s[j] + tol) ++p;
        cuts[j] = p == su.pieces() ? hi : (p == 0 ? lo : su.cuts[p - 1]);
      }
      starts.push_back(cuts);
    }
    std::mt19937_64 rng(opts.rng_seed);
    std::uniform_real_distribution<double> ud(1e-6, 1 - 1e-6);
    for (int r = 0; r < opts.restarts; ++r) {
      std::vector<double> cuts(K - 1);
      for (double& c : cuts) c = m + sd * gauss::std_normal_quantile(ud(rng));
      std::sort(cuts.begin(), cuts.end());
      starts.push_back(cuts);
    }

    Refined best{{}, -kInf, false};
    for (const auto& st : starts) {
      Refined r = refine_cuts(env.dist, ss, st, lo, hi);
      if (r.value > best.value) best = r;
    }
    res.mechanism = build_mechanism(env, ss, best.cuts);
    res.converged = best.converged;
  }
  res.mechanism.converged = res.converged;
  if (seed && seed->value > res.mechanism.value) {
    bool conv = res.converged;
    res.mechanism = *seed;
    res.mechanism.converged = conv;
  }
  res.value = res.mechanism.value;
  return res;
}

// --------------------------------------------------------------- LP oracle

LpOracleResult discrete_lp_oracle(const OneDimEnv& env, const std::vector<double>& points,
                                  const std::vector<double>& weights) {
  env.validate();
  TypeDistribution grid = TypeDistribution::discrete(points, weights);
  const std::vector<double>& tau = grid.points();
  const std::vector<double>& w = grid.weights();
  const int N = static_cast<int>(tau.size()), m = env.size();
  const int nq = N * m, nv = N, ns = N - 1;
  const int cols = nq + nv + 2 * ns, rows = N + 2 * ns;
  auto qi = [m](int i, int l) { return i * m + l; };
  auto vi = [nq](int i) { return nq + i; };

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows), c = Eigen::VectorXd::Zero(cols);
  for (int i = 0; i < N; ++i) {
    for (int l = 0; l < m; ++l) {
      trip.emplace_back(i, qi(i, l), 1.0);
      c(qi(i, l)) = -w[i] * (env.alpha0(l) + tau[i] * env.beta(l));
    }
    b(i) = 1.0;
    c(vi(i)) = w[i];
  }
  for (int i = 0; i < ns; ++i) {
    double gap = tau[i + 1] - tau[i];
    // V_{i+1} - V_i - gap beta.q_i - s+ = 0
    int r1 = N + i;
    trip.emplace_back(r1, vi(i + 1), 1.0);
    trip.emplace_back(r1, vi(i), -1.0);
    for (int l = 0; l < m; ++l)
      if (env.beta(l) != 0) trip.emplace_back(r1, qi(i, l), -gap * env.beta(l));
    trip.emplace_back(r1, nq + nv + i, -1.0);
    // V_i - V_{i+1} + gap beta.q_{i+1} - s- = 0
    int r2 = N + ns + i;
    trip.emplace_back(r2, vi(i), 1.0);
    trip.emplace_back(r2, vi(i + 1), -1.0);
    for (int l = 0; l < m; ++l)
      if (env.beta(l) != 0) trip.emplace_back(r2, qi(i + 1, l), gap * env.beta(l));
    trip.emplace_back(r2, nq + nv + ns + i, -1.0);
  }
  lp::Problem prob;
  prob.a.resize(rows, cols);
  prob.a.setFromTriplets(trip.begin(), trip.end());
  prob.b = b;
  prob.c = c;
  lp::Options lo;
  lo.tol = 1e-9;
  lp::Result sol = lp::solve(prob, lo);
  if (!sol.optimal) throw NumericError("discrete_lp_oracle: interior-point solver did not converge");

  LpOracleResult out;
  out.points = tau;
  out.iterations = sol.iterations;
  out.q.resize(N, m);
  out.t.resize(N);
  std::vector<double> util(N);
  for (int i = 0; i < N; ++i) {
    for (int l = 0; l < m; ++l) out.q(i, l) = std::max(sol.x(qi(i, l)), 0.0);
    out.q.row(i) /= out.q.row(i).sum();
    util[i] = std::max(sol.x(vi(i)), 0.0);
  }
  out.value = 0;
  for (int i = 0; i < N; ++i) {
    double a = (env.alpha0 + tau[i] * env.beta).dot(out.q.row(i).transpose());
    out.t(i) = a - util[i];
    out.value += w[i] * out.t(i);
  }
  out.max_ic_violation = 0;
  for (int i = 0; i < N; ++i) {
    Vec ai = env.alpha0 + tau[i] * env.beta;
    double own = ai.dot(out.q.row(i).transpose()) - out.t(i);
    out.max_ic_violation = std::max(out.max_ic_violation, -own);
    for (int j = 0; j < N; ++j)
      out.max_ic_violation =
          std::max(out.max_ic_violation, ai.dot(out.q.row(j).transpose()) - out.t(j) - own);
  }
  return out;
}

}  // namespace screenlab::onedim
