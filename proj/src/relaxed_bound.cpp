#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "screenlab/errors.hpp"
#include "screenlab/gauss.hpp"
#include "screenlab/mechanisms.hpp"
#include "screenlab/onedim.hpp"
#include "screenlab/quadrature.hpp"
#include "screenlab/single_good.hpp"

namespace screenlab::mech {

namespace {

struct Node {
  Vec zeta;
  double weight;
};

// Standard normal nodes on `dims` axes: composite Legendre times the density
// for a single axis, tensor Gauss-Hermite otherwise.
std::vector<Node> segment_nodes(int dims, const RelaxedOptions& opts) {
  std::vector<Node> nodes;
  if (dims == 0) {
    nodes.push_back({Vec(0), 1.0});
    return nodes;
  }
  if (dims == 1) {
    double panel = 2 * opts.half_width / opts.panels;
    quad::Rule r = quad::composite_legendre(-opts.half_width, opts.half_width, {0.0}, panel * (1 + 1e-12),
                                            opts.panel_order);
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      nodes.push_back({Vec::Constant(1, r.nodes[i]), r.weights[i] * gauss::std_normal_pdf(r.nodes[i])});
    return nodes;
  }
  quad::Rule gh = quad::gauss_hermite(opts.hermite_order);
  const int q = opts.hermite_order;
  int total = 1;
  for (int k = 0; k < dims; ++k) total *= q;
  if (total > 10000) throw DomainError("relaxed_upper_bound: more than 1e4 quadrature nodes");
  for (int i = 0; i < total; ++i) {
    Vec z(dims);
    double w = 1;
    int rem = i;
    for (int k = 0; k < dims; ++k) {
      z(k) = gh.nodes[rem % q];
      w *= gh.weights[rem % q];
      rem /= q;
    }
    nodes.push_back({z, w});
  }
  return nodes;
}

}  // namespace

RelaxedResult relaxed_upper_bound(const MultiGoodEnv& env, const PriceMenu& mixed_menu,
                                  double mixed_revenue, const RelaxedOptions& opts) {
  env.validate();
  if (env.cost) throw DomainError("relaxed_upper_bound: cost-free environment required");
  const int d = env.goods(), nb = env.bundles();
  if (static_cast<int>(mixed_menu.prices.size()) != nb)
    throw DomainError("relaxed_upper_bound: menu size mismatch");
  const Mat cov = env.belief_cov();
  const Vec ones = Vec::Ones(d);
  const double grand_var = ones.dot(cov * ones);
  const Vec u = cov * ones / std::sqrt(grand_var);

  // theta = center(zeta) + u tau with tau ~ N(0, 1) independent of zeta.
  Mat b_times_c = Mat::Zero(d, std::max(d - 1, 0));
  if (d >= 2) {
    gauss::SegmentDecomposition seg = gauss::make_segments(cov);
    Mat c = seg.z_cov.llt().matrixL();
    b_times_c = seg.b_matrix * c;
  }
  const std::vector<Node> nodes = segment_nodes(d - 1, opts);

  Vec beta(nb), seed(nb);
  for (int b = 0; b < nb; ++b) {
    beta(b) = gauss::bundle_indicator(b, d).dot(u);
    seed(b) = mixed_menu.prices[b];
  }
  const unsigned grand = static_cast<unsigned>(nb - 1);

  auto solve_node = [&](std::size_t i) {
    const Node& nd = nodes[i];
    Vec center = env.theta_star + b_times_c * nd.zeta;
    onedim::OneDimEnv seg_env;
    seg_env.alpha0.resize(nb);
    for (int b = 0; b < nb; ++b) seg_env.alpha0(b) = gauss::bundle_indicator(b, d).dot(center);
    seg_env.beta = beta;
    seg_env.dist = onedim::TypeDistribution::gaussian(0.0, 1.0);
    seg_env.null_index = 0;
    onedim::SimpleOptions so;
    so.seed_prices = seed;
    so.restarts = opts.restarts;
    so.rng_seed = split_seed(0x5e9, i);
    onedim::SimpleResult r = onedim::optimal_simple_mechanism(seg_env, so);
    single_good::PriceResult bd = single_good::optimal_price({seg_env.alpha0(grand), beta(grand)});
    return SegmentReport{nd.zeta, nd.weight, r.value, r.seed_value, bd.price, bd.revenue, r.converged};
  };
  std::vector<SegmentReport> reports = parallel_map<SegmentReport>(nodes.size(), solve_node, opts.exec);

  RelaxedResult out{0.0, 0.0, mixed_revenue, {}, 0};
  double wsum = 0;
  for (const SegmentReport& r : reports) {
    out.value += r.weight * r.value;
    out.bundling_average += r.weight * r.bundling_value;
    wsum += r.weight;
    if (!r.converged) ++out.nonconverged;
  }
  out.value /= wsum;
  out.bundling_average /= wsum;
  if (out.nonconverged > 0.01 * static_cast<double>(reports.size()))
    throw NumericError("relaxed_upper_bound: segment solver failed on more than 1% of nodes");
  out.segments = std::move(reports);
  return out;
}

RelaxedResult relaxed_upper_bound(const MultiGoodEnv& env, const RelaxedOptions& opts) {
  MixedResult mix = mixed_bundling_revenue(env);
  return relaxed_upper_bound(env, mix.menu, mix.breakdown.revenue, opts);
}

}  // namespace screenlab::mech
