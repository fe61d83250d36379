// screenlab: run the pricing and screening experiments and write CSV/JSON artifacts.
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "screenlab/errors.hpp"
#include "screenlab/experiments.hpp"
#include "screenlab/gauss.hpp"
#include "screenlab/onedim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace screenlab;

namespace {

struct OptSpec {
  std::string name;
  std::string fallback;  // empty means required (or optional without default)
  std::string help;
  bool required = false;
};

const std::map<std::string, std::vector<OptSpec>>& command_specs() {
  static const std::map<std::string, std::vector<OptSpec>> specs = {
      {"figure1",
       {{"rho", "-0.5,0,0.5", "correlations of the inverse Fisher matrix"},
        {"n", "1,2,5,10,20,50,100,200,500", "sample sizes"},
        {"panels", "64", "quadrature panels for the segment average"},
        {"restarts", "5", "random restarts per segment"}}},
      {"rates",
       {{"theta", "0.3,0.3", "true type"},
        {"rho", "0", "correlation (two goods)"},
        {"inv-fisher", "", "row-major inverse Fisher matrix, overrides rho"},
        {"n", "1e2,1e3,1e4,1e5,1e6,1e7,1e8,1e9,1e10", "sample sizes"},
        {"mixed", "1", "include mixed bundling (0/1)"}}},
      {"margins",
       {{"theta", "1", "true value"},
        {"sigma", "1", "signal noise"},
        {"n", "1e2,1e3,1e4,1e5,1e6,1e7,1e8,1e9,1e10", "sample sizes"},
        {"deltas", "0.5,0.9,0.99,1", "underpricing coefficients"}}},
      {"mle-price",
       {{"seed", "", "random seed", true},
        {"model", "logistic", "logistic or gaussian"},
        {"beta", "2", "logistic slope"},
        {"ref-prices", "0.5,0.5", "logistic reference prices"},
        {"cov", "1,0,0,1", "row-major signal covariance (gaussian model)"},
        {"prior", "point", "point, uniform or beta"},
        {"prior-point", "0.5,0.5", "point-mass location"},
        {"box-lo", "0,0", "lower corner of the type box"},
        {"box-hi", "1,1", "upper corner of the type box"},
        {"prior-a", "2", "beta prior shape a"},
        {"prior-b", "2", "beta prior shape b"},
        {"n", "100,400,1600", "sample sizes"},
        {"reps", "10000", "replications per sample size"}}},
      {"tails",
       {{"family", "laplace", "gaussian or laplace"},
        {"scale", "1", "sigma (gaussian) or b (laplace)"},
        {"theta", "1", "true value"},
        {"n", "1e2,1e3,1e4,1e5,1e6,1e7,1e8,1e9,1e10,1e11,1e12", "sample sizes"}}},
      {"onedim-demo",
       {{"alpha0", "0,0.3,0.3,0.6", "intercepts; entry 0 is the null allocation"},
        {"beta", "0,0.5,0.5,1", "slopes"},
        {"mean", "0", "type mean"},
        {"sd", "1", "type sd"},
        {"lp-points", "400", "grid size of the discrete LP check (0 to skip)"}}},
      {"single-bundle",
       {{"theta", "0.3,0.3", "true type"},
        {"rho", "0", "correlation (two goods)"},
        {"inv-fisher", "", "row-major inverse Fisher matrix, overrides rho"},
        {"n", "100", "sample size"},
        {"cost", "0,0,0,0", "cost per bundle mask, entry 0 must be 0"}}},
  };
  return specs;
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || b == e) throw DomainError("invalid number for " + key + ": '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  if (out.empty()) throw DomainError("empty list for " + key);
  return out;
}

int parse_int(const std::string& s, const std::string& key) {
  double v = parse_double(s, key);
  if (v != std::floor(v) || std::abs(v) > 2e9) throw DomainError(key + " must be an integer");
  return static_cast<int>(v);
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd square_matrix(const std::vector<double>& v, int d, const std::string& key) {
  if (static_cast<int>(v.size()) != d * d) throw DomainError(key + " needs " + std::to_string(d * d) + " entries");
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v[i * d + j];
  return m;
}

using Config = std::map<std::string, std::string>;

Eigen::MatrixXd inv_fisher_from(const Config& c, int d) {
  if (!c.at("inv-fisher").empty()) return square_matrix(parse_list(c.at("inv-fisher"), "inv-fisher"), d, "inv-fisher");
  if (d != 2) throw DomainError("rho only describes two goods; pass --inv-fisher");
  double rho = parse_double(c.at("rho"), "rho");
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(0, 1) = m(1, 0) = rho;
  return m;
}

// Flat key=value file; '#' starts a comment.
Config read_key_value(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot read config " + path.string());
  Config out;
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw DomainError("config line without '=': " + line);
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

Config read_config(const fs::path& path, const std::string& command) {
  if (path.extension() != ".json") return read_key_value(path);
  std::ifstream is(path);
  if (!is) throw DomainError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed config json: ") + e.what());
  }
  if (j.contains("command") && j["command"] != command)
    throw DomainError("config was written for command " + j["command"].get<std::string>());
  Config out;
  for (auto& [k, v] : j.at("config").items()) out[k] = v.get<std::string>();
  return out;
}

struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  json meta = json::object();
};

json table_summary(const Table& t) { return {{"columns", t.columns}, {"rows", t.rows.size()}}; }

Artifacts run_figure1(const Config& c) {
  std::vector<double> rhos = parse_list(c.at("rho"), "rho"), grid = parse_list(c.at("n"), "n");
  exp::Figure1Options opts;
  opts.relaxed.panels = parse_int(c.at("panels"), "panels");
  opts.relaxed.restarts = parse_int(c.at("restarts"), "restarts");
  if (opts.relaxed.panels < 2 || opts.relaxed.panels % 2) throw DomainError("panels must be even and >= 2");
  if (opts.relaxed.restarts < 0) throw DomainError("restarts must be >= 0");
  for (double n : grid)
    if (!(n >= 1)) throw DomainError("n must be at least 1");
  std::vector<exp::ConvergenceCurve> curves = exp::figure1_curves(rhos, grid, opts);

  Artifacts a;
  Table all{{"rho"}, {}};
  all.columns.insert(all.columns.end(), curves[0].table.columns.begin(), curves[0].table.columns.end());
  int flagged = 0;
  for (const auto& cv : curves) {
    for (const auto& r : cv.table.rows) {
      std::vector<double> row{cv.rho};
      row.insert(row.end(), r.begin(), r.end());
      all.add_row(row);
      if (r[cv.table.index_of("chain_ok")] != 1) ++flagged;
    }
    a.files.push_back({"figure1_rho_" + format_number(cv.rho) + ".csv", to_csv(cv.table)});
  }
  a.files.insert(a.files.begin(), {"figure1.csv", to_csv(all)});
  a.meta["env"] = {{"theta_star", {0.3, 0.3}}, {"inv_fisher", "[[1, rho], [rho, 1]]"}};
  a.meta["quadrature"] = {{"menu_inner", "composite Gauss-Legendre split at choice switches, order 8"},
                          {"segments", {{"panels", opts.relaxed.panels}, {"panel_order", opts.relaxed.panel_order},
                                        {"half_width", opts.relaxed.half_width}}}};
  a.meta["flagged_rows"] = flagged;
  a.meta["note"] = "R_relaxed is the relaxed-problem upper bound standing in for the second-best";
  a.meta["table"] = table_summary(all);
  return a;
}

Artifacts run_rates(const Config& c) {
  Eigen::VectorXd theta = to_vec(parse_list(c.at("theta"), "theta"));
  Eigen::MatrixXd j = inv_fisher_from(c, static_cast<int>(theta.size()));
  exp::RateOptions opts;
  opts.include_mixed = parse_int(c.at("mixed"), "mixed") != 0;
  Table t = exp::rate_scan(theta, j, parse_list(c.at("n"), "n"), opts);
  Artifacts a;
  a.files.push_back({"rates.csv", to_csv(t)});
  auto dev = [&](const std::string& col) {
    std::vector<double> out;
    for (double v : t.column(col)) out.push_back(std::abs(v - 1));
    return out;
  };
  a.meta["trend"] = {{"bd_lambda_G_decreasing_steps", exp::decreasing_tail_steps(dev("ratio_bd_G"))},
                     {"sep_lambda_sum_decreasing_steps", exp::decreasing_tail_steps(dev("ratio_sep_sum"))}};
  a.meta["table"] = table_summary(t);
  return a;
}

Artifacts run_margins(const Config& c) {
  Table t = exp::margin_scan(parse_double(c.at("theta"), "theta"), parse_double(c.at("sigma"), "sigma"),
                             parse_list(c.at("n"), "n"), parse_list(c.at("deltas"), "deltas"));
  Artifacts a;
  a.files.push_back({"margins.csv", to_csv(t)});
  a.meta["ext_int_strictly_decreasing"] = exp::strictly_decreasing(t.column("ext_int"));
  a.meta["table"] = table_summary(t);
  return a;
}

Artifacts run_mle(const Config& c) {
  exp::MonteCarloConfig mc;
  const std::string& model = c.at("model");
  int d;
  if (model == "logistic") {
    Eigen::VectorXd p = to_vec(parse_list(c.at("ref-prices"), "ref-prices"));
    double beta = parse_double(c.at("beta"), "beta");
    if (!(beta > 0)) throw DomainError("beta must be positive");
    mc.model = signals::LogisticPurchase{beta, p};
    d = static_cast<int>(p.size());
  } else if (model == "gaussian") {
    std::vector<double> cov = parse_list(c.at("cov"), "cov");
    d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cov.size()))));
    Eigen::MatrixXd m = square_matrix(cov, d, "cov");
    gauss::require_spd(m, "cov");
    mc.model = signals::GaussianLocation{m};
  } else {
    throw DomainError("model must be logistic or gaussian");
  }
  const std::string& prior = c.at("prior");
  if (prior == "point") mc.prior.kind = exp::Prior::Kind::point;
  else if (prior == "uniform") mc.prior.kind = exp::Prior::Kind::uniform;
  else if (prior == "beta") mc.prior.kind = exp::Prior::Kind::beta;
  else throw DomainError("prior must be point, uniform or beta");
  mc.prior.point = to_vec(parse_list(c.at("prior-point"), "prior-point"));
  mc.prior.box = {to_vec(parse_list(c.at("box-lo"), "box-lo")), to_vec(parse_list(c.at("box-hi"), "box-hi"))};
  mc.prior.a = parse_double(c.at("prior-a"), "prior-a");
  mc.prior.b = parse_double(c.at("prior-b"), "prior-b");
  for (double n : parse_list(c.at("n"), "n")) mc.n_list.push_back(parse_int(format_number(n), "n"));
  mc.replications = parse_int(c.at("reps"), "reps");
  double seed = parse_double(c.at("seed"), "seed");
  if (seed < 0 || seed != std::floor(seed) || seed > 9.007e15) throw DomainError("seed must be a nonnegative integer");
  mc.seed = static_cast<std::uint64_t>(seed);
  if (d != static_cast<int>(mc.prior.box.lo.size())) throw DomainError("box dimension does not match the model");
  Table t = exp::mle_pricing_experiment(mc);
  Artifacts a;
  a.files.push_back({"mle-price.csv", to_csv(t)});
  a.meta["seed_derivation"] = "splitmix64(seed, n_index * reps + replication)";
  a.meta["table"] = table_summary(t);
  return a;
}

Artifacts run_tails(const Config& c) {
  const std::string& fam = c.at("family");
  double scale = parse_double(c.at("scale"), "scale");
  std::shared_ptr<const single_good::TailFamily> f;
  if (fam == "gaussian") f = single_good::gaussian_tail(scale);
  else if (fam == "laplace") f = single_good::laplace_tail(scale);
  else throw DomainError("family must be gaussian or laplace");
  Table t = exp::tail_rate_scan(*f, parse_double(c.at("theta"), "theta"), parse_list(c.at("n"), "n"));
  Artifacts a;
  a.files.push_back({"tails.csv", to_csv(t)});
  std::vector<double> dev;
  for (double r : t.column("ratio")) dev.push_back(std::abs(r - 1));
  a.meta["alpha_minus"] = f->alpha_minus();
  a.meta["beta_minus"] = f->beta_minus();
  a.meta["ratio_decreasing_steps"] = exp::decreasing_tail_steps(dev);
  a.meta["table"] = table_summary(t);
  return a;
}

Artifacts run_onedim(const Config& c) {
  onedim::OneDimEnv env;
  env.alpha0 = to_vec(parse_list(c.at("alpha0"), "alpha0"));
  env.beta = to_vec(parse_list(c.at("beta"), "beta"));
  env.dist = onedim::TypeDistribution::gaussian(parse_double(c.at("mean"), "mean"), parse_double(c.at("sd"), "sd"));
  env.null_index = 0;
  env.validate();
  onedim::SimpleResult r = onedim::optimal_simple_mechanism(env);
  const onedim::SimpleMechanism& m = r.mechanism;
  Table t{{"piece", "lower_cut", "upper_cut", "slope", "allocation", "price", "mass"}, {}};
  for (int j = 0; j < m.utility.pieces(); ++j) {
    double lo = j == 0 ? -std::numeric_limits<double>::infinity() : m.utility.cuts[j - 1];
    double hi = j + 1 < m.utility.pieces() ? m.utility.cuts[j] : std::numeric_limits<double>::infinity();
    t.add_row({static_cast<double>(j), lo, hi, m.utility.slopes[j], static_cast<double>(m.items[j].allocation),
               m.items[j].price, m.utility.piece_mass(env.dist, j)});
  }
  Artifacts a;
  a.files.push_back({"onedim-demo.csv", to_csv(t)});
  a.meta["value"] = number_json(r.value);
  a.meta["converged"] = r.converged;
  a.meta["base_lottery_value"] = number_json(onedim::base_lottery(env).value);
  int k = parse_int(c.at("lp-points"), "lp-points");
  if (k < 0) throw DomainError("lp-points must be >= 0");
  if (k > 0) {
    std::vector<double> pts, w;
    for (int i = 0; i < k; ++i) {
      pts.push_back(env.dist.mean() + env.dist.sd() * gauss::std_normal_quantile((i + 0.5) / k));
      w.push_back(1.0 / k);
    }
    onedim::LpOracleResult lp = onedim::discrete_lp_oracle(env, pts, w);
    onedim::OneDimEnv grid_env = env;
    grid_env.dist = onedim::TypeDistribution::discrete(pts, w);
    a.meta["lp_check"] = {{"points", k},
                          {"lp_value", number_json(lp.value)},
                          {"simple_value_on_grid", number_json(onedim::optimal_simple_mechanism(grid_env).value)},
                          {"lp_max_ic_violation", number_json(lp.max_ic_violation)}};
  }
  a.meta["table"] = table_summary(t);
  return a;
}

Artifacts run_single_bundle(const Config& c) {
  mech::MultiGoodEnv env;
  env.theta_star = to_vec(parse_list(c.at("theta"), "theta"));
  env.inv_fisher = inv_fisher_from(c, static_cast<int>(env.theta_star.size()));
  env.n = parse_double(c.at("n"), "n");
  env.cost = parse_list(c.at("cost"), "cost");
  mech::SingleBundleResult r = mech::single_bundle_revenue(env);
  Table t{{"bundle", "price", "profit", "first_best", "gap", "scaled_gap"}, {}};
  t.add_row({static_cast<double>(r.bundle), r.price, r.profit, r.breakdown.first_best, r.breakdown.gap,
             r.breakdown.scaled_gap});
  Artifacts a;
  a.files.push_back({"single-bundle.csv", to_csv(t)});
  a.meta["table"] = table_summary(t);
  return a;
}

Artifacts dispatch(const std::string& cmd, const Config& c) {
  if (cmd == "figure1") return run_figure1(c);
  if (cmd == "rates") return run_rates(c);
  if (cmd == "margins") return run_margins(c);
  if (cmd == "mle-price") return run_mle(c);
  if (cmd == "tails") return run_tails(c);
  if (cmd == "onedim-demo") return run_onedim(c);
  if (cmd == "single-bundle") return run_single_bundle(c);
  throw DomainError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posted-price, bundling and screening experiments"};
  app.require_subcommand(1);
  std::string out_dir = ".";
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::string> config_path;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [cmd, specs] : command_specs()) {
    CLI::App* sub = app.add_subcommand(cmd, "run the " + cmd + " experiment");
    subs[cmd] = sub;
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--config", config_path[cmd], "key=value file or a previous meta.json");
    for (const OptSpec& s : specs) sub->add_option("--" + s.name, values[cmd][s.name], s.help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::string cmd;
  for (auto& [name, sub] : subs)
    if (sub->parsed()) cmd = name;

  try {
    if (const char* th = std::getenv("SCREENLAB_THREADS")) {
      int n = parse_int(th, "SCREENLAB_THREADS");
      if (n < 1) throw DomainError("SCREENLAB_THREADS must be positive");
      set_thread_cap(n);
    }
    Config file_cfg;
    if (!config_path[cmd].empty()) file_cfg = read_config(config_path[cmd], cmd);
    Config cfg;
    const auto& specs = command_specs().at(cmd);
    for (const auto& [k, v] : file_cfg) {
      bool known = false;
      for (const OptSpec& s : specs) known = known || s.name == k;
      if (!known) throw DomainError("unknown config key " + k);
    }
    for (const OptSpec& s : specs) {
      if (subs[cmd]->count("--" + s.name) > 0) cfg[s.name] = values[cmd][s.name];
      else if (file_cfg.count(s.name)) cfg[s.name] = file_cfg[s.name];
      else if (s.required) throw DomainError("missing required field --" + s.name);
      else cfg[s.name] = s.fallback;
    }

    Artifacts a = dispatch(cmd, cfg);
    json meta;
    meta["command"] = cmd;
    meta["config"] = cfg;
    for (auto& [k, v] : a.meta.items()) meta[k] = v;
    std::vector<std::string> names;
    for (const auto& f : a.files) names.push_back(f.first);
    meta["files"] = names;

    fs::create_directories(out_dir);
    for (const auto& [name, content] : a.files) write_text(fs::path(out_dir) / name, content);
    write_text(fs::path(out_dir) / (cmd + ".meta.json"), meta.dump(2) + "\n");
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
