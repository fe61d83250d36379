// Serial versus OpenMP timings for the three parallel kernels.
#include <benchmark/benchmark.h>

#include "screenlab/experiments.hpp"
#include "screenlab/mechanisms.hpp"

using namespace screenlab;

namespace {

Execution exec_of(const benchmark::State& st) { return st.range(0) ? Execution::parallel : Execution::serial; }

void BM_RelaxedBound(benchmark::State& st) {
  auto env = exp::figure1_env(0.0, 50);
  mech::RelaxedOptions o;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(mech::relaxed_upper_bound(env, o).value);
}

void BM_MleReplications(benchmark::State& st) {
  exp::MonteCarloConfig c;
  c.prior.kind = exp::Prior::Kind::point;
  c.prior.point = Eigen::VectorXd::Constant(2, 0.5);
  c.prior.box = {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  c.n_list = {100, 400};
  c.replications = 2000;
  c.seed = 3;
  c.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(exp::mle_pricing_experiment(c).rows.size());
}

void BM_Figure1Points(benchmark::State& st) {
  exp::Figure1Options o;
  o.exec = exec_of(st);
  o.relaxed.exec = o.exec;
  for (auto _ : st) benchmark::DoNotOptimize(exp::figure1_curves({0.0}, {2, 10, 50, 200}, o).size());
}

}  // namespace

BENCHMARK(BM_RelaxedBound)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MleReplications)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Figure1Points)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
