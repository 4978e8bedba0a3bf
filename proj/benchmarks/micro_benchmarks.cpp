// Micro-benchmarks for the hot paths: network passes, environment stepping,
// ranking metrics, and the statistics kernels.

#include <benchmark/benchmark.h>

#include <numeric>

#include "rltest/agents.hpp"
#include "rltest/blockmaze.hpp"
#include "rltest/ciprio.hpp"
#include "rltest/metrics.hpp"
#include "rltest/neural.hpp"
#include "rltest/rng.hpp"
#include "rltest/stats.hpp"

namespace {

rltest::Mlp make_net(const std::vector<int>& sizes) {
  rltest::Mlp net(sizes, rltest::Activation::identity);
  rltest::Rng rng(7);
  net.init_glorot(rng);
  return net;
}

void BM_MlpForward(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const rltest::Mlp net = make_net({4, hidden, hidden, 4});
  const rltest::Vec x{0.1, -0.7, 0.4, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MlpForward)->Arg(32)->Arg(128)->Arg(256);

void BM_MlpBackward(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const rltest::Mlp net = make_net({4, hidden, hidden, 4});
  const rltest::Vec x{0.1, -0.7, 0.4, 0.9};
  const rltest::Vec upstream{1.0, -0.5, 0.25, 0.1};
  rltest::MlpWorkspace ws;
  net.forward(x, ws);
  rltest::Vec grad(net.param_count(), 0.0);
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    benchmark::DoNotOptimize(net.backward(ws, upstream, grad));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MlpBackward)->Arg(32)->Arg(128)->Arg(256);

void BM_AdamStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  rltest::Vec params(n, 0.1);
  rltest::Vec grad(n, 0.01);
  rltest::AdamState opt(n);
  for (auto _ : state) rltest::adam_step(params, grad, opt);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AdamStep)->Arg(1024)->Arg(65536);

void BM_MazeRandomWalk(benchmark::State& state) {
  rltest::Rng rng(11);
  const rltest::MazeSpec spec = rltest::generate_maze(20, 20, 0.2, 25, rng);
  rltest::BlockMazeEnv env(spec, rltest::MazeObservation::coordinates);
  env.reset();
  for (auto _ : state) {
    const auto step = env.step(static_cast<int>(rng.uniform_int(4)));
    if (step.done) env.reset();
    benchmark::DoNotOptimize(step.reward);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MazeRandomWalk);

void BM_DqnTrainingStep(benchmark::State& state) {
  rltest::Rng rng(13);
  const rltest::MazeSpec spec = rltest::generate_maze(20, 20, 0.2, 25, rng);
  rltest::BlockMazeEnv env(spec, rltest::MazeObservation::coordinates);
  rltest::AgentConfig cfg;
  cfg.algorithm = rltest::Algorithm::dqn;
  cfg.hidden = {64, 64};
  cfg.learn_start = 64;
  cfg.total_steps_hint = 1 << 20;
  const auto agent = rltest::make_discrete_agent(cfg, env.observation_size(), 4);
  rltest::Vec obs = env.reset();
  for (auto _ : state) {
    const int action = agent->act(obs);
    auto ms = env.step(action);
    rltest::Transition t;
    t.state = obs;
    t.action = action;
    t.reward = ms.reward;
    t.next_state = ms.observation;
    t.done = ms.done;
    agent->observe(t);
    obs = std::move(ms.observation);
    if (ms.done) obs = env.reset();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DqnTrainingStep);

void BM_RankingMetrics(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  rltest::Rng rng(17);
  rltest::Cycle cycle;
  cycle.cycle_id = 1;
  rltest::Ranking proposed;
  for (int i = 0; i < k; ++i) {
    rltest::TestCaseRecord t;
    t.test_id = i + 1;
    t.verdict = rng.uniform() < 0.2 ? 1 : 0;
    t.duration = rng.uniform(0.1, 9.0);
    cycle.tests.push_back(t);
    proposed.push_back(i + 1);
  }
  cycle.tests[0].verdict = 1;
  const rltest::Ranking reference = rltest::optimal_ranking(cycle);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rltest::nrpa(proposed, reference));
    benchmark::DoNotOptimize(rltest::apfd(proposed, cycle));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RankingMetrics)->Arg(10)->Arg(100)->Arg(1000);

void BM_PairwiseEpisode(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  rltest::Rng rng(19);
  rltest::Cycle cycle;
  cycle.cycle_id = 1;
  for (int i = 0; i < k; ++i) {
    rltest::TestCaseRecord t;
    t.test_id = i + 1;
    t.verdict = rng.uniform() < 0.2 ? 1 : 0;
    t.duration = rng.uniform(0.1, 9.0);
    cycle.tests.push_back(t);
  }
  rltest::PairwiseEnv env(rltest::feature_size(0));
  for (auto _ : state) {
    env.begin(cycle);
    while (!env.done()) env.step_discrete(static_cast<int>(rng.uniform_int(2)));
    benchmark::DoNotOptimize(env.ranking());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PairwiseEpisode)->Arg(10)->Arg(40);

void BM_StudentizedRangeSf(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rltest::studentized_range_sf(3.88, 3, 10.0));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StudentizedRangeSf);

void BM_WelchGamesHowell(benchmark::State& state) {
  rltest::Rng rng(23);
  std::vector<rltest::GroupSample> groups(4);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].name = "g" + std::to_string(g);
    for (int i = 0; i < 20; ++i)
      groups[g].values.push_back(static_cast<double>(g) + rng.normal());
  }
  for (auto _ : state) benchmark::DoNotOptimize(rltest::compare_groups(groups));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WelchGamesHowell);

}  // namespace

BENCHMARK_MAIN();
