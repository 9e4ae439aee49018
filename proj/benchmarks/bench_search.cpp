#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "fixtures.hpp"
#include "progplan/program.hpp"
#include "progplan/search.hpp"
#include "progplan/task.hpp"

using namespace progplan;

namespace {

Task task_for(const fixtures::Instance& in, GroundingMode mode) {
  TaskOptions o;
  o.mode = mode;
  return build_task(in.domain, in.problem, o);
}

// States along a fixed random walk, so both grounding modes see the same inputs.
std::vector<State> walk(const Task& task, std::size_t length) {
  std::mt19937_64 rng(7);
  std::vector<State> out{task.initial_state()};
  while (out.size() < length) {
    auto acts = applicable_actions(task, out.back());
    if (acts.empty()) break;
    auto next = apply(task, out.back(), acts[rng() % acts.size()]);
    out.push_back(std::get<State>(next));
  }
  return out;
}

void applicable(benchmark::State& st, const fixtures::Instance& in, GroundingMode mode) {
  const Task task = task_for(in, mode);
  const auto states = walk(task, 256);
  std::size_t i = 0, total = 0;
  for (auto _ : st) {
    auto acts = applicable_actions(task, states[i++ % states.size()]);
    total += acts.size();
    benchmark::DoNotOptimize(acts.data());
  }
  st.counters["actions/call"] =
      benchmark::Counter(static_cast<double>(total), benchmark::Counter::kAvgIterations);
}

void BM_ApplicableGripper(benchmark::State& st) {
  static const auto in = fixtures::gripper(static_cast<int>(st.range(1)));
  applicable(st, in, st.range(0) ? GroundingMode::Grounded : GroundingMode::Lazy);
}
BENCHMARK(BM_ApplicableGripper)
    ->ArgNames({"grounded", "balls"})
    ->Args({0, 20})
    ->Args({1, 20});

void BM_ApplicableBlocks(benchmark::State& st) {
  static const auto in = fixtures::blocksworld(12, 3);
  applicable(st, in, st.range(0) ? GroundingMode::Grounded : GroundingMode::Lazy);
}
BENCHMARK(BM_ApplicableBlocks)->ArgName("grounded")->Arg(0)->Arg(1);

void BM_GbfsGoalCount(benchmark::State& st) {
  const auto in = fixtures::gripper(static_cast<int>(st.range(0)));
  const Task task = task_for(in, GroundingMode::Auto);
  std::uint64_t expansions = 0;
  for (auto _ : st) {
    SafeValue h(std::make_shared<GoalCountValue>());
    auto r = gbfs(task, h);
    expansions += r.stats.expansions;
    benchmark::DoNotOptimize(r);
  }
  st.counters["expansions/s"] =
      benchmark::Counter(static_cast<double>(expansions), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_GbfsGoalCount)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_DualQueueFirst(benchmark::State& st) {
  const auto in = fixtures::gripper(static_cast<int>(st.range(0)));
  const Task task = task_for(in, GroundingMode::Auto);
  for (auto _ : st) {
    SafeValue h(std::make_shared<GoalCountValue>());
    SoundPolicy p(std::make_shared<FirstApplicablePolicy>(), 0);
    auto r = dual_queue_gbfs(task, h, p);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_DualQueueFirst)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
