// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "bridge.hpp"
#include "fixtures.hpp"
#include "gripper_policy.hpp"
#include "oracle.hpp"
#include "progplan/anonymize.hpp"
#include "progplan/harness.hpp"
#include "progplan/search.hpp"
#include "progplan/synthesis.hpp"
#include "progplan/validator.hpp"
#include "tempdir.hpp"

using namespace progplan;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr std::size_t kSoundnessRuns = 1200;
constexpr double kSoundnessBudgetS = 300.0;
constexpr std::size_t kCompletenessStateCap = 100000;
constexpr double kCompletenessBudgetS = 600.0;
constexpr std::size_t kGrounderStates = 1000;
constexpr std::size_t kScoreGrid = 1000;
constexpr double kScoreTolerance = 1e-12;
constexpr int kGripperBalls = 20;
constexpr double kDualFactor = 3.0;
constexpr double kGbfsFactor = 10.0;
constexpr double kPearsonTolerance = 1e-12;
constexpr double kPearsonMinimum = 0.9;
constexpr double kLoopTimeLimitS = 5.0;
constexpr double kLoopWallBoundS = 10.0;
constexpr std::size_t kFloodMemory = std::size_t{256} << 20;
constexpr int kFloodBits = 30;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass{true};
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << " first failure: " << why << ";";
    pass = false;
  }
};

HostOptions stub_host() {
  HostOptions o;
  o.command = {PROGPLAN_STUB_HOST};
  o.call_timeout = std::chrono::milliseconds(2000);
  return o;
}

// ---------------------------------------------------------------------------
// 1. Soundness
// ---------------------------------------------------------------------------

enum class ProgramClass { Correct, Random, Adversarial, Crashing };

const char* name(ProgramClass c) {
  switch (c) {
    case ProgramClass::Correct: return "correct";
    case ProgramClass::Random: return "random";
    case ProgramClass::Adversarial: return "adversarial";
    case ProgramClass::Crashing: return "crashing";
  }
  return "?";
}

/// Policy that greedily minimises the goal count of the successor.
std::shared_ptr<Policy> greedy_policy() {
  return std::make_shared<LambdaPolicy>(
      [](const Task& t, const State& s, std::span<const GroundAction> apps) -> PolicyReply {
        std::size_t best = 0;
        double best_h = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < apps.size(); ++i) {
          double h = goal_count(t, std::get<State>(apply(t, s, apps[i])));
          if (h < best_h) best_h = h, best = i;
        }
        return static_cast<std::int64_t>(best);
      });
}

struct Programs {
  std::shared_ptr<ValueFunction> value;
  std::shared_ptr<Policy> policy;
  std::vector<std::shared_ptr<ProgramHandle>> handles;
};

Programs make_programs(ProgramClass c, const Task& task, bool gripper, std::uint64_t seed,
                       bool external) {
  Programs p;
  auto rng = std::make_shared<std::mt19937_64>(seed);
  if (external) {
    std::string vsrc, psrc;
    switch (c) {
      case ProgramClass::Correct:
        vsrc = "# stub: default";
        psrc = gripper ? "# stub: gripper" : "# stub: first";
        break;
      case ProgramClass::Random:
        vsrc = "# stub: random seed=" + std::to_string(seed);
        psrc = "# stub: random seed=" + std::to_string(seed);
        break;
      case ProgramClass::Adversarial:
        vsrc = seed % 2 ? "# stub: inf" : "# stub: garbage";
        psrc = seed % 2 ? "# stub: out-of-range" : "# stub: noise seed=" + std::to_string(seed);
        break;
      case ProgramClass::Crashing:
        vsrc = "# stub: default crash-after=" + std::to_string(seed % 7);
        psrc = "# stub: first crash-after=" + std::to_string(seed % 5);
        break;
    }
    auto vh = open_program(vsrc, ProgramKind::Value, task, stub_host());
    auto ph = open_program(psrc, ProgramKind::Policy, task, stub_host());
    p.handles = {vh, ph};
    p.value = std::make_shared<ExternalValue>(vh);
    p.policy = std::make_shared<ExternalPolicy>(ph);
    return p;
  }
  switch (c) {
    case ProgramClass::Correct:
      p.value = std::make_shared<GoalCountValue>();
      p.policy = gripper ? std::shared_ptr<Policy>(std::make_shared<fixtures::GripperPolicy>())
                         : greedy_policy();
      break;
    case ProgramClass::Random:
      p.value = std::make_shared<LambdaValue>([rng](const Task&, const State&) -> ValueReply {
        return static_cast<double>(std::uniform_int_distribution<int>(0, 50)(*rng));
      });
      p.policy = std::make_shared<RandomPolicy>(seed);
      break;
    case ProgramClass::Adversarial:
      p.value = std::make_shared<LambdaValue>([rng](const Task& t, const State& s) -> ValueReply {
        switch (std::uniform_int_distribution<int>(0, 3)(*rng)) {
          case 0: return Infinite{};
          case 1: return std::nan("");
          case 2: return -goal_count(t, s) * 1e6;
          default: return EvalError{"adversary"};
        }
      });
      p.policy = std::make_shared<LambdaPolicy>(
          [rng](const Task&, const State&, std::span<const GroundAction> apps) -> PolicyReply {
            switch (std::uniform_int_distribution<int>(0, 2)(*rng)) {
              case 0: return static_cast<std::int64_t>(apps.size()) + 17;
              case 1: return std::int64_t{-1};
              default: return EvalError{"adversary"};
            }
          });
      break;
    case ProgramClass::Crashing: {
      auto calls = std::make_shared<std::uint64_t>(0);
      const std::uint64_t after = seed % 9;
      p.value = std::make_shared<LambdaValue>([calls, after](const Task& t, const State& s) -> ValueReply {
        if ((*calls)++ >= after) throw std::runtime_error("value program crashed");
        return goal_count(t, s);
      });
      p.policy = std::make_shared<LambdaPolicy>(
          [calls, after](const Task&, const State&, std::span<const GroundAction>) -> PolicyReply {
            if ((*calls)++ >= after) throw std::runtime_error("policy program crashed");
            return std::int64_t{0};
          });
      break;
    }
  }
  return p;
}

bool criterion_soundness() {
  const auto start = Clock::now();
  Verdict v;
  std::vector<fixtures::Instance> tasks;
  for (int n : {1, 2, 3, 4}) tasks.push_back(fixtures::gripper(n));
  for (std::uint64_t s : {1u, 2u, 3u}) tasks.push_back(fixtures::blocksworld(4, s));
  tasks.push_back(fixtures::transport(3, 1, 2, false, 1));
  tasks.push_back(fixtures::transport(4, 2, 2, false, 2));
  tasks.push_back(fixtures::transport(3, 1, 1, true, 0));
  for (std::uint64_t s = 0; s < 10; ++s) tasks.push_back(fixtures::random_small(s));
  std::vector<Task> compiled;
  for (const auto& in : tasks) compiled.push_back(build_task(in.domain, in.problem));

  const ProgramClass classes[] = {ProgramClass::Correct, ProgramClass::Random, ProgramClass::Adversarial,
                                  ProgramClass::Crashing};
  const SearchMode modes[] = {SearchMode::Gbfs, SearchMode::Rollout, SearchMode::Dual};
  std::size_t runs = 0, solved = 0, external = 0;
  std::size_t per_class_solved[4] = {0, 0, 0, 0};
  std::mt19937_64 rng(12345);
  while (runs < kSoundnessRuns) {
    const std::size_t ti = runs % tasks.size();
    const ProgramClass cls = classes[(runs / tasks.size()) % 4];
    const SearchMode mode = modes[(runs / (tasks.size() * 4)) % 3];
    const bool gripper = tasks[ti].domain.name == "gripper-typed";
    const bool ext = runs % 8 == 0;
    const std::uint64_t seed = rng();
    const Task& task = compiled[ti];
    Programs p = make_programs(cls, task, gripper, seed % 1000, ext);
    SafeValue h(p.value);
    SoundPolicy pi(p.policy, seed);
    ResourceLimits lim;
    lim.max_expansions = 20000;
    lim.max_rollout_steps = 5000;
    lim.time_limit_s = 20;
    SearchResult r = mode == SearchMode::Gbfs      ? gbfs(task, h, lim)
                     : mode == SearchMode::Rollout ? policy_rollout(task, pi, lim)
                                                   : dual_queue_gbfs(task, h, pi, lim);
    ++runs;
    external += ext;
    if (r.solved()) {
      ++solved;
      ++per_class_solved[static_cast<int>(cls)];
      auto val = validate_plan(tasks[ti].domain, tasks[ti].problem, *r.plan);
      if (!val.valid)
        v.fail(tasks[ti].label + " " + name(cls) + " " + std::string(to_string(mode)) + ": " + val.detail);
    }
    for (auto& hdl : p.handles) hdl->close();
  }
  const double secs = since(start);
  if (secs > kSoundnessBudgetS) v.fail("runtime " + std::to_string(secs) + " s");
  for (int c = 0; c < 4; ++c)
    if (per_class_solved[c] == 0) v.fail(std::string("no solved run for class ") + name(classes[c]));
  std::printf("%s 1 soundness: %zu runs (%zu via host), %zu solved, all solved plans valid=%s, %.1f s;%s\n",
              v.pass ? "PASS" : "FAIL", runs, external, solved, v.pass ? "yes" : "no", secs,
              v.detail.str().c_str());
  return v.pass;
}

// ---------------------------------------------------------------------------
// 2. Completeness
// ---------------------------------------------------------------------------

bool criterion_completeness() {
  const auto start = Clock::now();
  Verdict v;
  std::vector<fixtures::Instance> family;
  for (int n = 1; n <= 5; ++n) family.push_back(fixtures::gripper(n));
  for (int b = 3; b <= 5; ++b)
    for (std::uint64_t s = 0; s < 4; ++s) family.push_back(fixtures::blocksworld(b, s));
  for (int cities = 3; cities <= 5; ++cities)
    for (bool cut : {false, true})
      for (std::uint64_t s = 0; s < 3; ++s) family.push_back(fixtures::transport(cities, 1, 2, cut, s));
  for (int bits = 4; bits <= 12; bits += 2) family.push_back(fixtures::flood(bits));
  for (std::uint64_t s = 0; s < 200; ++s) family.push_back(fixtures::random_small(s));

  std::size_t instances = 0, solvable = 0, unsolvable = 0, skipped = 0, agree = 0;
  for (const auto& in : family) {
    auto ref = oracle::bfs(in.domain, in.problem, kCompletenessStateCap, true);
    bool exists = ref.optimal_length.has_value();
    if (!exists) {
      if (!ref.exhausted) {
        ++skipped;
        continue;
      }
    }
    ++instances;
    (exists ? solvable : unsolvable) += 1;
    Task t = build_task(in.domain, in.problem);
    SafeValue h1(std::make_shared<GoalCountValue>());
    SafeValue h2(std::make_shared<GoalCountValue>());
    SoundPolicy pi(std::make_shared<RandomPolicy>(instances), instances);
    auto g = gbfs(t, h1);
    auto d = dual_queue_gbfs(t, h2, pi);
    const Outcome want = exists ? Outcome::Solved : Outcome::Unsolvable;
    bool ok = g.outcome == want && d.outcome == want;
    if (ok && exists)
      ok = validate_plan(in.domain, in.problem, *g.plan).valid &&
           validate_plan(in.domain, in.problem, *d.plan).valid;
    if (ok) ++agree;
    else v.fail(in.label + " gbfs=" + std::string(to_string(g.outcome)) + " dual=" +
                std::string(to_string(d.outcome)) + " oracle=" + (exists ? "plan" : "none"));
  }
  const double secs = since(start);
  if (solvable == 0 || unsolvable == 0) v.fail("family lacks solvable or unsolvable instances");
  if (secs > kCompletenessBudgetS) v.fail("runtime " + std::to_string(secs) + " s");
  std::printf("%s 2 completeness: %zu/%zu instances agree with BFS (%zu solvable, %zu unsolvable, "
              "%zu over the %zu-state cap skipped), %.1f s;%s\n",
              v.pass ? "PASS" : "FAIL", agree, instances, solvable, unsolvable, skipped,
              kCompletenessStateCap, secs, v.detail.str().c_str());
  return v.pass;
}

// ---------------------------------------------------------------------------
// 3. Grounder vs brute force
// ---------------------------------------------------------------------------

bool criterion_grounder() {
  Verdict v;
  std::vector<fixtures::Instance> pool{fixtures::gripper(4), fixtures::blocksworld(5, 3),
                                       fixtures::transport(4, 2, 3, false, 4),
                                       fixtures::load("gripper-p02", fixtures::fixture_text("gripper-domain.pddl"),
                                                      fixtures::fixture_text("gripper-p02.pddl"))};
  for (std::uint64_t s = 100; s < 110; ++s) pool.push_back(fixtures::random_small(s));
  std::set<std::string> domains;
  std::mt19937_64 rng(77);
  std::size_t states = 0, mismatches = 0;
  std::vector<std::pair<Task, State>> walkers;
  for (const auto& in : pool) {
    Task t = build_task(in.domain, in.problem);
    State s = t.initial_state();
    walkers.emplace_back(std::move(t), std::move(s));
  }
  while (states < kGrounderStates) {
    const std::size_t i = states % pool.size();
    auto& [task, s] = walkers[i];
    const auto mine = fixtures::steps_of(task, applicable_actions(task, s));
    const auto ref = oracle::applicable(pool[i].domain, pool[i].problem, fixtures::facts_of(task, s));
    ++states;
    domains.insert(pool[i].domain.name);
    if (mine != ref) {
      ++mismatches;
      v.fail(pool[i].label + " state " + std::to_string(states));
    }
    // Advance along a random walk, restarting once in a while or at dead ends.
    const auto apps = applicable_actions(task, s);
    if (apps.empty() || std::bernoulli_distribution(0.05)(rng)) {
      s = task.initial_state();
    } else {
      s = std::get<State>(apply(task, s, apps[std::uniform_int_distribution<std::size_t>(0, apps.size() - 1)(rng)]));
    }
  }
  if (domains.size() < 3) v.fail("fewer than 3 domains");
  std::printf("%s 3 grounder: %zu random reachable states over %zu domains, %zu mismatches;%s\n",
              v.pass ? "PASS" : "FAIL", states, domains.size(), mismatches, v.detail.str().c_str());
  return v.pass;
}

// ---------------------------------------------------------------------------
// 4. Validation score
// ---------------------------------------------------------------------------

bool criterion_score() {
  Verdict v;
  double worst = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kScoreGrid; ++i) {
    const double t = kValidationCutoffSeconds * static_cast<double>(i) / kScoreGrid;
    const long double ref = 1.0L / (1.0L + std::log(1.0L + static_cast<long double>(t)));
    const double got = validation_score(t, true);
    worst = std::max(worst, static_cast<double>(std::fabs(static_cast<long double>(got) - ref)));
    if (!(got < prev)) v.fail("not decreasing at t=" + std::to_string(t));
    prev = got;
  }
  if (worst > kScoreTolerance) v.fail("max deviation " + std::to_string(worst));
  if (validation_score(0.0, true) != 1.0) v.fail("score(0) != 1");
  const double almost = std::nextafter(kValidationCutoffSeconds, 0.0);
  if (!(validation_score(almost, true) > 0.0)) v.fail("score(59.999...) not positive");
  if (!(validation_score(59.999, true) > 0.0)) v.fail("score(59.999) not positive");
  if (validation_score(60.0, true) != 0.0) v.fail("score(60) != 0");
  if (validation_score(0.0, false) != 0.0) v.fail("unsolved score != 0");
  std::printf("%s 4 score: %zu-point grid on [0,60), max |error| %.3g (tol %.0e), endpoints and "
              "monotonicity hold=%s;%s\n",
              v.pass ? "PASS" : "FAIL", kScoreGrid, worst, kScoreTolerance, v.pass ? "yes" : "no",
              v.detail.str().c_str());
  return v.pass;
}

// ---------------------------------------------------------------------------
// 5. Anonymization
// ---------------------------------------------------------------------------

bool criterion_anonymization() {
  Verdict v;
  std::vector<fixtures::Instance> pool;
  for (const auto& [d, p] : std::vector<std::pair<std::string, std::string>>{
           {"gripper-domain.pddl", "gripper-p02.pddl"},
           {"blocksworld-domain.pddl", "blocksworld-p03.pddl"},
           {"transport-domain.pddl", "transport-p01.pddl"},
           {"transport-domain.pddl", "transport-unsolvable.pddl"}})
    pool.push_back(fixtures::load(p, fixtures::fixture_text(d), fixtures::fixture_text(p)));
  for (int n : {3, 6, 9}) pool.push_back(fixtures::gripper(n));
  for (std::uint64_t s : {4u, 5u}) pool.push_back(fixtures::blocksworld(5, s));
  pool.push_back(fixtures::transport(5, 2, 3, false, 6));
  for (std::uint64_t s = 0; s < 20; ++s) pool.push_back(fixtures::random_small(s));

  std::size_t plans = 0, identical = 0;
  for (const auto& in : pool) {
    AnonymizedSet a = anonymize(in.domain, {in.problem});
    // NameMap round trip, both through the structures and through text.
    if (deanonymize(a.domain, a.names) != in.domain) v.fail(in.label + " domain round trip");
    if (deanonymize(a.problems[0], a.names) != in.problem) v.fail(in.label + " problem round trip");
    std::stringstream text;
    a.names.save(text);
    if (!(NameMap::load(text) == a.names)) v.fail(in.label + " namemap save/load");

    Task orig = build_task(in.domain, in.problem);
    Task anon = build_task(a.domain, a.problems[0]);
    SafeValue h1(std::make_shared<GoalCountValue>());
    SafeValue h2(std::make_shared<GoalCountValue>());
    ResourceLimits lim;
    lim.max_expansions = 200000;
    auto r1 = gbfs(orig, h1, lim);
    auto r2 = gbfs(anon, h2, lim);
    if (r1.outcome != r2.outcome) v.fail(in.label + " outcomes differ");
    if (r1.stats.expansions == r2.stats.expansions) ++identical;
    else v.fail(in.label + " expansions " + std::to_string(r1.stats.expansions) + " vs " +
                std::to_string(r2.stats.expansions));
    if (r2.solved()) {
      ++plans;
      Plan back = deanonymize_plan(*r2.plan, a.names);
      if (!validate_plan(in.domain, in.problem, back).valid) v.fail(in.label + " mapped plan invalid");
      if (back != *r1.plan) v.fail(in.label + " mapped plan differs from the original-name plan");
    }
  }
  std::printf("%s 5 anonymization: %zu fixtures, %zu mapped-back plans valid, NameMap round trips "
              "exact, expansions identical on %zu/%zu;%s\n",
              v.pass ? "PASS" : "FAIL", pool.size(), plans, identical, pool.size(),
              v.detail.str().c_str());
  return v.pass;
}

// ---------------------------------------------------------------------------
// 6. Dual queue vs plain GBFS
// ---------------------------------------------------------------------------

bool criterion_dual_queue() {
  Verdict v;
  auto in = fixtures::gripper(kGripperBalls);
  Task t = build_task(in.domain, in.problem);

  SoundPolicy roll(std::make_shared<fixtures::GripperPolicy>(), 1);
  auto rollout = policy_rollout(t, roll);
  if (!rollout.solved()) {
    v.fail("scripted rollout did not solve");
    std::printf("FAIL 6 dual-queue:%s\n", v.detail.str().c_str());
    return false;
  }
  const std::size_t len = rollout.plan->size();

  SafeValue hc(std::make_shared<ConstantValue>(0.0));
  SoundPolicy pi(std::make_shared<fixtures::GripperPolicy>(), 1);
  auto dual = dual_queue_gbfs(t, hc, pi);
  if (!dual.solved() || !validate_plan(in.domain, in.problem, *dual.plan).valid)
    v.fail("dual queue did not return a valid plan");
  const double dual_bound = kDualFactor * static_cast<double>(len);
  if (static_cast<double>(dual.stats.expansions) > dual_bound) v.fail("dual queue over 3x plan length");

  // Plain GBFS with the same flat heuristic, capped at twice the required ratio.
  SafeValue hg(std::make_shared<ConstantValue>(0.0));
  ResourceLimits lim;
  const auto need = static_cast<std::uint64_t>(std::ceil(kGbfsFactor * std::max<double>(1, dual.stats.expansions)));
  lim.max_expansions = 2 * need;
  auto plain = gbfs(t, hg, lim);
  const bool capped = plain.outcome == Outcome::StepLimit;
  if (plain.stats.expansions < need) v.fail("gbfs expanded fewer than 10x the dual queue");

  std::printf("%s 6 dual-queue: gripper-%d rollout length %zu, dual expansions %llu (bound %.0f), "
              "gbfs expansions %llu%s (need >= %llu);%s\n",
              v.pass ? "PASS" : "FAIL", kGripperBalls, len,
              static_cast<unsigned long long>(dual.stats.expansions), dual_bound,
              static_cast<unsigned long long>(plain.stats.expansions), capped ? "+ (cap reached)" : "",
              static_cast<unsigned long long>(need), v.detail.str().c_str());
  return v.pass;
}

// ---------------------------------------------------------------------------
// 7. Pearson correlation
// ---------------------------------------------------------------------------

bool criterion_pearson() {
  Verdict v;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-100, 100);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + k % 40;
    double a = u(rng), b = u(rng);
    if (std::fabs(a) < 1e-3) a = 1.0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(u(rng));
      ys.push_back(a * xs.back() + b);
    }
    const double r = pearson(xs, ys);
    worst = std::max(worst, std::fabs(r - (a > 0 ? 1.0 : -1.0)));
  }
  if (worst > kPearsonTolerance) v.fail("linear data deviation " + std::to_string(worst));

  auto rejects = [](std::vector<double> x, std::vector<double> y) {
    try {
      pearson(x, y);
      return false;
    } catch (const DegenerateInput&) {
      return true;
    }
  };
  if (!rejects({}, {}) || !rejects({1}, {2}) || !rejects({1, 2}, {1}) || !rejects({3, 3, 3}, {1, 2, 3}) ||
      !rejects({1, 2, 3}, {5, 5, 5}))
    v.fail("degenerate input accepted");

  // Synthetic pool: candidate k solves a problem of difficulty d when its
  // ability exceeds d; solve time shrinks with the margin.
  const std::size_t candidates = 10, train = 10, test = 60;
  std::vector<double> ability;
  for (std::size_t k = 0; k < candidates; ++k) ability.push_back(0.05 + 0.9 * k / (candidates - 1));
  std::vector<double> train_diff, test_diff;
  for (std::size_t j = 0; j < train; ++j) train_diff.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
  for (std::size_t j = 0; j < test; ++j) test_diff.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
  std::vector<CandidateProgram> pool;
  std::vector<std::size_t> perm(candidates);
  for (std::size_t k = 0; k < candidates; ++k) perm[k] = k;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t k : perm) {
    CandidateProgram c;
    c.id = "value-" + std::to_string(k);
    c.index = pool.size();
    c.source = "pass";
    pool.push_back(c);
  }
  std::vector<std::string> train_names;
  for (std::size_t j = 0; j < train; ++j) train_names.push_back("train-" + std::to_string(j));
  auto ability_of = [&](const CandidateProgram& c) { return ability[std::stoul(c.id.substr(6))]; };
  auto sel = select_best(pool, train_names, [&](const CandidateProgram& c, std::size_t j) {
    const double margin = ability_of(c) - train_diff[j];
    return RunOutcome{margin > 0, margin > 0 ? 60.0 * (1.0 - margin) * (1.0 - margin) : 60.0};
  });
  std::map<std::string, std::map<std::string, double>> scores;
  for (const auto& r : sel.records) scores["synthetic"][r.candidate_id] = r.mean;
  std::vector<RunRecord> records;
  for (const auto& c : pool)
    for (std::size_t j = 0; j < test; ++j) {
      RunRecord r;
      r.domain = "synthetic";
      r.problem = "test-" + std::to_string(j);
      r.candidate = c.id;
      const bool ok = ability_of(c) > test_diff[j];
      r.outcome = ok ? Outcome::Solved : Outcome::TimeLimit;
      r.validated = ok;
      records.push_back(r);
    }
  auto rows = correlation(scores, records);
  const std::optional<double> r = rows.empty() ? std::nullopt : rows[0].r;
  if (!r || *r < kPearsonMinimum) v.fail("synthetic pool r too low");
  if (sel.best.id != "value-" + std::to_string(candidates - 1)) v.fail("best candidate not selected");
  std::printf("%s 7 pearson: linear max |r-(+/-1)| %.3g (tol %.0e), degenerate inputs rejected, "
              "synthetic pool r = %.4f (need >= %.1f);%s\n",
              v.pass ? "PASS" : "FAIL", worst, kPearsonTolerance, r.value_or(std::nan("")),
              kPearsonMinimum, v.detail.str().c_str());
  return v.pass;
}

// ---------------------------------------------------------------------------
// 8. Resource enforcement
// ---------------------------------------------------------------------------

bool criterion_resources() {
  Verdict v;
  fixtures::TempDir dir("accept-res");

  // A policy that loops forever through the host, no step cap.
  auto grip = fixtures::gripper(kGripperBalls);
  write_file(dir.str("gripper-domain.pddl"), grip.domain_text);
  write_file(dir.str("gripper-20.pddl"), grip.problem_text);
  SolveRequest loop;
  loop.domain_file = dir.str("gripper-domain.pddl");
  loop.problem_file = dir.str("gripper-20.pddl");
  loop.spec.mode = SearchMode::Rollout;
  loop.spec.policy_source = "# stub: loop\n";
  loop.spec.host = stub_host();
  loop.spec.limits.time_limit_s = kLoopTimeLimitS;
  loop.spec.limits.max_rollout_steps = std::numeric_limits<std::uint64_t>::max();
  loop.memory_bytes = std::size_t{1} << 30;
  const auto t0 = Clock::now();
  SolveResponse lr = solve_problem(loop);
  const double loop_wall = since(t0);
  if (loop_wall >= kLoopWallBoundS) v.fail("looping policy ran " + std::to_string(loop_wall) + " s");
  if (lr.record.outcome != Outcome::TimeLimit)
    v.fail("looping policy outcome " + std::string(to_string(lr.record.outcome)));

  // A state-flooding search under a 256 MB cap, once through the normal
  // solve path and once with only the address-space limit in force.
  auto flood = fixtures::flood(kFloodBits);
  write_file(dir.str("flood-domain.pddl"), flood.domain_text);
  write_file(dir.str("flood.pddl"), flood.problem_text);
  SolveRequest fr;
  fr.domain_file = dir.str("flood-domain.pddl");
  fr.problem_file = dir.str("flood.pddl");
  fr.spec.limits.time_limit_s = 300;
  fr.memory_bytes = kFloodMemory;
  const auto t1 = Clock::now();
  SolveResponse f1;
  try {
    f1 = solve_problem(fr);
  } catch (const std::exception& e) {
    v.fail(std::string("harness threw: ") + e.what());
  }
  const double flood_wall = since(t1);
  if (f1.record.outcome != Outcome::MemoryLimit)
    v.fail("flood outcome " + std::string(to_string(f1.record.outcome)));

  Task ft = build_task(flood.domain, flood.problem);
  const auto t2 = Clock::now();
  IsolatedRun raw;
  try {
    raw = run_isolated(
        [&] {
          SafeValue h(std::make_shared<GoalCountValue>());
          return gbfs(ft, h);
        },
        300, kFloodMemory);
  } catch (const std::exception& e) {
    v.fail(std::string("harness threw: ") + e.what());
  }
  const double raw_wall = since(t2);
  if (raw.result.outcome != Outcome::MemoryLimit)
    v.fail("rlimit-only flood outcome " + std::string(to_string(raw.result.outcome)));

  std::printf("%s 8 resources: looping policy %s after %.2f s wall (limit %.0f s, bound %.0f s); "
              "flood-%d under %zu MB: %s in %.1f s (search cap), %s in %.1f s (address-space cap only, "
              "peak rss %zu MB);%s\n",
              v.pass ? "PASS" : "FAIL", std::string(to_string(lr.record.outcome)).c_str(), loop_wall,
              kLoopTimeLimitS, kLoopWallBoundS, kFloodBits, kFloodMemory >> 20,
              std::string(to_string(f1.record.outcome)).c_str(), flood_wall,
              std::string(to_string(raw.result.outcome)).c_str(), raw_wall, raw.peak_rss_bytes >> 20,
              v.detail.str().c_str());
  return v.pass;
}

}  // namespace

int main() {
  int failed = 0;
  const std::vector<std::pair<const char*, std::function<bool()>>> criteria{
      {"1", criterion_soundness},       {"2", criterion_completeness}, {"3", criterion_grounder},
      {"4", criterion_score},           {"5", criterion_anonymization}, {"6", criterion_dual_queue},
      {"7", criterion_pearson},         {"8", criterion_resources}};
  for (const auto& [id, run] : criteria) {
    bool ok = false;
    try {
      ok = run();
    } catch (const std::exception& e) {
      std::printf("FAIL %s exception: %s\n", id, e.what());
    }
    std::fflush(stdout);
    failed += !ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
