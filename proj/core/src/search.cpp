#include "progplan/search.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <queue>
#include <stdexcept>

namespace progplan {

namespace {

constexpr std::array<std::string_view, 6> kOutcomeNames{
    "solved", "unsolvable", "failure", "step-limit", "time-limit", "memory-limit"};

using Clock = std::chrono::steady_clock;

struct QueueEntry {
  double h;
  double depth;  // g, or 0 when depth does not break ties
  std::uint64_t seq;
  NodeId node;
};

struct EntryAfter {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.h != b.h) return a.h > b.h;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

using OpenList = std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryAfter>;

class Budget {
 public:
  explicit Budget(const ResourceLimits& limits) : limits_(limits), start_(Clock::now()) {}

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  bool out_of_time() const { return limits_.time_limit_s && elapsed() >= *limits_.time_limit_s; }

  bool out_of_memory(const SearchSpace& space) const {
    if (limits_.max_states && space.size() > *limits_.max_states) return true;
    return limits_.memory_bytes && space.estimated_bytes() > *limits_.memory_bytes;
  }

  bool out_of_expansions(std::uint64_t expansions) const {
    return limits_.max_expansions && expansions >= *limits_.max_expansions;
  }

 private:
  const ResourceLimits& limits_;
  Clock::time_point start_;
};

SearchResult finish(SearchResult r, const Budget& budget, const SearchSpace* space) {
  r.stats.wall_seconds = budget.elapsed();
  if (space) {
    r.stats.stored_states = space->size();
    r.stats.estimated_bytes = space->estimated_bytes();
  }
  return r;
}

SearchResult limit_result(Outcome o, SearchStatistics stats, std::string reason) {
  SearchResult r;
  r.outcome = o;
  r.stats = std::move(stats);
  r.reason = std::move(reason);
  return r;
}

SearchResult solved(const Task& task, const SearchSpace& space, NodeId goal,
                    SearchStatistics stats) {
  SearchResult r;
  r.outcome = Outcome::Solved;
  r.plan = extract_plan(task, space, goal);
  r.stats = std::move(stats);
  return r;
}

}  // namespace

std::string_view to_string(Outcome o) { return kOutcomeNames[static_cast<std::size_t>(o)]; }

Outcome parse_outcome(std::string_view text) {
  for (std::size_t i = 0; i < kOutcomeNames.size(); ++i)
    if (kOutcomeNames[i] == text) return static_cast<Outcome>(i);
  throw std::invalid_argument("unknown outcome '" + std::string(text) + "'");
}

std::uint64_t default_rollout_steps(const Task& task) {
  return 10 * (task.initial_state().size() + task.static_atoms().size() + 1000);
}

// ---------------------------------------------------------------------------
// SearchSpace
// ---------------------------------------------------------------------------

NodeId SearchSpace::add_root(State s, double h) {
  bytes_ += sizeof(SearchNode) + 64 + s.size() * sizeof(AtomCode);
  auto [it, fresh] = index_.emplace(std::move(s), 0);
  if (!fresh) throw std::logic_error("root added twice");
  const auto id = static_cast<NodeId>(nodes_.size());
  it->second = id;
  nodes_.push_back(SearchNode{&it->first, std::nullopt, std::nullopt, 0.0, h});
  return id;
}

std::optional<NodeId> SearchSpace::add_child(State s, NodeId parent, const GroundAction& a) {
  const std::size_t atoms = s.size();
  auto [it, fresh] = index_.emplace(std::move(s), 0);
  if (!fresh) return std::nullopt;
  const auto id = static_cast<NodeId>(nodes_.size());
  it->second = id;
  const double g = nodes_[parent].g + a.cost;
  nodes_.push_back(SearchNode{&it->first, parent, ActionRef{a.schema, a.args}, g, 0.0});
  bytes_ += sizeof(SearchNode) + 64 + atoms * sizeof(AtomCode) + a.args.size() * sizeof(ObjectId);
  return id;
}

Plan extract_plan(const Task& task, const SearchSpace& space, NodeId node) {
  Plan plan;
  for (std::optional<NodeId> cur = node; cur; cur = space.node(*cur).parent) {
    const SearchNode& n = space.node(*cur);
    if (!n.action) break;
    PlanStep step{task.schema(n.action->schema).name, {}};
    for (ObjectId o : n.action->args) step.args.push_back(task.object_name(o));
    plan.steps.push_back(std::move(step));
  }
  std::reverse(plan.steps.begin(), plan.steps.end());
  return plan;
}

// ---------------------------------------------------------------------------
// GBFS
// ---------------------------------------------------------------------------

SearchResult gbfs(const Task& task, SafeValue& h, const ResourceLimits& limits) {
  Budget budget(limits);
  SearchStatistics stats;
  SearchSpace space;
  if (is_goal(task, task.initial_state())) {
    SearchResult r;
    r.outcome = Outcome::Solved;
    r.plan = Plan{};
    return finish(std::move(r), budget, nullptr);
  }
  OpenList open;
  std::uint64_t seq = 0;
  std::vector<char> expanded;
  const double h0 = h(task, task.initial_state());
  ++stats.evaluations;
  open.push({h0, 0.0, seq++, space.add_root(task.initial_state(), h0)});

  while (!open.empty()) {
    if (budget.out_of_time())
      return finish(limit_result(Outcome::TimeLimit, stats, "time limit"), budget, &space);
    if (budget.out_of_expansions(stats.expansions))
      return finish(limit_result(Outcome::StepLimit, stats, "expansion limit"), budget, &space);
    const NodeId id = open.top().node;
    open.pop();
    if (expanded.size() <= id) expanded.resize(space.size(), 0);
    if (expanded[id]) ++stats.duplicate_expansions;
    expanded[id] = 1;
    ++stats.expansions;

    const State parent_state = *space.node(id).state;
    for (const GroundAction& a : applicable_actions(task, parent_state)) {
      State succ = std::get<State>(apply(task, parent_state, a));
      ++stats.generations;
      const bool goal = is_goal(task, succ);
      auto child = space.add_child(std::move(succ), id, a);
      if (!child) continue;
      if (goal) return finish(solved(task, space, *child, stats), budget, &space);
      const double hv = h(task, *space.node(*child).state);
      ++stats.evaluations;
      space.node(*child).h = hv;
      open.push({hv, 0.0, seq++, *child});
      if (budget.out_of_memory(space))
        return finish(limit_result(Outcome::MemoryLimit, stats, "search memory limit"), budget,
                      &space);
    }
  }
  return finish(limit_result(Outcome::Unsolvable, stats, "reachable state space exhausted"), budget,
                &space);
}

// ---------------------------------------------------------------------------
// Rollout
// ---------------------------------------------------------------------------

SearchResult policy_rollout(const Task& task, SoundPolicy& policy, const ResourceLimits& limits) {
  Budget budget(limits);
  SearchStatistics stats;
  SearchResult r;
  Plan plan;
  State s = task.initial_state();
  const std::uint64_t max_steps = limits.max_rollout_steps.value_or(default_rollout_steps(task));
  std::size_t bytes = 0;
  while (!is_goal(task, s)) {
    if (budget.out_of_time())
      return finish(limit_result(Outcome::TimeLimit, stats, "time limit"), budget, nullptr);
    if (stats.expansions >= max_steps)
      return finish(limit_result(Outcome::StepLimit, stats, "rollout step limit"), budget, nullptr);
    if (limits.memory_bytes && bytes > *limits.memory_bytes)
      return finish(limit_result(Outcome::MemoryLimit, stats, "plan memory limit"), budget, nullptr);
    const std::vector<GroundAction> apps = applicable_actions(task, s);
    ++stats.expansions;
    stats.generations += apps.size();
    if (apps.empty())
      return finish(limit_result(Outcome::Failure, stats, "no-applicable-actions"), budget, nullptr);
    const GroundAction& a = sound_action(policy, task, s, apps);
    ++stats.policy_calls;
    s = std::get<State>(apply(task, s, a));
    plan.steps.push_back(task.step(a));
    bytes += sizeof(PlanStep) + 16 * (a.args.size() + 1);
  }
  r.outcome = Outcome::Solved;
  r.plan = std::move(plan);
  r.stats = stats;
  return finish(std::move(r), budget, nullptr);
}

// ---------------------------------------------------------------------------
// Dual-queue GBFS
// ---------------------------------------------------------------------------

SearchResult dual_queue_gbfs(const Task& task, SafeValue& h, SoundPolicy& policy,
                             const ResourceLimits& limits, const DualQueueOptions& options) {
  Budget budget(limits);
  SearchStatistics stats;
  SearchSpace space;
  if (is_goal(task, task.initial_state())) {
    SearchResult r;
    r.outcome = Outcome::Solved;
    r.plan = Plan{};
    return finish(std::move(r), budget, nullptr);
  }
  OpenList heuristic_queue;
  OpenList policy_queue;
  std::uint64_t seq = 0;
  std::vector<char> expanded;
  const double h0 = h(task, task.initial_state());
  ++stats.evaluations;
  heuristic_queue.push({h0, 0.0, seq++, space.add_root(task.initial_state(), h0)});
  bool pop_heuristic = true;

  auto memory_exceeded = [&] {
    return budget.out_of_memory(space);
  };

  while (!heuristic_queue.empty() || !policy_queue.empty()) {
    if (budget.out_of_time())
      return finish(limit_result(Outcome::TimeLimit, stats, "time limit"), budget, &space);
    if (budget.out_of_expansions(stats.expansions))
      return finish(limit_result(Outcome::StepLimit, stats, "expansion limit"), budget, &space);

    OpenList* q = pop_heuristic ? &heuristic_queue : &policy_queue;
    char source = pop_heuristic ? 'H' : 'P';
    if (q->empty()) {
      q = pop_heuristic ? &policy_queue : &heuristic_queue;
      source = pop_heuristic ? 'p' : 'h';
    }
    const NodeId id = q->top().node;
    q->pop();
    pop_heuristic = !pop_heuristic;
    stats.pop_trace.push_back(source);

    if (expanded.size() <= id) expanded.resize(space.size(), 0);
    if (expanded[id]) ++stats.duplicate_expansions;
    expanded[id] = 1;
    ++stats.expansions;

    const State parent_state = *space.node(id).state;
    const std::vector<GroundAction> apps = applicable_actions(task, parent_state);
    if (apps.empty()) continue;

    // Policy successor goes to the policy queue.
    {
      const GroundAction& a = sound_action(policy, task, parent_state, apps);
      ++stats.policy_calls;
      State succ = std::get<State>(apply(task, parent_state, a));
      ++stats.generations;
      const bool goal = is_goal(task, succ);
      if (auto child = space.add_child(std::move(succ), id, a)) {
        if (goal) return finish(solved(task, space, *child, stats), budget, &space);
        const double hv = h(task, *space.node(*child).state);
        ++stats.evaluations;
        space.node(*child).h = hv;
        const double depth = options.policy_ties == PolicyQueueTies::DeeperFirst
                                  ? space.node(*child).g
                                  : 0.0;
        policy_queue.push({hv, depth, seq++, *child});
        if (memory_exceeded())
          return finish(limit_result(Outcome::MemoryLimit, stats, "search memory limit"), budget,
                        &space);
      }
    }

    for (const GroundAction& a : apps) {
      State succ = std::get<State>(apply(task, parent_state, a));
      ++stats.generations;
      const bool goal = is_goal(task, succ);
      auto child = space.add_child(std::move(succ), id, a);
      if (!child) continue;
      if (goal) return finish(solved(task, space, *child, stats), budget, &space);
      const double hv = h(task, *space.node(*child).state);
      ++stats.evaluations;
      space.node(*child).h = hv;
      heuristic_queue.push({hv, 0.0, seq++, *child});
      if (memory_exceeded())
        return finish(limit_result(Outcome::MemoryLimit, stats, "search memory limit"), budget,
                      &space);
    }
  }
  return finish(limit_result(Outcome::Unsolvable, stats, "both queues exhausted"), budget, &space);
}

}  // namespace progplan
