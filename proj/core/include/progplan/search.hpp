#ifndef PROGPLAN_SEARCH_HPP
#define PROGPLAN_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "progplan/plan.hpp"
#include "progplan/program.hpp"
#include "progplan/task.hpp"

namespace progplan {

enum class Outcome { Solved, Unsolvable, Failure, StepLimit, TimeLimit, MemoryLimit };

std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view text);

struct ResourceLimits {
  std::optional<double> time_limit_s;
  /// Search expansions before StepLimit.
  std::optional<std::uint64_t> max_expansions;
  /// Rollout steps before StepLimit; defaults to 10 × (|s_I| + 1000) where
  /// |s_I| counts static and fluent atoms.
  std::optional<std::uint64_t> max_rollout_steps;
  /// Stored search states before MemoryLimit.
  std::optional<std::uint64_t> max_states;
  /// Estimated search-space bytes before MemoryLimit.
  std::optional<std::size_t> memory_bytes;
};

std::uint64_t default_rollout_steps(const Task& task);

struct SearchStatistics {
  std::uint64_t expansions{0};
  std::uint64_t generations{0};
  std::uint64_t evaluations{0};
  std::uint64_t policy_calls{0};
  /// Always zero; counted to make the no-reexpansion invariant checkable.
  std::uint64_t duplicate_expansions{0};
  std::uint64_t stored_states{0};
  std::size_t estimated_bytes{0};
  double wall_seconds{0.0};
  /// Dual-queue pop sources: 'H'/'P' for the scheduled queue, 'h'/'p' when
  /// the scheduled queue was empty and the other was used.
  std::string pop_trace;
};

struct SearchResult {
  Outcome outcome{Outcome::Unsolvable};
  std::optional<Plan> plan;
  SearchStatistics stats;
  std::string reason;

  bool solved() const { return outcome == Outcome::Solved; }
};

/// Compact action reference kept per search node.
struct ActionRef {
  SchemaId schema;
  std::vector<ObjectId> args;
};

using NodeId = std::uint32_t;

struct SearchNode {
  const State* state;
  std::optional<NodeId> parent;
  std::optional<ActionRef> action;
  double g{0.0};
  double h{0.0};
};

/// Nodes plus the visited set. A state is stored at most once.
class SearchSpace {
 public:
  NodeId add_root(State s, double h);
  /// nullopt if `s` was already visited.
  std::optional<NodeId> add_child(State s, NodeId parent, const GroundAction& a);
  bool visited(const State& s) const { return index_.count(s) > 0; }

  const SearchNode& node(NodeId id) const { return nodes_[id]; }
  SearchNode& node(NodeId id) { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t estimated_bytes() const { return bytes_; }

 private:
  std::vector<SearchNode> nodes_;
  std::unordered_map<State, NodeId, StateHash> index_;
  std::size_t bytes_{0};
};

/// Parent-chain walk from `node` back to the root, reversed.
Plan extract_plan(const Task& task, const SearchSpace& space, NodeId node);

/// Greedy best-first search with goal test on generation.
SearchResult gbfs(const Task& task, SafeValue& h, const ResourceLimits& limits = {});

/// Repeated s ← f(s, π(s)) from the initial state.
SearchResult policy_rollout(const Task& task, SoundPolicy& policy,
                            const ResourceLimits& limits = {});

/// How equal-h entries of the policy queue are ordered.
enum class PolicyQueueTies {
  /// Larger g first, then FIFO. Keeps the newest policy chain in front.
  DeeperFirst,
  Fifo,
};

struct DualQueueOptions {
  PolicyQueueTies policy_ties{PolicyQueueTies::DeeperFirst};
};

/// GBFS over two queues popped alternately: one holding every generated
/// successor, one holding the policy's successor of each popped state.
SearchResult dual_queue_gbfs(const Task& task, SafeValue& h, SoundPolicy& policy,
                             const ResourceLimits& limits = {},
                             const DualQueueOptions& options = {});

}  // namespace progplan

#endif  // PROGPLAN_SEARCH_HPP
