#ifndef PROGPLAN_TASK_HPP
#define PROGPLAN_TASK_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "progplan/pddl.hpp"
#include "progplan/plan.hpp"

namespace progplan {

using ObjectId = std::uint32_t;
using PredicateId = std::uint32_t;
using SchemaId = std::uint32_t;
using TypeId = std::uint32_t;

/// A ground atom packed as (predicate << 48) | big-endian mixed-radix index
/// over object ids. Sorting codes sorts atoms by predicate, then arguments.
using AtomCode = std::uint64_t;

/// The fluent part of a world state: a sorted, duplicate-free set of atom
/// codes. Static atoms live in the Task.
class State {
 public:
  State() = default;
  explicit State(std::vector<AtomCode> atoms);

  bool contains(AtomCode code) const;
  std::span<const AtomCode> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  /// Stable across runs and platforms for equal contents.
  std::uint64_t hash() const;

  friend bool operator==(const State&, const State&) = default;

 private:
  friend State successor_state(const State&, std::span<const AtomCode>, std::span<const AtomCode>);
  std::vector<AtomCode> atoms_;
};

struct StateHash {
  std::size_t operator()(const State& s) const { return static_cast<std::size_t>(s.hash()); }
};

struct GroundAction {
  SchemaId schema{0};
  std::vector<ObjectId> args;
  std::vector<AtomCode> pre_pos;
  std::vector<AtomCode> pre_neg;
  std::vector<AtomCode> add;
  std::vector<AtomCode> del;
  double cost{1.0};
  /// Set by Task::instantiate when an equality precondition fails.
  bool violates_equality{false};

  friend bool operator==(const GroundAction& a, const GroundAction& b) {
    return a.schema == b.schema && a.args == b.args;
  }
};

/// The ⊥ outcome of a transition: the first literal that fails.
struct Inapplicable {
  std::string literal;
};

using Transition = std::variant<State, Inapplicable>;

enum class GroundingMode { Auto, Lazy, Grounded };

struct TaskOptions {
  GroundingMode mode{GroundingMode::Auto};
  /// Auto mode grounds upfront when at most this many statically valid
  /// ground actions exist.
  std::size_t grounding_limit{1'000'000};
};

class Task {
 public:
  struct Term {
    bool is_var;
    std::uint32_t value;  // parameter index or object id
  };
  struct CompiledAtom {
    PredicateId predicate;
    std::vector<Term> args;
  };
  struct CompiledLiteral {
    CompiledAtom atom;
    bool positive{true};
    bool equality{false};
    bool is_static{false};
  };
  struct Generator {
    std::size_t literal;   // index into precondition
    std::size_t position;  // argument position of the generated parameter
  };
  struct CompiledSchema {
    std::string name;
    std::vector<TypeId> param_types;
    std::vector<CompiledLiteral> precondition;
    std::vector<CompiledAtom> add;
    std::vector<CompiledAtom> del;
    std::vector<std::size_t> ground_checks;
    std::vector<std::vector<std::size_t>> checks_at;
    std::vector<std::vector<Generator>> generators;
  };

  const Domain& domain() const { return domain_; }
  const Problem& problem() const { return problem_; }

  std::size_t num_objects() const { return object_names_.size(); }
  const std::string& object_name(ObjectId id) const { return object_names_[id]; }
  std::optional<ObjectId> object_id(std::string_view name) const;
  bool object_has_type(ObjectId obj, TypeId type) const { return type_member_[type][obj] != 0; }
  std::optional<TypeId> type_id(std::string_view name) const;
  const std::vector<ObjectId>& objects_of_type(TypeId type) const { return type_objects_[type]; }

  std::size_t num_predicates() const { return predicate_names_.size(); }
  const std::string& predicate_name(PredicateId id) const { return predicate_names_[id]; }
  std::size_t predicate_arity(PredicateId id) const { return predicate_arity_[id]; }
  bool is_static(PredicateId id) const { return predicate_static_[id] != 0; }
  std::optional<PredicateId> predicate_id(std::string_view name) const;

  std::size_t num_schemas() const { return schemas_.size(); }
  const CompiledSchema& schema(SchemaId id) const { return schemas_[id]; }

  const State& initial_state() const { return initial_; }
  std::span<const AtomCode> static_atoms() const { return static_atoms_; }
  std::span<const AtomCode> goal_positive() const { return goal_pos_; }
  std::span<const AtomCode> goal_negative() const { return goal_neg_; }
  /// False when a ground equality goal literal is violated.
  bool goal_equalities_hold() const { return goal_equalities_hold_; }
  std::size_t goal_size() const { return goal_pos_.size() + goal_neg_.size() + goal_eq_count_; }

  AtomCode encode(PredicateId pred, std::span<const ObjectId> args) const;
  PredicateId predicate_of(AtomCode code) const { return static_cast<PredicateId>(code >> 48); }
  std::vector<ObjectId> decode_args(AtomCode code) const;
  Atom atom(AtomCode code) const;
  /// Static and fluent atoms of `s`, sorted by code.
  std::vector<Atom> atoms_of(const State& s) const;
  /// Membership in s, or in the static set for static predicates.
  bool holds(const State& s, AtomCode code) const;

  bool grounded() const { return grounded_; }
  std::size_t ground_action_count() const { return ground_actions_.size(); }

  PlanStep step(const GroundAction& a) const;
  /// Resolves a named step; nullopt for unknown names, wrong arity or types.
  std::optional<GroundAction> instantiate(const PlanStep& step) const;

 private:
  friend Task build_task(const Domain&, const Problem&, TaskOptions);
  friend std::vector<GroundAction> applicable_actions(const Task&, const State&);

  template <class Emit>
  bool match(const CompiledSchema& sch, SchemaId id, std::size_t param,
             std::vector<ObjectId>& binding, const State* state, bool static_only,
             Emit& emit) const;
  bool check_literal(const CompiledLiteral& lit, const std::vector<ObjectId>& binding,
                     const State* state) const;
  AtomCode encode_bound(const CompiledAtom& a, const std::vector<ObjectId>& binding) const;
  GroundAction make_action(SchemaId id, const std::vector<ObjectId>& binding) const;
  std::span<const AtomCode> store_for(PredicateId pred, const State* state) const;

  Domain domain_;
  Problem problem_;
  std::vector<std::string> object_names_;
  std::unordered_map<std::string, ObjectId> object_ids_;
  std::vector<std::string> type_names_;
  std::unordered_map<std::string, TypeId> type_ids_;
  std::vector<std::vector<char>> type_member_;
  std::vector<std::vector<ObjectId>> type_objects_;
  std::vector<std::string> predicate_names_;
  std::vector<std::size_t> predicate_arity_;
  std::vector<char> predicate_static_;
  std::unordered_map<std::string, PredicateId> predicate_ids_;
  std::vector<std::uint64_t> radix_pow_;
  std::vector<CompiledSchema> schemas_;
  std::vector<AtomCode> static_atoms_;
  State initial_;
  std::vector<AtomCode> goal_pos_;
  std::vector<AtomCode> goal_neg_;
  std::size_t goal_eq_count_{0};
  bool goal_equalities_hold_{true};

  bool grounded_{false};
  std::vector<GroundAction> ground_actions_;
  std::unordered_map<AtomCode, std::vector<std::uint32_t>> triggers_;
  std::vector<std::uint32_t> untriggered_;
};

/// Validates `problem` against `domain` and compiles the transition model.
Task build_task(const Domain& domain, const Problem& problem, TaskOptions options = {});

/// All ground actions applicable in `s`, ordered by schema declaration then
/// lexicographically by argument object index (declaration order).
std::vector<GroundAction> applicable_actions(const Task& task, const State& s);

/// (s \ del) ∪ add when `a` is applicable, otherwise the violated literal.
Transition apply(const Task& task, const State& s, const GroundAction& a);

bool is_goal(const Task& task, const State& s);

}  // namespace progplan

#endif  // PROGPLAN_TASK_HPP
