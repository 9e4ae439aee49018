#ifndef PROGPLAN_VALIDATOR_HPP
#define PROGPLAN_VALIDATOR_HPP

#include <cstddef>
#include <string>

#include "progplan/pddl.hpp"
#include "progplan/plan.hpp"

namespace progplan {

/// A plan step names a schema the domain does not declare, or uses the
/// wrong number of arguments.
class UnknownAction : public SemanticError {
 public:
  UnknownAction(std::string name, const std::string& detail);
};

struct ValidationOutcome {
  enum class Reason { None, InapplicableLiteral, GoalUnsatisfied };

  bool valid{false};
  double cost{0.0};
  /// 0-based index of the failing step; equals the plan length for
  /// GoalUnsatisfied.
  std::size_t step{0};
  Reason reason{Reason::None};
  /// The violated literal, printed in PDDL syntax.
  std::string detail;

  static ValidationOutcome ok(double cost) { return {true, cost, 0, Reason::None, {}}; }
};

std::string_view to_string(ValidationOutcome::Reason r);

/// Replays `plan` from the problem's initial state over plain string atoms.
/// Shares no transition code with the grounder.
ValidationOutcome validate_plan(const Domain& domain, const Problem& problem, const Plan& plan);

}  // namespace progplan

#endif  // PROGPLAN_VALIDATOR_HPP
