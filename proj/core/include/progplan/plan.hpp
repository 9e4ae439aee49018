#ifndef PROGPLAN_PLAN_HPP
#define PROGPLAN_PLAN_HPP

#include <string>
#include <string_view>
#include <vector>

namespace progplan {

/// One ground action by name: schema followed by object arguments.
struct PlanStep {
  std::string schema;
  std::vector<std::string> args;

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

std::string to_string(const PlanStep& step);

/// A sequential plan. All actions have unit cost in the supported fragment.
struct Plan {
  std::vector<PlanStep> steps;

  double cost() const { return static_cast<double>(steps.size()); }
  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }

  friend bool operator==(const Plan&, const Plan&) = default;
};

/// IPC plan text: one "(name arg...)" per line, ';' comments, and a final
/// "; cost = N (unit cost)" line.
std::string write_ipc_plan(const Plan& plan);

/// Inverse of write_ipc_plan. Names are lower-cased; comment and blank lines
/// are skipped. Throws std::invalid_argument on a malformed step line.
Plan parse_ipc_plan(std::string_view text);

}  // namespace progplan

#endif  // PROGPLAN_PLAN_HPP
