#ifndef PROGPLAN_TESTS_BRIDGE_HPP
#define PROGPLAN_TESTS_BRIDGE_HPP

// Conversions between grounder states and oracle fact sets.

#include <algorithm>

#include "oracle.hpp"
#include "progplan/task.hpp"

namespace fixtures {

inline oracle::Facts facts_of(const progplan::Task& task, const progplan::State& s) {
  auto atoms = task.atoms_of(s);
  return oracle::Facts(atoms.begin(), atoms.end());
}

/// Fluent atoms of `facts` as a State; static atoms are dropped.
inline progplan::State state_of(const progplan::Task& task, const oracle::Facts& facts) {
  std::vector<progplan::AtomCode> codes;
  for (const auto& a : facts) {
    auto pred = task.predicate_id(a.predicate);
    if (!pred || task.is_static(*pred)) continue;
    std::vector<progplan::ObjectId> args;
    for (const auto& x : a.args) args.push_back(*task.object_id(x));
    codes.push_back(task.encode(*pred, args));
  }
  std::sort(codes.begin(), codes.end());
  return progplan::State(std::move(codes));
}

inline std::vector<progplan::PlanStep> steps_of(const progplan::Task& task,
                                                const std::vector<progplan::GroundAction>& as) {
  std::vector<progplan::PlanStep> out;
  for (const auto& a : as) out.push_back(task.step(a));
  return out;
}

}  // namespace fixtures

#endif
