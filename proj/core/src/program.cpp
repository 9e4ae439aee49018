#include "progplan/program.hpp"

#include <cmath>
#include <stdexcept>

namespace progplan {

std::string_view to_string(ProgramKind kind) {
  return kind == ProgramKind::Value ? "value" : "policy";
}

ProgramKind parse_program_kind(std::string_view text) {
  if (text == "value") return ProgramKind::Value;
  if (text == "policy") return ProgramKind::Policy;
  throw std::invalid_argument("program kind must be 'value' or 'policy', got '" +
                              std::string(text) + "'");
}

double goal_count(const Task& task, const State& s) {
  std::size_t unmet = 0;
  for (AtomCode c : task.goal_positive())
    if (!task.holds(s, c)) ++unmet;
  for (AtomCode c : task.goal_negative())
    if (task.holds(s, c)) ++unmet;
  if (!task.goal_equalities_hold()) ++unmet;
  return static_cast<double>(unmet);
}

ValueReply BlindValue::evaluate(const Task& task, const State& s) {
  return is_goal(task, s) ? 0.0 : 1.0;
}

PolicyReply RandomPolicy::choose(const Task&, const State&,
                                 std::span<const GroundAction> applicable) {
  if (applicable.empty()) return EvalError{"no applicable actions"};
  std::uniform_int_distribution<std::size_t> pick(0, applicable.size() - 1);
  return static_cast<std::int64_t>(pick(rng_));
}

double SafeValue::operator()(const Task& task, const State& s) {
  ValueReply reply;
  try {
    reply = inner_->evaluate(task, s);
  } catch (...) {
    ++faults_;
    return large_;
  }
  if (const double* v = std::get_if<double>(&reply)) {
    if (std::isfinite(*v)) return *v;
  }
  ++faults_;
  return large_;
}

std::size_t SoundPolicy::choose_index(const Task& task, const State& s,
                                      std::span<const GroundAction> applicable) {
  if (applicable.empty()) throw std::logic_error("SoundPolicy needs a non-empty applicable list");
  try {
    PolicyReply reply = inner_->choose(task, s, applicable);
    if (const auto* i = std::get_if<std::int64_t>(&reply)) {
      if (*i >= 0 && static_cast<std::uint64_t>(*i) < applicable.size())
        return static_cast<std::size_t>(*i);
    }
  } catch (...) {
  }
  ++fallbacks_;
  std::uniform_int_distribution<std::size_t> pick(0, applicable.size() - 1);
  return pick(rng_);
}

double safe_value(SafeValue& v, const Task& task, const State& s) { return v(task, s); }

const GroundAction& sound_action(SoundPolicy& p, const Task& task, const State& s,
                                 std::span<const GroundAction> applicable) {
  return p(task, s, applicable);
}

}  // namespace progplan
