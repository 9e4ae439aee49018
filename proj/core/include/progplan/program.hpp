#ifndef PROGPLAN_PROGRAM_HPP
#define PROGPLAN_PROGRAM_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>

#include "progplan/task.hpp"

namespace progplan {

/// Substitute for infinite, non-numeric or failed value replies. Exceeds any
/// plausible finite heuristic value and is exactly representable as a double.
inline constexpr double kLargeValue = 1e9;

enum class ProgramKind { Value, Policy };

std::string_view to_string(ProgramKind kind);
ProgramKind parse_program_kind(std::string_view text);

// ---------------------------------------------------------------------------
// Raw evaluator replies, before wrapping
// ---------------------------------------------------------------------------

struct Infinite {};
struct EvalError {
  std::string message;
};

/// What a value program said about a state: a number, infinity, or a fault.
using ValueReply = std::variant<double, Infinite, EvalError>;

/// What a policy program said: an index into the applicable list, or a fault.
using PolicyReply = std::variant<std::int64_t, EvalError>;

/// A heuristic / value function h: S → R ∪ {∞}. Implementations may throw;
/// SafeValue absorbs every failure.
class ValueFunction {
 public:
  virtual ~ValueFunction() = default;
  virtual ValueReply evaluate(const Task& task, const State& s) = 0;
  virtual std::string describe() const = 0;
};

/// A policy choosing among the applicable actions of a state.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyReply choose(const Task& task, const State& s,
                             std::span<const GroundAction> applicable) = 0;
  virtual std::string describe() const = 0;
};

// ---------------------------------------------------------------------------
// Built-ins
// ---------------------------------------------------------------------------

/// Number of goal literals not satisfied in `s`.
double goal_count(const Task& task, const State& s);

class GoalCountValue final : public ValueFunction {
 public:
  ValueReply evaluate(const Task& task, const State& s) override { return goal_count(task, s); }
  std::string describe() const override { return "goal-count"; }
};

/// 0 on goal states, 1 elsewhere.
class BlindValue final : public ValueFunction {
 public:
  ValueReply evaluate(const Task& task, const State& s) override;
  std::string describe() const override { return "blind"; }
};

class ConstantValue final : public ValueFunction {
 public:
  explicit ConstantValue(double v) : value_(v) {}
  ValueReply evaluate(const Task&, const State&) override { return value_; }
  std::string describe() const override { return "constant"; }

 private:
  double value_;
};

class FirstApplicablePolicy final : public Policy {
 public:
  PolicyReply choose(const Task&, const State&, std::span<const GroundAction>) override {
    return std::int64_t{0};
  }
  std::string describe() const override { return "first-applicable"; }
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  PolicyReply choose(const Task&, const State&, std::span<const GroundAction> applicable) override;
  std::string describe() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
};

/// Adapters for in-process callables (scripted test programs).
class LambdaValue final : public ValueFunction {
 public:
  using Fn = std::function<ValueReply(const Task&, const State&)>;
  explicit LambdaValue(Fn fn, std::string name = "lambda")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  ValueReply evaluate(const Task& task, const State& s) override { return fn_(task, s); }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

class LambdaPolicy final : public Policy {
 public:
  using Fn = std::function<PolicyReply(const Task&, const State&, std::span<const GroundAction>)>;
  explicit LambdaPolicy(Fn fn, std::string name = "lambda")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  PolicyReply choose(const Task& task, const State& s,
                     std::span<const GroundAction> applicable) override {
    return fn_(task, s, applicable);
  }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Wrappers
// ---------------------------------------------------------------------------

/// Makes any value function safe: never returns infinity or NaN and never
/// throws. Faults map to `large`.
class SafeValue {
 public:
  explicit SafeValue(std::shared_ptr<ValueFunction> inner, double large = kLargeValue)
      : inner_(std::move(inner)), large_(large) {}

  double operator()(const Task& task, const State& s);

  double large() const { return large_; }
  std::uint64_t faults() const { return faults_; }
  ValueFunction& inner() { return *inner_; }

 private:
  std::shared_ptr<ValueFunction> inner_;
  double large_;
  std::uint64_t faults_{0};
};

/// Makes any policy sound: the returned action is always a member of the
/// applicable list. Invalid replies fall back to a uniformly random member.
class SoundPolicy {
 public:
  SoundPolicy(std::shared_ptr<Policy> inner, std::uint64_t seed)
      : inner_(std::move(inner)), rng_(seed) {}

  /// Index into `applicable`, which must be non-empty.
  std::size_t choose_index(const Task& task, const State& s,
                           std::span<const GroundAction> applicable);

  const GroundAction& operator()(const Task& task, const State& s,
                                 std::span<const GroundAction> applicable) {
    return applicable[choose_index(task, s, applicable)];
  }

  std::uint64_t fallbacks() const { return fallbacks_; }
  Policy& inner() { return *inner_; }

 private:
  std::shared_ptr<Policy> inner_;
  std::mt19937_64 rng_;
  std::uint64_t fallbacks_{0};
};

/// Free-function forms of the two wrappers.
double safe_value(SafeValue& v, const Task& task, const State& s);
const GroundAction& sound_action(SoundPolicy& p, const Task& task, const State& s,
                                 std::span<const GroundAction> applicable);

}  // namespace progplan

#endif  // PROGPLAN_PROGRAM_HPP
