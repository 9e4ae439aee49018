#include "progplan/validator.hpp"

#include <map>
#include <set>

namespace progplan {

UnknownAction::UnknownAction(std::string name, const std::string& detail)
    : SemanticError("UnknownAction", std::move(name), detail) {}

std::string_view to_string(ValidationOutcome::Reason r) {
  switch (r) {
    case ValidationOutcome::Reason::None: return "none";
    case ValidationOutcome::Reason::InapplicableLiteral: return "inapplicable-literal";
    case ValidationOutcome::Reason::GoalUnsatisfied: return "goal-unsatisfied";
  }
  return "?";
}

namespace {

using Facts = std::set<Atom>;
using Binding = std::map<std::string, std::string>;

Atom substitute(const Atom& a, const Binding& b) {
  Atom out{a.predicate, {}};
  for (const auto& x : a.args) {
    if (!x.empty() && x[0] == '?') {
      auto it = b.find(x.substr(1));
      out.args.push_back(it == b.end() ? x : it->second);
    } else {
      out.args.push_back(x);
    }
  }
  return out;
}

// Schema variables may be stored with or without the '?'.
std::string bare(const std::string& v) { return !v.empty() && v[0] == '?' ? v.substr(1) : v; }

bool literal_holds(const Literal& lit, const Facts& facts) {
  bool truth;
  if (lit.kind == Literal::Kind::Equality)
    truth = lit.atom.args.size() == 2 && lit.atom.args[0] == lit.atom.args[1];
  else
    truth = facts.count(lit.atom) > 0;
  return truth == lit.positive;
}

Literal ground(const Literal& lit, const Binding& b) {
  Literal g = lit;
  g.atom = substitute(lit.atom, b);
  return g;
}

}  // namespace

ValidationOutcome validate_plan(const Domain& domain, const Problem& problem, const Plan& plan) {
  Facts facts(problem.init.begin(), problem.init.end());

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& step = plan.steps[i];
    const ActionSchema* schema = nullptr;
    for (const auto& s : domain.schemas)
      if (s.name == step.schema) schema = &s;
    if (!schema) throw UnknownAction(step.schema, "no such schema");
    if (schema->params.size() != step.args.size())
      throw UnknownAction(step.schema, "expects " + std::to_string(schema->params.size()) +
                                           " arguments, got " + std::to_string(step.args.size()));

    Binding binding;
    for (std::size_t k = 0; k < step.args.size(); ++k) {
      const std::string& obj = step.args[k];
      const std::string* type = object_type(domain, problem, obj);
      if (!type) throw UnknownObject(obj);
      const TypedName& param = schema->params[k];
      if (!domain.is_subtype(*type, param.type)) {
        ValidationOutcome out;
        out.step = i;
        out.reason = ValidationOutcome::Reason::InapplicableLiteral;
        out.detail = "(" + param.type + " " + obj + ")";
        return out;
      }
      binding[bare(param.name)] = obj;
    }

    for (const Literal& pre : schema->precondition) {
      Literal g = ground(pre, binding);
      if (!literal_holds(g, facts)) {
        ValidationOutcome out;
        out.step = i;
        out.reason = ValidationOutcome::Reason::InapplicableLiteral;
        out.detail = to_string(g);
        return out;
      }
    }

    // Deletes first, then adds: an atom both added and deleted stays true.
    for (const Atom& d : schema->del) facts.erase(substitute(d, binding));
    for (const Atom& a : schema->add) facts.insert(substitute(a, binding));
  }

  for (const Literal& g : problem.goal) {
    if (!literal_holds(g, facts)) {
      ValidationOutcome out;
      out.step = plan.steps.size();
      out.reason = ValidationOutcome::Reason::GoalUnsatisfied;
      out.detail = to_string(g);
      return out;
    }
  }
  return ValidationOutcome::ok(static_cast<double>(plan.steps.size()));
}

}  // namespace progplan
