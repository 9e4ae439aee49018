#include "progplan/anonymize.hpp"

#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace progplan {

namespace {

constexpr std::array<std::string_view, kNameCategoryCount> kTags{
    "domain", "problem", "type", "predicate", "function", "schema", "object", "variable"};
constexpr std::array<std::string_view, kNameCategoryCount> kPrefixes{"d", "i", "t", "p",
                                                                      "f", "a", "o", "v"};

}  // namespace

std::string_view category_tag(NameCategory c) { return kTags[static_cast<std::size_t>(c)]; }
std::string_view category_prefix(NameCategory c) {
  return kPrefixes[static_cast<std::size_t>(c)];
}

UnknownName::UnknownName(NameCategory category, std::string name)
    : std::runtime_error("unknown " + std::string(category_tag(category)) + " name '" + name +
                         "'"),
      category_(category),
      name_(std::move(name)) {}

const std::string& NameMap::assign(NameCategory c, const std::string& original) {
  auto& fwd = forward_[idx(c)];
  if (auto it = fwd.find(original); it != fwd.end()) return it->second;
  std::string anon = (c == NameCategory::Type && original == kRootType)
                         ? std::string(kRootType)
                         : std::string(category_prefix(c)) +
                               std::to_string(ordered_[idx(c)].size() + 1);
  backward_[idx(c)].emplace(anon, original);
  ordered_[idx(c)].emplace_back(original, anon);
  return fwd.emplace(original, std::move(anon)).first->second;
}

const std::string& NameMap::forward(NameCategory c, const std::string& original) const {
  const auto& m = forward_[idx(c)];
  auto it = m.find(original);
  if (it == m.end()) throw UnknownName(c, original);
  return it->second;
}

const std::string& NameMap::backward(NameCategory c, const std::string& anonymous) const {
  const auto& m = backward_[idx(c)];
  auto it = m.find(anonymous);
  if (it == m.end()) throw UnknownName(c, anonymous);
  return it->second;
}

bool NameMap::contains_forward(NameCategory c, const std::string& original) const {
  return forward_[idx(c)].count(original) > 0;
}

std::size_t NameMap::size(NameCategory c) const { return ordered_[idx(c)].size(); }

const std::vector<std::pair<std::string, std::string>>& NameMap::entries(NameCategory c) const {
  return ordered_[idx(c)];
}

void NameMap::save(std::ostream& out) const {
  out << "# progplan-namemap v1\n";
  for (std::size_t c = 0; c < kNameCategoryCount; ++c)
    for (const auto& [orig, anon] : ordered_[c]) out << kTags[c] << ' ' << orig << ' ' << anon << '\n';
}

NameMap NameMap::load(std::istream& in) {
  NameMap m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ws(line);
    std::string tag, orig, anon, extra;
    if (!(ws >> tag >> orig >> anon) || (ws >> extra))
      throw std::invalid_argument("namemap line " + std::to_string(lineno) +
                                  ": expected '<category> <original> <anonymous>'");
    std::size_t c = 0;
    while (c < kNameCategoryCount && kTags[c] != tag) ++c;
    if (c == kNameCategoryCount)
      throw std::invalid_argument("namemap line " + std::to_string(lineno) +
                                  ": unknown category '" + tag + "'");
    if (m.forward_[c].count(orig) || m.backward_[c].count(anon))
      throw std::invalid_argument("namemap line " + std::to_string(lineno) +
                                  ": entry is not one-to-one");
    m.forward_[c].emplace(orig, anon);
    m.backward_[c].emplace(anon, orig);
    m.ordered_[c].emplace_back(orig, anon);
  }
  return m;
}

namespace {

using Renamer = std::function<std::string(NameCategory, const std::string&)>;

std::string rename_term(const Renamer& r, const std::string& term) {
  if (!term.empty() && term.front() == '?')
    return "?" + r(NameCategory::Variable, term.substr(1));
  return r(NameCategory::Object, term);
}

void rename_typed(const Renamer& r, std::vector<TypedName>& names, bool variables) {
  for (auto& n : names) {
    n.name = variables ? rename_term(r, n.name) : r(NameCategory::Object, n.name);
    n.type = r(NameCategory::Type, n.type);
  }
}

void rename_atom(const Renamer& r, Atom& a) {
  a.predicate = r(NameCategory::Predicate, a.predicate);
  for (auto& arg : a.args) arg = rename_term(r, arg);
}

void rename_literal(const Renamer& r, Literal& l) {
  if (l.kind == Literal::Kind::Equality) {
    for (auto& arg : l.atom.args) arg = rename_term(r, arg);
  } else {
    rename_atom(r, l.atom);
  }
}

Domain rename_domain(Domain d, const Renamer& r) {
  d.name = r(NameCategory::Domain, d.name);
  for (auto& t : d.types) {
    t.name = r(NameCategory::Type, t.name);
    t.parent = r(NameCategory::Type, t.parent);
  }
  rename_typed(r, d.constants, false);
  for (auto& p : d.predicates) {
    p.name = r(NameCategory::Predicate, p.name);
    rename_typed(r, p.params, true);
  }
  for (auto& s : d.schemas) {
    s.name = r(NameCategory::Schema, s.name);
    rename_typed(r, s.params, true);
    for (auto& l : s.precondition) rename_literal(r, l);
    for (auto& a : s.add) rename_atom(r, a);
    for (auto& a : s.del) rename_atom(r, a);
  }
  return d;
}

Problem rename_problem(Problem p, const Renamer& r) {
  p.name = r(NameCategory::Problem, p.name);
  p.domain_name = r(NameCategory::Domain, p.domain_name);
  rename_typed(r, p.objects, false);
  for (auto& a : p.init) rename_atom(r, a);
  for (auto& l : p.goal) rename_literal(r, l);
  return p;
}

Renamer backward_renamer(const NameMap& names) {
  return [&names](NameCategory c, const std::string& n) -> std::string {
    if (c == NameCategory::Type && n == kRootType) return n;
    return names.backward(c, n);
  };
}

}  // namespace

AnonymizedSet anonymize(const Domain& domain, const std::vector<Problem>& problems) {
  AnonymizedSet out;
  Renamer assign = [&out](NameCategory c, const std::string& n) -> std::string {
    return out.names.assign(c, n);
  };
  out.domain = rename_domain(domain, assign);
  out.problems.reserve(problems.size());
  for (const auto& p : problems) out.problems.push_back(rename_problem(p, assign));
  return out;
}

Domain deanonymize(const Domain& domain, const NameMap& names) {
  return rename_domain(domain, backward_renamer(names));
}

Problem deanonymize(const Problem& problem, const NameMap& names) {
  return rename_problem(problem, backward_renamer(names));
}

Plan deanonymize_plan(const Plan& plan, const NameMap& names) {
  Plan out;
  out.steps.reserve(plan.steps.size());
  for (const auto& s : plan.steps) {
    PlanStep step{names.backward(NameCategory::Schema, s.schema), {}};
    for (const auto& a : s.args) step.args.push_back(names.backward(NameCategory::Object, a));
    out.steps.push_back(std::move(step));
  }
  return out;
}

Plan anonymize_plan(const Plan& plan, const NameMap& names) {
  Plan out;
  out.steps.reserve(plan.steps.size());
  for (const auto& s : plan.steps) {
    PlanStep step{names.forward(NameCategory::Schema, s.schema), {}};
    for (const auto& a : s.args) step.args.push_back(names.forward(NameCategory::Object, a));
    out.steps.push_back(std::move(step));
  }
  return out;
}

}  // namespace progplan
