#ifndef PROGPLAN_ANONYMIZE_HPP
#define PROGPLAN_ANONYMIZE_HPP

#include <array>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "progplan/pddl.hpp"
#include "progplan/plan.hpp"

namespace progplan {

/// Identifier categories. Each has its own symbol prefix:
/// domain d, problem i, type t, predicate p, function f, schema a,
/// object o, variable v. Functions are reserved; the fragment has none.
enum class NameCategory { Domain, Problem, Type, Predicate, Function, Schema, Object, Variable };

inline constexpr std::size_t kNameCategoryCount = 8;

std::string_view category_tag(NameCategory c);
std::string_view category_prefix(NameCategory c);

class UnknownName : public std::runtime_error {
 public:
  UnknownName(NameCategory category, std::string name);
  NameCategory category() const { return category_; }
  const std::string& name() const { return name_; }

 private:
  NameCategory category_;
  std::string name_;
};

/// Per-category bijection between original and anonymous names.
class NameMap {
 public:
  /// Returns the anonymous name for `original`, assigning the next index in
  /// its category on first sight. The root type maps to itself.
  const std::string& assign(NameCategory c, const std::string& original);

  const std::string& forward(NameCategory c, const std::string& original) const;
  const std::string& backward(NameCategory c, const std::string& anonymous) const;
  bool contains_forward(NameCategory c, const std::string& original) const;
  std::size_t size(NameCategory c) const;

  /// Entries in assignment order per category.
  const std::vector<std::pair<std::string, std::string>>& entries(NameCategory c) const;

  /// Flat text: a "# progplan-namemap v1" header, then one
  /// "<category> <original> <anonymous>" line per entry.
  void save(std::ostream& out) const;
  static NameMap load(std::istream& in);

  friend bool operator==(const NameMap& a, const NameMap& b) { return a.ordered_ == b.ordered_; }

 private:
  static std::size_t idx(NameCategory c) { return static_cast<std::size_t>(c); }

  std::array<std::map<std::string, std::string, std::less<>>, kNameCategoryCount> forward_;
  std::array<std::map<std::string, std::string, std::less<>>, kNameCategoryCount> backward_;
  std::array<std::vector<std::pair<std::string, std::string>>, kNameCategoryCount> ordered_;
};

struct AnonymizedSet {
  Domain domain;
  std::vector<Problem> problems;
  NameMap names;
};

/// Replaces every identifier with an enumerated per-category symbol,
/// assigned in first-occurrence order across the domain then the problems.
AnonymizedSet anonymize(const Domain& domain, const std::vector<Problem>& problems);

/// Maps anonymized structures back through `names`; throws UnknownName.
Domain deanonymize(const Domain& domain, const NameMap& names);
Problem deanonymize(const Problem& problem, const NameMap& names);

/// Plan names (schemas, objects) from anonymous back to original.
Plan deanonymize_plan(const Plan& plan, const NameMap& names);
/// Plan names from original to anonymous.
Plan anonymize_plan(const Plan& plan, const NameMap& names);

}  // namespace progplan

#endif  // PROGPLAN_ANONYMIZE_HPP
