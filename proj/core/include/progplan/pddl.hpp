#ifndef PROGPLAN_PDDL_HPP
#define PROGPLAN_PDDL_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace progplan {

/// Name of the implicit root of every type hierarchy.
inline constexpr std::string_view kRootType = "object";

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class PddlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input. `line`/`column` are 1-based; `offset` is the 0-based
/// byte offset, so an empty document reports offset 0.
class SyntaxError : public PddlError {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::size_t offset,
              std::string expected);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::size_t offset_;
  std::string expected_;
};

/// Valid PDDL outside the accepted fragment (numeric fluents, conditional
/// effects, quantifiers, disjunctions, unlisted requirement flags).
class UnsupportedFeature : public PddlError {
 public:
  explicit UnsupportedFeature(std::string construct);
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

/// A structurally well-formed document that breaks a model invariant.
class SemanticError : public PddlError {
 public:
  SemanticError(std::string kind, std::string subject, const std::string& detail);
  const std::string& kind() const { return kind_; }
  const std::string& subject() const { return subject_; }

 private:
  std::string kind_;
  std::string subject_;
};

class UnknownPredicate : public SemanticError {
 public:
  explicit UnknownPredicate(std::string name);
};

class UnknownObject : public SemanticError {
 public:
  explicit UnknownObject(std::string name);
};

class UnknownType : public SemanticError {
 public:
  explicit UnknownType(std::string name);
};

class ArityMismatch : public SemanticError {
 public:
  ArityMismatch(std::string atom, std::size_t expected, std::size_t actual);
};

class TypeMismatch : public SemanticError {
 public:
  TypeMismatch(std::string atom, const std::string& detail);
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct TypedName {
  std::string name;
  std::string type{kRootType};

  friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct TypeDecl {
  std::string name;
  std::string parent{kRootType};

  friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

/// Predicate application. Arguments are variables ("?x") inside schemas and
/// object names everywhere else.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

struct Literal {
  enum class Kind { Atom, Equality };

  Kind kind{Kind::Atom};
  bool positive{true};
  /// For equality literals `atom.predicate` is "=" and `atom.args` has size 2.
  Atom atom;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<TypedName> params;

  friend bool operator==(const PredicateDecl&, const PredicateDecl&) = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<Literal> precondition;
  std::vector<Atom> add;
  std::vector<Atom> del;

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct Domain {
  std::string name;
  std::vector<std::string> requirements;
  std::vector<TypeDecl> types;
  std::vector<TypedName> constants;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> schemas;

  const PredicateDecl* find_predicate(std::string_view name) const;
  const ActionSchema* find_schema(std::string_view name) const;
  bool has_type(std::string_view name) const;
  /// Parent of `type`; the root is its own parent.
  std::string_view parent_of(std::string_view type) const;
  /// True when `type` equals `ancestor` or descends from it.
  bool is_subtype(std::string_view type, std::string_view ancestor) const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<Atom> init;
  std::vector<Literal> goal;

  friend bool operator==(const Problem&, const Problem&) = default;
};

// ---------------------------------------------------------------------------
// Parsing and printing
// ---------------------------------------------------------------------------

/// Identifiers are folded to lower case; ';' starts a comment.
Domain parse_domain(std::string_view text);
Problem parse_problem(std::string_view text, const Domain& domain);

std::string print_domain(const Domain& domain);
std::string print_problem(const Problem& problem);

/// Domain followed by problem, as one document pair.
std::pair<std::string, std::string> print_pddl(const Domain& domain,
                                               const Problem& problem);

/// Declared type of `object` in the scope of `problem` (domain constants
/// included), or nullptr.
const std::string* object_type(const Domain& domain, const Problem& problem,
                               std::string_view object);

std::string to_string(const Atom& atom);
std::string to_string(const Literal& literal);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace progplan

#endif  // PROGPLAN_PDDL_HPP
