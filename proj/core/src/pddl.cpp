#include "progplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace progplan {

SyntaxError::SyntaxError(std::size_t line, std::size_t column, std::size_t offset,
                         std::string expected)
    : PddlError("syntax error at line " + std::to_string(line) + ", column " +
                std::to_string(column) + ": expected " + expected),
      line_(line),
      column_(column),
      offset_(offset),
      expected_(std::move(expected)) {}

UnsupportedFeature::UnsupportedFeature(std::string construct)
    : PddlError("unsupported PDDL feature: " + construct),
      construct_(std::move(construct)) {}

SemanticError::SemanticError(std::string kind, std::string subject,
                             const std::string& detail)
    : PddlError(kind + ": " + detail), kind_(std::move(kind)), subject_(std::move(subject)) {}

UnknownPredicate::UnknownPredicate(std::string name)
    : SemanticError("UnknownPredicate", name, "undeclared predicate '" + name + "'") {}

UnknownObject::UnknownObject(std::string name)
    : SemanticError("UnknownObject", name, "undeclared object '" + name + "'") {}

UnknownType::UnknownType(std::string name)
    : SemanticError("UnknownType", name, "undeclared type '" + name + "'") {}

ArityMismatch::ArityMismatch(std::string atom, std::size_t expected, std::size_t actual)
    : SemanticError("ArityMismatch", atom,
                    atom + " has " + std::to_string(actual) + " arguments, expected " +
                        std::to_string(expected)) {}

TypeMismatch::TypeMismatch(std::string atom, const std::string& detail)
    : SemanticError("TypeMismatch", atom, atom + ": " + detail) {}

// ---------------------------------------------------------------------------
// Domain queries
// ---------------------------------------------------------------------------

const PredicateDecl* Domain::find_predicate(std::string_view n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

const ActionSchema* Domain::find_schema(std::string_view n) const {
  for (const auto& s : schemas)
    if (s.name == n) return &s;
  return nullptr;
}

bool Domain::has_type(std::string_view n) const {
  if (n == kRootType) return true;
  return std::any_of(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == n; });
}

std::string_view Domain::parent_of(std::string_view type) const {
  for (const auto& t : types)
    if (t.name == type) return t.parent;
  return kRootType;
}

bool Domain::is_subtype(std::string_view type, std::string_view ancestor) const {
  if (ancestor == kRootType) return true;
  // The type graph is a validated tree, so the walk is bounded by its size.
  for (std::size_t guard = 0; guard <= types.size() + 1; ++guard) {
    if (type == ancestor) return true;
    if (type == kRootType) return false;
    type = parent_of(type);
  }
  return false;
}

// ---------------------------------------------------------------------------
// S-expressions
// ---------------------------------------------------------------------------

namespace {

struct SExpr {
  bool is_list{false};
  std::string atom;
  std::vector<SExpr> items;
  std::size_t line{1};
  std::size_t column{1};
  std::size_t offset{0};
};

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExpr read_document() {
    skip_space();
    if (at_end()) throw error("'(' to open a definition");
    SExpr doc = read();
    skip_space();
    if (!at_end()) throw error("end of input");
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  SyntaxError error(const std::string& expected) const {
    return SyntaxError(line_, column_, pos_, expected);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end()) {
      char c = text_[pos_];
      if (c == ';') {
        while (!at_end() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip_space();
    if (at_end()) throw error("expression");
    SExpr e;
    e.line = line_;
    e.column = column_;
    e.offset = pos_;
    char c = text_[pos_];
    if (c == ')') throw error("expression");
    if (c == '(') {
      e.is_list = true;
      advance();
      for (;;) {
        skip_space();
        if (at_end()) throw error("')'");
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    while (!at_end()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
      e.atom.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
      advance();
    }
    return e;
  }

  std::string_view text_;
  std::size_t pos_{0};
  std::size_t line_{1};
  std::size_t column_{1};
};

SyntaxError syntax(const SExpr& at, const std::string& expected) {
  return SyntaxError(at.line, at.column, at.offset, expected);
}

bool is_word(const SExpr& e) { return !e.is_list && !e.atom.empty(); }

bool is_variable(std::string_view s) { return s.size() > 1 && s.front() == '?'; }

bool is_name(std::string_view s) {
  if (s.empty() || s.front() == '?' || s.front() == ':' || s == "-") return false;
  return std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_';
}

const std::string& expect_word(const SExpr& e, const char* what) {
  if (!is_word(e)) throw syntax(e, what);
  return e.atom;
}

const std::string& expect_name(const SExpr& e, const char* what) {
  const auto& w = expect_word(e, what);
  if (!is_name(w)) throw syntax(e, what);
  return w;
}

bool is_keyword_list(const SExpr& e, std::string_view keyword) {
  return e.is_list && !e.items.empty() && is_word(e.items[0]) && e.items[0].atom == keyword;
}

const std::set<std::string, std::less<>>& accepted_requirements() {
  static const std::set<std::string, std::less<>> kAccepted{
      ":strips", ":typing", ":negative-preconditions", ":equality"};
  return kAccepted;
}

void check_requirement(const SExpr& e) {
  const auto& r = expect_word(e, "requirement flag");
  if (accepted_requirements().count(r)) return;
  if (r == ":numeric-fluents" || r == ":fluents" || r == ":action-costs" ||
      r == ":object-fluents")
    throw UnsupportedFeature("numeric fluent");
  if (r == ":conditional-effects") throw UnsupportedFeature("conditional effect");
  if (r == ":universal-preconditions" || r == ":existential-preconditions" ||
      r == ":quantified-preconditions")
    throw UnsupportedFeature("quantifier");
  if (r == ":disjunctive-preconditions") throw UnsupportedFeature("disjunctive precondition");
  throw UnsupportedFeature("requirement " + r);
}

/// `a b - t c` → {a:t, b:t, c:object}. Variables allowed iff `variables`.
std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items, std::size_t begin,
                                        bool variables) {
  std::vector<TypedName> out;
  std::size_t pending = 0;
  for (std::size_t i = begin; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (is_word(e) && e.atom == "-") {
      if (pending == 0) throw syntax(e, variables ? "variable before '-'" : "name before '-'");
      if (i + 1 >= items.size()) throw syntax(e, "type name after '-'");
      const SExpr& t = items[++i];
      if (is_keyword_list(t, "either")) throw UnsupportedFeature("either type");
      const auto& type = expect_name(t, "type name");
      for (std::size_t k = out.size() - pending; k < out.size(); ++k) out[k].type = type;
      pending = 0;
      continue;
    }
    const auto& w = expect_word(e, variables ? "variable" : "name");
    if (variables ? !is_variable(w) : !is_name(w))
      throw syntax(e, variables ? "variable" : "name");
    out.push_back(TypedName{w, std::string(kRootType)});
    ++pending;
  }
  return out;
}

[[noreturn]] void reject_construct(const SExpr& head) {
  const auto& w = head.atom;
  if (w == ">=" || w == "<=" || w == ">" || w == "<" || w == "increase" || w == "decrease" ||
      w == "assign" || w == "scale-up" || w == "scale-down" || w == "+" || w == "-" ||
      w == "*" || w == "/")
    throw UnsupportedFeature("numeric fluent");
  if (w == "when") throw UnsupportedFeature("conditional effect");
  if (w == "forall" || w == "exists") throw UnsupportedFeature("quantifier");
  if (w == "or" || w == "imply") throw UnsupportedFeature("disjunctive precondition");
  throw syntax(head, "predicate name");
}

bool is_reserved_head(std::string_view w) {
  static const std::unordered_set<std::string_view> kReserved{
      ">=", "<=", ">", "<", "increase", "decrease", "assign", "scale-up", "scale-down", "+",
      "-", "*", "/", "when", "forall", "exists", "or", "imply"};
  return kReserved.count(w) > 0;
}

Atom parse_atom(const SExpr& e, bool allow_variables) {
  if (!e.is_list || e.items.empty()) throw syntax(e, "atom");
  const SExpr& head = e.items[0];
  if (!is_word(head)) throw syntax(head, "predicate name");
  if (is_reserved_head(head.atom)) reject_construct(head);
  if (!is_name(head.atom)) throw syntax(head, "predicate name");
  Atom a;
  a.predicate = head.atom;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const SExpr& arg = e.items[i];
    if (arg.is_list) throw UnsupportedFeature("numeric fluent");
    const auto& w = expect_word(arg, "argument");
    if (is_variable(w)) {
      if (!allow_variables) throw syntax(arg, "object name");
    } else if (!is_name(w)) {
      throw syntax(arg, "argument");
    }
    a.args.push_back(w);
  }
  return a;
}

Literal parse_literal(const SExpr& e, bool allow_variables) {
  if (!e.is_list || e.items.empty()) throw syntax(e, "literal");
  const SExpr& head = e.items[0];
  if (!is_word(head)) throw syntax(head, "literal");
  if (head.atom == "not") {
    if (e.items.size() != 2) throw syntax(e, "(not <atom>)");
    Literal l = parse_literal(e.items[1], allow_variables);
    if (!l.positive) throw syntax(e.items[1], "atom inside 'not'");
    l.positive = false;
    return l;
  }
  if (head.atom == "=") {
    if (e.items.size() != 3) throw syntax(e, "(= <term> <term>)");
    Literal l;
    l.kind = Literal::Kind::Equality;
    l.atom.predicate = "=";
    for (std::size_t i = 1; i < 3; ++i) {
      if (e.items[i].is_list) throw UnsupportedFeature("numeric fluent");
      const auto& w = expect_word(e.items[i], "term");
      if (is_variable(w) && !allow_variables) throw syntax(e.items[i], "object name");
      if (std::isdigit(static_cast<unsigned char>(w.front())))
        throw UnsupportedFeature("numeric fluent");
      l.atom.args.push_back(w);
    }
    return l;
  }
  Literal l;
  l.atom = parse_atom(e, allow_variables);
  return l;
}

void collect_conjunction(const SExpr& e, bool allow_variables, std::vector<Literal>& out) {
  if (!e.is_list) throw syntax(e, "condition");
  if (e.items.empty()) return;
  if (is_keyword_list(e, "and")) {
    for (std::size_t i = 1; i < e.items.size(); ++i)
      collect_conjunction(e.items[i], allow_variables, out);
    return;
  }
  out.push_back(parse_literal(e, allow_variables));
}

void collect_effect(const SExpr& e, std::vector<Atom>& add, std::vector<Atom>& del) {
  if (!e.is_list) throw syntax(e, "effect");
  if (e.items.empty()) return;
  const SExpr& head = e.items[0];
  if (is_word(head) && head.atom == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) collect_effect(e.items[i], add, del);
    return;
  }
  if (is_word(head) && head.atom == "not") {
    if (e.items.size() != 2) throw syntax(e, "(not <atom>)");
    del.push_back(parse_atom(e.items[1], true));
    return;
  }
  if (is_word(head) && head.atom == "=") throw UnsupportedFeature("numeric fluent");
  add.push_back(parse_atom(e, true));
}

template <class T>
void push_unique(std::vector<T>& v, T item) {
  if (std::find(v.begin(), v.end(), item) == v.end()) v.push_back(std::move(item));
}

// --- Domain validation -------------------------------------------------------

void validate_types(Domain& d) {
  std::unordered_map<std::string, std::string> parent;
  for (const auto& t : d.types) {
    if (t.name == kRootType) throw SemanticError("InvalidType", t.name, "'object' is implicit");
    if (!parent.emplace(t.name, t.parent).second &&
        parent[t.name] != t.parent)
      throw SemanticError("InvalidType", t.name, "type '" + t.name + "' has two parents");
  }
  // Undeclared parents are declared implicitly under the root.
  const std::size_t declared = d.types.size();
  for (std::size_t i = 0; i < declared; ++i) {
    const std::string p = d.types[i].parent;
    if (p != kRootType && !parent.count(p)) {
      parent.emplace(p, std::string(kRootType));
      d.types.push_back(TypeDecl{p, std::string(kRootType)});
    }
  }
  // Remove exact duplicates, keep first occurrence.
  std::vector<TypeDecl> unique;
  for (auto& t : d.types) push_unique(unique, t);
  d.types = std::move(unique);
  for (const auto& t : d.types) {
    std::string cur = t.name;
    for (std::size_t steps = 0; cur != kRootType; ++steps) {
      if (steps > d.types.size())
        throw SemanticError("InvalidType", t.name, "cyclic type hierarchy at '" + t.name + "'");
      cur = parent.at(cur);
    }
  }
}

void require_type(const Domain& d, const std::string& type) {
  if (!d.has_type(type)) throw UnknownType(type);
}

void check_term_types(const Domain& d, const Atom& atom, const PredicateDecl& decl,
                      const std::unordered_map<std::string, std::string>& scope) {
  if (atom.args.size() != decl.params.size())
    throw ArityMismatch(to_string(atom), decl.params.size(), atom.args.size());
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    auto it = scope.find(atom.args[i]);
    if (it == scope.end()) {
      if (is_variable(atom.args[i]))
        throw SemanticError("UnknownVariable", atom.args[i],
                            "variable " + atom.args[i] + " is not a parameter (in " +
                                to_string(atom) + ")");
      throw UnknownObject(atom.args[i]);
    }
    const auto& have = it->second;
    const auto& want = decl.params[i].type;
    // Domains may narrow or widen a parameter type; both directions are accepted.
    if (!d.is_subtype(have, want) && !d.is_subtype(want, have))
      throw TypeMismatch(to_string(atom), "argument " + std::to_string(i + 1) + " has type " +
                                              have + ", predicate expects " + want);
  }
}

void validate_domain(Domain& d) {
  validate_types(d);
  std::unordered_map<std::string, std::string> category;
  auto claim = [&](const std::string& name, const char* cat) {
    auto [it, fresh] = category.emplace(name, cat);
    if (!fresh) {
      if (it->second == std::string(cat))
        throw SemanticError("DuplicateName", name, std::string("duplicate ") + cat + " '" + name + "'");
      throw SemanticError("NameCollision", name,
                          "'" + name + "' is both a " + it->second + " and a " + cat);
    }
  };
  for (const auto& t : d.types) claim(t.name, "type");
  for (const auto& p : d.predicates) {
    claim(p.name, "predicate");
    for (const auto& param : p.params) require_type(d, param.type);
  }
  for (const auto& s : d.schemas) claim(s.name, "schema");

  std::unordered_map<std::string, std::string> constants;
  for (const auto& c : d.constants) {
    require_type(d, c.type);
    if (!constants.emplace(c.name, c.type).second)
      throw SemanticError("DuplicateName", c.name, "duplicate constant '" + c.name + "'");
  }

  for (const auto& s : d.schemas) {
    auto scope = constants;
    for (const auto& p : s.params) {
      require_type(d, p.type);
      if (scope.count(p.name) && is_variable(p.name))
        throw SemanticError("DuplicateName", p.name,
                            "parameter " + p.name + " repeated in " + s.name);
      scope[p.name] = p.type;
    }
    auto check = [&](const Atom& a) {
      const auto* decl = d.find_predicate(a.predicate);
      if (!decl) throw UnknownPredicate(a.predicate);
      check_term_types(d, a, *decl, scope);
    };
    for (const auto& l : s.precondition) {
      if (l.kind == Literal::Kind::Equality) {
        for (const auto& arg : l.atom.args)
          if (!scope.count(arg)) {
            if (is_variable(arg))
              throw SemanticError("UnknownVariable", arg, "variable " + arg + " is not a parameter");
            throw UnknownObject(arg);
          }
      } else {
        check(l.atom);
      }
    }
    for (const auto& a : s.add) check(a);
    for (const auto& a : s.del) check(a);
  }
}

void parse_action(const SExpr& e, Domain& d) {
  if (e.items.size() < 2) throw syntax(e, "action name");
  ActionSchema s;
  s.name = expect_name(e.items[1], "action name");
  for (std::size_t i = 2; i < e.items.size(); i += 2) {
    const auto& key = expect_word(e.items[i], "action keyword");
    if (i + 1 >= e.items.size()) throw syntax(e.items[i], "value after " + key);
    const SExpr& value = e.items[i + 1];
    if (key == ":parameters") {
      if (!value.is_list) throw syntax(value, "parameter list");
      s.params = parse_typed_list(value.items, 0, true);
    } else if (key == ":precondition") {
      collect_conjunction(value, true, s.precondition);
    } else if (key == ":effect") {
      collect_effect(value, s.add, s.del);
    } else {
      throw syntax(e.items[i], ":parameters, :precondition or :effect");
    }
  }
  d.schemas.push_back(std::move(s));
}

}  // namespace

// ---------------------------------------------------------------------------
// Public parsing
// ---------------------------------------------------------------------------

Domain parse_domain(std::string_view text) {
  SExpr doc = Reader(text).read_document();
  if (!is_keyword_list(doc, "define")) throw syntax(doc, "(define ...)");
  if (doc.items.size() < 2 || !is_keyword_list(doc.items[1], "domain") ||
      doc.items[1].items.size() != 2)
    throw syntax(doc.items.size() > 1 ? doc.items[1] : doc, "(domain <name>)");
  Domain d;
  d.name = expect_name(doc.items[1].items[1], "domain name");

  for (std::size_t i = 2; i < doc.items.size(); ++i) {
    const SExpr& sec = doc.items[i];
    if (!sec.is_list || sec.items.empty()) throw syntax(sec, "domain section");
    const auto& key = expect_word(sec.items[0], "section keyword");
    if (key == ":requirements") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        check_requirement(sec.items[k]);
        push_unique(d.requirements, sec.items[k].atom);
      }
    } else if (key == ":types") {
      for (auto& t : parse_typed_list(sec.items, 1, false))
        d.types.push_back(TypeDecl{t.name, t.type});
    } else if (key == ":constants") {
      auto cs = parse_typed_list(sec.items, 1, false);
      d.constants.insert(d.constants.end(), cs.begin(), cs.end());
    } else if (key == ":predicates") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const SExpr& p = sec.items[k];
        if (!p.is_list || p.items.empty()) throw syntax(p, "predicate declaration");
        PredicateDecl decl;
        decl.name = expect_name(p.items[0], "predicate name");
        decl.params = parse_typed_list(p.items, 1, true);
        d.predicates.push_back(std::move(decl));
      }
    } else if (key == ":functions") {
      throw UnsupportedFeature("numeric fluent");
    } else if (key == ":action") {
      parse_action(sec, d);
    } else if (key == ":derived") {
      throw UnsupportedFeature("derived predicate");
    } else if (key == ":durative-action") {
      throw UnsupportedFeature("durative action");
    } else {
      throw syntax(sec.items[0], "domain section keyword");
    }
  }
  validate_domain(d);
  return d;
}

const std::string* object_type(const Domain& domain, const Problem& problem,
                               std::string_view object) {
  for (const auto& o : problem.objects)
    if (o.name == object) return &o.type;
  for (const auto& c : domain.constants)
    if (c.name == object) return &c.type;
  return nullptr;
}

namespace {

void validate_ground_atom(const Domain& d, const Problem& p, const Atom& a) {
  const auto* decl = d.find_predicate(a.predicate);
  if (!decl) throw UnknownPredicate(a.predicate);
  for (const auto& arg : a.args)
    if (!object_type(d, p, arg)) throw UnknownObject(arg);
  if (a.args.size() != decl->params.size())
    throw ArityMismatch(to_string(a), decl->params.size(), a.args.size());
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const auto& have = *object_type(d, p, a.args[i]);
    if (!d.is_subtype(have, decl->params[i].type))
      throw TypeMismatch(to_string(a), "object " + a.args[i] + " has type " + have +
                                           ", predicate expects " + decl->params[i].type);
  }
}

}  // namespace

Problem parse_problem(std::string_view text, const Domain& domain) {
  SExpr doc = Reader(text).read_document();
  if (!is_keyword_list(doc, "define")) throw syntax(doc, "(define ...)");
  if (doc.items.size() < 2 || !is_keyword_list(doc.items[1], "problem") ||
      doc.items[1].items.size() != 2)
    throw syntax(doc.items.size() > 1 ? doc.items[1] : doc, "(problem <name>)");
  Problem p;
  p.name = expect_name(doc.items[1].items[1], "problem name");
  bool has_goal = false;
  const SExpr* goal_expr = nullptr;

  for (std::size_t i = 2; i < doc.items.size(); ++i) {
    const SExpr& sec = doc.items[i];
    if (!sec.is_list || sec.items.empty()) throw syntax(sec, "problem section");
    const auto& key = expect_word(sec.items[0], "section keyword");
    if (key == ":domain") {
      if (sec.items.size() != 2) throw syntax(sec, "(:domain <name>)");
      p.domain_name = expect_name(sec.items[1], "domain name");
    } else if (key == ":requirements") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) check_requirement(sec.items[k]);
    } else if (key == ":objects") {
      auto objs = parse_typed_list(sec.items, 1, false);
      p.objects.insert(p.objects.end(), objs.begin(), objs.end());
    } else if (key == ":init") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const SExpr& a = sec.items[k];
        if (is_keyword_list(a, "=")) throw UnsupportedFeature("numeric fluent");
        if (is_keyword_list(a, "not")) throw syntax(a, "positive ground atom in :init");
        if (is_keyword_list(a, "at") && a.items.size() == 3 && is_word(a.items[1]) &&
            std::isdigit(static_cast<unsigned char>(a.items[1].atom.front())))
          throw UnsupportedFeature("timed initial literal");
        push_unique(p.init, parse_atom(a, false));
      }
    } else if (key == ":goal") {
      if (sec.items.size() != 2) throw syntax(sec, "(:goal <condition>)");
      has_goal = true;
      goal_expr = &sec.items[1];
      collect_conjunction(sec.items[1], false, p.goal);
    } else if (key == ":metric") {
      throw UnsupportedFeature("metric");
    } else {
      throw syntax(sec.items[0], "problem section keyword");
    }
  }
  if (!has_goal) throw syntax(doc, "(:goal ...)");
  if (p.goal.empty()) throw syntax(*goal_expr, "non-empty goal");
  if (p.domain_name.empty()) throw syntax(doc, "(:domain <name>)");
  if (p.domain_name != domain.name)
    throw SemanticError("DomainMismatch", p.domain_name,
                        "problem is for domain '" + p.domain_name + "', not '" + domain.name + "'");

  std::unordered_set<std::string> seen;
  for (const auto& c : domain.constants) seen.insert(c.name);
  for (const auto& o : p.objects) {
    if (!domain.has_type(o.type)) throw UnknownType(o.type);
    if (!seen.insert(o.name).second)
      throw SemanticError("DuplicateName", o.name, "object '" + o.name + "' declared twice");
  }
  for (const auto& a : p.init) validate_ground_atom(domain, p, a);
  for (const auto& l : p.goal) {
    if (l.kind == Literal::Kind::Equality) {
      for (const auto& arg : l.atom.args)
        if (!object_type(domain, p, arg)) throw UnknownObject(arg);
    } else {
      validate_ground_atom(domain, p, l.atom);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string to_string(const Atom& atom) {
  std::string s = "(" + atom.predicate;
  for (const auto& a : atom.args) s += " " + a;
  return s + ")";
}

std::string to_string(const Literal& literal) {
  return literal.positive ? to_string(literal.atom) : "(not " + to_string(literal.atom) + ")";
}

namespace {

void print_typed(std::ostream& os, const std::vector<TypedName>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) os << ' ';
    os << names[i].name;
    bool last_of_group = i + 1 == names.size() || names[i + 1].type != names[i].type;
    if (last_of_group) os << " - " << names[i].type;
  }
}

void print_conjunction(std::ostream& os, const std::vector<Literal>& lits) {
  os << "(and";
  for (const auto& l : lits) os << ' ' << to_string(l);
  os << ')';
}

}  // namespace

std::string print_domain(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    os << "  (:requirements";
    for (const auto& r : d.requirements) os << ' ' << r;
    os << ")\n";
  }
  if (!d.types.empty()) {
    os << "  (:types";
    for (const auto& t : d.types) os << ' ' << t.name << " - " << t.parent;
    os << ")\n";
  }
  if (!d.constants.empty()) {
    os << "  (:constants ";
    print_typed(os, d.constants);
    os << ")\n";
  }
  os << "  (:predicates";
  for (const auto& p : d.predicates) {
    os << "\n    (" << p.name;
    if (!p.params.empty()) {
      os << ' ';
      print_typed(os, p.params);
    }
    os << ')';
  }
  os << ")\n";
  for (const auto& s : d.schemas) {
    os << "  (:action " << s.name << "\n    :parameters (";
    print_typed(os, s.params);
    os << ")\n    :precondition ";
    print_conjunction(os, s.precondition);
    os << "\n    :effect (and";
    for (const auto& a : s.add) os << ' ' << to_string(a);
    for (const auto& a : s.del) os << " (not " << to_string(a) << ')';
    os << "))\n";
  }
  os << ")\n";
  return os.str();
}

std::string print_problem(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n  (:domain " << p.domain_name << ")\n";
  os << "  (:objects";
  if (!p.objects.empty()) {
    os << ' ';
    print_typed(os, p.objects);
  }
  os << ")\n  (:init";
  for (const auto& a : p.init) os << "\n    " << to_string(a);
  os << ")\n  (:goal ";
  print_conjunction(os, p.goal);
  os << "))\n";
  return os.str();
}

std::pair<std::string, std::string> print_pddl(const Domain& domain, const Problem& problem) {
  return {print_domain(domain), print_problem(problem)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace progplan
