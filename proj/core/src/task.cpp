#include "progplan/task.hpp"

#include <algorithm>
#include <limits>

namespace progplan {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kIndexBits = 48;
constexpr std::uint64_t kIndexLimit = std::uint64_t{1} << kIndexBits;

}  // namespace

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

State::State(std::vector<AtomCode> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool State::contains(AtomCode code) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), code);
}

std::uint64_t State::hash() const {
  std::uint64_t h = splitmix64(atoms_.size());
  for (AtomCode c : atoms_) h = splitmix64(h ^ c) + 0x632be59bd9b4e019ULL;
  return h;
}

State successor_state(const State& s, std::span<const AtomCode> del,
                      std::span<const AtomCode> add) {
  std::vector<AtomCode> kept;
  kept.reserve(s.atoms_.size());
  std::set_difference(s.atoms_.begin(), s.atoms_.end(), del.begin(), del.end(),
                      std::back_inserter(kept));
  State out;
  out.atoms_.reserve(kept.size() + add.size());
  std::set_union(kept.begin(), kept.end(), add.begin(), add.end(),
                 std::back_inserter(out.atoms_));
  return out;
}

// ---------------------------------------------------------------------------
// Task lookups
// ---------------------------------------------------------------------------

std::optional<ObjectId> Task::object_id(std::string_view name) const {
  auto it = object_ids_.find(std::string(name));
  if (it == object_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<TypeId> Task::type_id(std::string_view name) const {
  auto it = type_ids_.find(std::string(name));
  if (it == type_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<PredicateId> Task::predicate_id(std::string_view name) const {
  auto it = predicate_ids_.find(std::string(name));
  if (it == predicate_ids_.end()) return std::nullopt;
  return it->second;
}

AtomCode Task::encode(PredicateId pred, std::span<const ObjectId> args) const {
  std::uint64_t index = 0;
  const std::uint64_t n = radix_pow_[1];
  for (ObjectId a : args) index = index * n + a;
  return (static_cast<AtomCode>(pred) << kIndexBits) | index;
}

std::vector<ObjectId> Task::decode_args(AtomCode code) const {
  const PredicateId pred = predicate_of(code);
  const std::size_t k = predicate_arity_[pred];
  std::uint64_t index = code & (kIndexLimit - 1);
  const std::uint64_t n = radix_pow_[1];
  std::vector<ObjectId> args(k);
  for (std::size_t i = k; i-- > 0;) {
    args[i] = static_cast<ObjectId>(index % n);
    index /= n;
  }
  return args;
}

Atom Task::atom(AtomCode code) const {
  Atom a;
  a.predicate = predicate_names_[predicate_of(code)];
  for (ObjectId o : decode_args(code)) a.args.push_back(object_names_[o]);
  return a;
}

std::vector<Atom> Task::atoms_of(const State& s) const {
  std::vector<AtomCode> all;
  all.reserve(s.size() + static_atoms_.size());
  std::merge(s.atoms().begin(), s.atoms().end(), static_atoms_.begin(), static_atoms_.end(),
             std::back_inserter(all));
  std::vector<Atom> out;
  out.reserve(all.size());
  for (AtomCode c : all) out.push_back(atom(c));
  return out;
}

bool Task::holds(const State& s, AtomCode code) const {
  if (predicate_static_[predicate_of(code)])
    return std::binary_search(static_atoms_.begin(), static_atoms_.end(), code);
  return s.contains(code);
}

std::span<const AtomCode> Task::store_for(PredicateId pred, const State* state) const {
  if (predicate_static_[pred]) return static_atoms_;
  return state ? state->atoms() : std::span<const AtomCode>{};
}

PlanStep Task::step(const GroundAction& a) const {
  PlanStep s{schemas_[a.schema].name, {}};
  for (ObjectId o : a.args) s.args.push_back(object_names_[o]);
  return s;
}

AtomCode Task::encode_bound(const CompiledAtom& a, const std::vector<ObjectId>& binding) const {
  std::uint64_t index = 0;
  const std::uint64_t n = radix_pow_[1];
  for (const Term& t : a.args) index = index * n + (t.is_var ? binding[t.value] : t.value);
  return (static_cast<AtomCode>(a.predicate) << kIndexBits) | index;
}

GroundAction Task::make_action(SchemaId id, const std::vector<ObjectId>& binding) const {
  const CompiledSchema& sch = schemas_[id];
  GroundAction a;
  a.schema = id;
  a.args = binding;
  for (const auto& lit : sch.precondition) {
    if (lit.equality) {
      ObjectId x = lit.atom.args[0].is_var ? binding[lit.atom.args[0].value] : lit.atom.args[0].value;
      ObjectId y = lit.atom.args[1].is_var ? binding[lit.atom.args[1].value] : lit.atom.args[1].value;
      if ((x == y) != lit.positive) a.violates_equality = true;
      continue;
    }
    (lit.positive ? a.pre_pos : a.pre_neg).push_back(encode_bound(lit.atom, binding));
  }
  for (const auto& e : sch.add) a.add.push_back(encode_bound(e, binding));
  for (const auto& e : sch.del) a.del.push_back(encode_bound(e, binding));
  auto canon = [](std::vector<AtomCode>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  canon(a.pre_pos);
  canon(a.pre_neg);
  canon(a.add);
  canon(a.del);
  // Add wins over delete, which keeps the two sets disjoint.
  std::vector<AtomCode> del;
  std::set_difference(a.del.begin(), a.del.end(), a.add.begin(), a.add.end(),
                      std::back_inserter(del));
  a.del = std::move(del);
  return a;
}

std::optional<GroundAction> Task::instantiate(const PlanStep& step) const {
  SchemaId id = 0;
  while (id < schemas_.size() && schemas_[id].name != step.schema) ++id;
  if (id == schemas_.size()) return std::nullopt;
  const CompiledSchema& sch = schemas_[id];
  if (step.args.size() != sch.param_types.size()) return std::nullopt;
  std::vector<ObjectId> binding;
  for (std::size_t i = 0; i < step.args.size(); ++i) {
    auto o = object_id(step.args[i]);
    if (!o || !object_has_type(*o, sch.param_types[i])) return std::nullopt;
    binding.push_back(*o);
  }
  return make_action(id, binding);
}

// ---------------------------------------------------------------------------
// Build
// ---------------------------------------------------------------------------

Task build_task(const Domain& domain_in, const Problem& problem_in, TaskOptions options) {
  // Round-tripping through the parser re-establishes every model invariant
  // for structures that were assembled in code.
  Domain domain = parse_domain(print_domain(domain_in));
  Problem problem = parse_problem(print_problem(problem_in), domain);

  Task t;
  t.type_names_.push_back(std::string(kRootType));
  for (const auto& d : domain.types) t.type_names_.push_back(d.name);
  for (TypeId i = 0; i < t.type_names_.size(); ++i) t.type_ids_.emplace(t.type_names_[i], i);

  std::vector<std::string> object_types;
  for (const auto& c : domain.constants) {
    t.object_names_.push_back(c.name);
    object_types.push_back(c.type);
  }
  for (const auto& o : problem.objects) {
    t.object_names_.push_back(o.name);
    object_types.push_back(o.type);
  }
  for (ObjectId i = 0; i < t.object_names_.size(); ++i) t.object_ids_.emplace(t.object_names_[i], i);

  t.type_member_.assign(t.type_names_.size(), std::vector<char>(t.object_names_.size(), 0));
  t.type_objects_.assign(t.type_names_.size(), {});
  for (TypeId ty = 0; ty < t.type_names_.size(); ++ty)
    for (ObjectId o = 0; o < t.object_names_.size(); ++o)
      if (domain.is_subtype(object_types[o], t.type_names_[ty])) {
        t.type_member_[ty][o] = 1;
        t.type_objects_[ty].push_back(o);
      }

  std::size_t max_arity = 0;
  for (const auto& p : domain.predicates) {
    t.predicate_ids_.emplace(p.name, static_cast<PredicateId>(t.predicate_names_.size()));
    t.predicate_names_.push_back(p.name);
    t.predicate_arity_.push_back(p.params.size());
    max_arity = std::max(max_arity, p.params.size());
  }
  t.predicate_static_.assign(t.predicate_names_.size(), 1);
  for (const auto& s : domain.schemas) {
    for (const auto& a : s.add) t.predicate_static_[t.predicate_ids_.at(a.predicate)] = 0;
    for (const auto& a : s.del) t.predicate_static_[t.predicate_ids_.at(a.predicate)] = 0;
  }
  if (t.predicate_names_.size() >= (1u << 16))
    throw UnsupportedFeature("more than 65535 predicates");

  const std::uint64_t n = std::max<std::uint64_t>(1, t.object_names_.size());
  t.radix_pow_.assign(std::max<std::size_t>(max_arity, 1) + 1, 1);
  for (std::size_t k = 1; k < t.radix_pow_.size(); ++k) {
    if (t.radix_pow_[k - 1] > (kIndexLimit - 1) / n)
      throw UnsupportedFeature("task too large for the atom encoding");
    t.radix_pow_[k] = t.radix_pow_[k - 1] * n;
  }

  for (const auto& s : domain.schemas) {
    Task::CompiledSchema cs;
    cs.name = s.name;
    std::unordered_map<std::string, std::uint32_t> var_index;
    for (std::size_t i = 0; i < s.params.size(); ++i) {
      var_index.emplace(s.params[i].name, static_cast<std::uint32_t>(i));
      cs.param_types.push_back(t.type_ids_.at(s.params[i].type));
    }
    auto term = [&](const std::string& arg) {
      if (auto it = var_index.find(arg); it != var_index.end()) return Task::Term{true, it->second};
      return Task::Term{false, t.object_ids_.at(arg)};
    };
    auto compile_atom = [&](const Atom& a, PredicateId pred) {
      Task::CompiledAtom ca{pred, {}};
      for (const auto& arg : a.args) ca.args.push_back(term(arg));
      return ca;
    };
    cs.checks_at.assign(s.params.size(), {});
    cs.generators.assign(s.params.size(), {});
    for (const auto& l : s.precondition) {
      Task::CompiledLiteral cl;
      cl.positive = l.positive;
      cl.equality = l.kind == Literal::Kind::Equality;
      cl.atom = compile_atom(l.atom, cl.equality ? 0 : t.predicate_ids_.at(l.atom.predicate));
      cl.is_static = !cl.equality && t.predicate_static_[cl.atom.predicate];
      const std::size_t li = cs.precondition.size();
      int last = -1;
      for (const auto& term_ : cl.atom.args)
        if (term_.is_var) last = std::max(last, static_cast<int>(term_.value));
      if (last < 0)
        cs.ground_checks.push_back(li);
      else
        cs.checks_at[static_cast<std::size_t>(last)].push_back(li);
      if (cl.positive && !cl.equality) {
        // A literal generates candidates for parameter v when every argument
        // before v's first occurrence is already fixed.
        std::vector<char> done(s.params.size(), 0);
        for (std::size_t pos = 0; pos < cl.atom.args.size(); ++pos) {
          const auto& tm = cl.atom.args[pos];
          if (!tm.is_var || done[tm.value]) continue;
          done[tm.value] = 1;
          bool prefix_bound = true;
          for (std::size_t q = 0; q < pos; ++q)
            if (cl.atom.args[q].is_var && cl.atom.args[q].value >= tm.value) prefix_bound = false;
          if (prefix_bound) cs.generators[tm.value].push_back({li, pos});
        }
      }
      cs.precondition.push_back(std::move(cl));
    }
    for (const auto& a : s.add) cs.add.push_back(compile_atom(a, t.predicate_ids_.at(a.predicate)));
    for (const auto& a : s.del) cs.del.push_back(compile_atom(a, t.predicate_ids_.at(a.predicate)));
    t.schemas_.push_back(std::move(cs));
  }

  std::vector<AtomCode> fluent;
  for (const auto& a : problem.init) {
    PredicateId pred = t.predicate_ids_.at(a.predicate);
    std::vector<ObjectId> args;
    for (const auto& o : a.args) args.push_back(t.object_ids_.at(o));
    AtomCode c = t.encode(pred, args);
    (t.predicate_static_[pred] ? t.static_atoms_ : fluent).push_back(c);
  }
  std::sort(t.static_atoms_.begin(), t.static_atoms_.end());
  t.static_atoms_.erase(std::unique(t.static_atoms_.begin(), t.static_atoms_.end()),
                        t.static_atoms_.end());
  t.initial_ = State(std::move(fluent));

  for (const auto& l : problem.goal) {
    if (l.kind == Literal::Kind::Equality) {
      ++t.goal_eq_count_;
      if ((l.atom.args[0] == l.atom.args[1]) != l.positive) t.goal_equalities_hold_ = false;
      continue;
    }
    std::vector<ObjectId> args;
    for (const auto& o : l.atom.args) args.push_back(t.object_ids_.at(o));
    (l.positive ? t.goal_pos_ : t.goal_neg_).push_back(t.encode(t.predicate_ids_.at(l.atom.predicate), args));
  }
  auto canon = [](std::vector<AtomCode>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  canon(t.goal_pos_);
  canon(t.goal_neg_);

  t.domain_ = std::move(domain);
  t.problem_ = std::move(problem);

  if (options.mode != GroundingMode::Lazy) {
    const std::size_t limit = options.mode == GroundingMode::Grounded
                                  ? std::numeric_limits<std::size_t>::max()
                                  : options.grounding_limit;
    std::vector<GroundAction> all;
    bool overflow = false;
    for (SchemaId id = 0; id < t.schemas_.size() && !overflow; ++id) {
      std::vector<ObjectId> binding(t.schemas_[id].param_types.size());
      auto emit = [&](const std::vector<ObjectId>& b) {
        if (all.size() >= limit) {
          overflow = true;
          return false;
        }
        GroundAction a = t.make_action(id, b);
        if (!a.violates_equality) all.push_back(std::move(a));
        return true;
      };
      t.match(t.schemas_[id], id, 0, binding, nullptr, true, emit);
    }
    if (!overflow) {
      t.grounded_ = true;
      t.ground_actions_ = std::move(all);
      for (std::uint32_t i = 0; i < t.ground_actions_.size(); ++i) {
        const GroundAction& a = t.ground_actions_[i];
        auto trig = std::find_if(a.pre_pos.begin(), a.pre_pos.end(),
                                 [&](AtomCode c) { return !t.is_static(t.predicate_of(c)); });
        if (trig == a.pre_pos.end())
          t.untriggered_.push_back(i);
        else
          t.triggers_[*trig].push_back(i);
      }
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

bool Task::check_literal(const CompiledLiteral& lit, const std::vector<ObjectId>& binding,
                         const State* state) const {
  if (lit.equality) {
    ObjectId x = lit.atom.args[0].is_var ? binding[lit.atom.args[0].value] : lit.atom.args[0].value;
    ObjectId y = lit.atom.args[1].is_var ? binding[lit.atom.args[1].value] : lit.atom.args[1].value;
    return (x == y) == lit.positive;
  }
  AtomCode c = encode_bound(lit.atom, binding);
  bool present;
  if (lit.is_static)
    present = std::binary_search(static_atoms_.begin(), static_atoms_.end(), c);
  else
    present = state->contains(c);
  return present == lit.positive;
}

// Emit returns false to abort the enumeration; so does match.
template <class Emit>
bool Task::match(const CompiledSchema& sch, SchemaId id, std::size_t param,
                 std::vector<ObjectId>& binding, const State* state, bool static_only,
                 Emit& emit) const {
  auto usable = [&](const CompiledLiteral& l) { return !static_only || l.equality || l.is_static; };
  if (param == 0) {
    for (std::size_t li : sch.ground_checks)
      if (usable(sch.precondition[li]) && !check_literal(sch.precondition[li], binding, state))
        return true;
  }
  if (param == sch.param_types.size()) return emit(binding);

  const std::vector<ObjectId>& typed = type_objects_[sch.param_types[param]];
  std::size_t best_count = typed.size();
  std::span<const AtomCode> best_range;
  std::size_t best_shift = 0;
  bool narrowed = false;
  const std::uint64_t n = radix_pow_[1];
  for (const Generator& g : sch.generators[param]) {
    const CompiledLiteral& lit = sch.precondition[g.literal];
    if (static_only && !lit.is_static) continue;
    const std::size_t k = lit.atom.args.size();
    std::uint64_t prefix = 0;
    for (std::size_t q = 0; q < g.position; ++q) {
      const Term& tm = lit.atom.args[q];
      prefix = prefix * n + (tm.is_var ? binding[tm.value] : tm.value);
    }
    const std::uint64_t width = radix_pow_[k - g.position];
    const AtomCode lo = (static_cast<AtomCode>(lit.atom.predicate) << kIndexBits) | (prefix * width);
    const AtomCode hi = lo + width;
    std::span<const AtomCode> store = store_for(lit.atom.predicate, state);
    auto b = std::lower_bound(store.begin(), store.end(), lo);
    auto e = std::lower_bound(b, store.end(), hi);
    const auto count = static_cast<std::size_t>(e - b);
    if (count == 0) return true;
    if (!narrowed || count < best_count) {
      best_count = count;
      best_range = store.subspan(static_cast<std::size_t>(b - store.begin()), count);
      best_shift = k - g.position - 1;
      narrowed = true;
    }
  }

  auto try_object = [&](ObjectId o) -> bool {
    if (!type_member_[sch.param_types[param]][o]) return true;
    binding[param] = o;
    for (std::size_t li : sch.checks_at[param]) {
      const CompiledLiteral& lit = sch.precondition[li];
      if (usable(lit) && !check_literal(lit, binding, state)) return true;
    }
    return match(sch, id, param + 1, binding, state, static_only, emit);
  };

  if (narrowed && best_count < typed.size()) {
    const std::uint64_t div = radix_pow_[best_shift];
    ObjectId last = std::numeric_limits<ObjectId>::max();
    for (AtomCode c : best_range) {
      const auto o = static_cast<ObjectId>(((c & (kIndexLimit - 1)) / div) % n);
      if (o == last) continue;
      last = o;
      if (!try_object(o)) return false;
    }
  } else {
    for (ObjectId o : typed)
      if (!try_object(o)) return false;
  }
  return true;
}

std::vector<GroundAction> applicable_actions(const Task& task, const State& s) {
  std::vector<GroundAction> out;
  if (task.grounded_) {
    std::vector<std::uint32_t> hits;
    auto ok = [&](const GroundAction& a) {
      for (AtomCode c : a.pre_pos)
        if (!task.holds(s, c)) return false;
      for (AtomCode c : a.pre_neg)
        if (task.holds(s, c)) return false;
      return true;
    };
    for (AtomCode c : s.atoms()) {
      auto it = task.triggers_.find(c);
      if (it == task.triggers_.end()) continue;
      for (std::uint32_t i : it->second)
        if (ok(task.ground_actions_[i])) hits.push_back(i);
    }
    for (std::uint32_t i : task.untriggered_)
      if (ok(task.ground_actions_[i])) hits.push_back(i);
    std::sort(hits.begin(), hits.end());
    out.reserve(hits.size());
    for (std::uint32_t i : hits) out.push_back(task.ground_actions_[i]);
    return out;
  }
  for (SchemaId id = 0; id < task.schemas_.size(); ++id) {
    std::vector<ObjectId> binding(task.schemas_[id].param_types.size());
    auto emit = [&](const std::vector<ObjectId>& b) {
      out.push_back(task.make_action(id, b));
      return true;
    };
    task.match(task.schemas_[id], id, 0, binding, &s, false, emit);
  }
  return out;
}

Transition apply(const Task& task, const State& s, const GroundAction& a) {
  if (a.violates_equality) return Inapplicable{"equality precondition of " + to_string(task.step(a))};
  for (AtomCode c : a.pre_pos)
    if (!task.holds(s, c)) return Inapplicable{to_string(task.atom(c))};
  for (AtomCode c : a.pre_neg)
    if (task.holds(s, c)) return Inapplicable{"(not " + to_string(task.atom(c)) + ")"};
  return successor_state(s, a.del, a.add);
}

bool is_goal(const Task& task, const State& s) {
  if (!task.goal_equalities_hold()) return false;
  for (AtomCode c : task.goal_positive())
    if (!task.holds(s, c)) return false;
  for (AtomCode c : task.goal_negative())
    if (task.holds(s, c)) return false;
  return true;
}

}  // namespace progplan
