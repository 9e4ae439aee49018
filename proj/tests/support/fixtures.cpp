#include "fixtures.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#ifndef PROGPLAN_FIXTURE_DIR
#error "PROGPLAN_FIXTURE_DIR must be defined"
#endif

namespace fixtures {

using namespace progplan;

std::string fixture_path(const std::string& name) {
  return std::string(PROGPLAN_FIXTURE_DIR) + "/" + name;
}

std::string fixture_text(const std::string& name) { return read_file(fixture_path(name)); }

Instance load(const std::string& label, const std::string& domain_text,
              const std::string& problem_text) {
  Instance in;
  in.label = label;
  in.domain = parse_domain(domain_text);
  in.problem = parse_problem(problem_text, in.domain);
  in.domain_text = print_domain(in.domain);
  in.problem_text = print_problem(in.problem);
  return in;
}

std::string gripper_domain() { return fixture_text("gripper-domain.pddl"); }

std::string gripper_problem(int balls) {
  std::ostringstream o;
  o << "(define (problem gripper-" << balls << ")\n  (:domain gripper-typed)\n"
    << "  (:objects rooma roomb - room left right - gripper";
  for (int i = 1; i <= balls; ++i) o << " ball" << i;
  o << " - ball)\n  (:init (at-robby rooma) (free left) (free right)";
  for (int i = 1; i <= balls; ++i) o << " (at ball" << i << " rooma)";
  o << ")\n  (:goal (and";
  for (int i = 1; i <= balls; ++i) o << " (at ball" << i << " roomb)";
  o << ")))\n";
  return o.str();
}

Instance gripper(int balls) {
  return load("gripper-" + std::to_string(balls), gripper_domain(), gripper_problem(balls));
}

std::string blocksworld_domain() { return fixture_text("blocksworld-domain.pddl"); }

namespace {

std::vector<std::vector<int>> random_towers(int n, std::mt19937_64& rng) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> towers;
  std::bernoulli_distribution new_tower(0.4);
  for (int b : order) {
    if (towers.empty() || new_tower(rng)) towers.emplace_back();
    towers.back().push_back(b);
  }
  return towers;
}

std::string block(int i) { return "b" + std::to_string(i + 1); }

}  // namespace

std::string blocksworld_problem(int blocks, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto start = random_towers(blocks, rng);
  auto goal = random_towers(blocks, rng);
  std::ostringstream o;
  o << "(define (problem blocks-" << blocks << "-" << seed << ")\n  (:domain blocksworld)\n"
    << "  (:objects";
  for (int i = 0; i < blocks; ++i) o << " " << block(i);
  o << " - block)\n  (:init (handempty)";
  for (const auto& t : start) {
    o << " (ontable " << block(t.front()) << ")";
    for (std::size_t k = 1; k < t.size(); ++k) o << " (on " << block(t[k]) << " " << block(t[k - 1]) << ")";
    o << " (clear " << block(t.back()) << ")";
  }
  o << ")\n  (:goal (and";
  bool any = false;
  for (const auto& t : goal)
    for (std::size_t k = 1; k < t.size(); ++k) {
      o << " (on " << block(t[k]) << " " << block(t[k - 1]) << ")";
      any = true;
    }
  if (!any)
    for (int i = 0; i < blocks; ++i) o << " (ontable " << block(i) << ")";
  o << ")))\n";
  return o.str();
}

Instance blocksworld(int blocks, std::uint64_t seed) {
  return load("blocks-" + std::to_string(blocks) + "-" + std::to_string(seed),
              blocksworld_domain(), blocksworld_problem(blocks, seed));
}

std::string transport_domain() { return fixture_text("transport-domain.pddl"); }

std::string transport_problem(int cities, int trucks, int packages, bool cut, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> city(0, cities - 1);
  auto c = [](int i) { return "c" + std::to_string(i + 1); };
  std::vector<int> pkg_from(packages), pkg_to(packages);
  for (int p = 0; p < packages; ++p) {
    pkg_from[p] = city(rng);
    do pkg_to[p] = city(rng);
    while (cities > 1 && pkg_to[p] == pkg_from[p]);
  }
  const int blocked = cut ? pkg_to[0] : -1;
  std::ostringstream o;
  o << "(define (problem transport-" << cities << "-" << trucks << "-" << packages << "-" << seed
    << (cut ? "-cut" : "") << ")\n  (:domain transport-lite)\n  (:objects";
  for (int i = 0; i < cities; ++i) o << " " << c(i);
  o << " - location";
  for (int i = 0; i < trucks; ++i) o << " truck" << i + 1;
  o << " - vehicle";
  for (int i = 0; i < packages; ++i) o << " pkg" << i + 1;
  o << " - package)\n  (:init";
  const bool ring = cities > 2 && (seed % 2 == 0);
  for (int i = 0; i < cities; ++i) {
    int j = i + 1;
    if (j == cities) {
      if (!ring) continue;
      j = 0;
    }
    if (j != blocked) o << " (road " << c(i) << " " << c(j) << ")";
    if (i != blocked) o << " (road " << c(j) << " " << c(i) << ")";
  }
  for (int t = 0; t < trucks; ++t) o << " (at truck" << t + 1 << " " << c(city(rng)) << ")";
  for (int p = 0; p < packages; ++p) o << " (at pkg" << p + 1 << " " << c(pkg_from[p]) << ")";
  o << ")\n  (:goal (and";
  for (int p = 0; p < packages; ++p) o << " (at pkg" << p + 1 << " " << c(pkg_to[p]) << ")";
  o << ")))\n";
  return o.str();
}

Instance transport(int cities, int trucks, int packages, bool cut, std::uint64_t seed) {
  return load("transport-" + std::to_string(cities) + "-" + std::to_string(trucks) + "-" +
                  std::to_string(packages) + "-" + std::to_string(seed) + (cut ? "-cut" : ""),
              transport_domain(), transport_problem(cities, trucks, packages, cut, seed));
}

Instance flood(int bits) {
  std::string dom =
      "(define (domain flood)\n"
      "  (:requirements :strips :typing :negative-preconditions)\n"
      "  (:types bit)\n"
      "  (:predicates (on ?b - bit) (done))\n"
      "  (:action set :parameters (?b - bit) :precondition (not (on ?b)) :effect (on ?b))\n"
      "  (:action unset :parameters (?b - bit) :precondition (on ?b) :effect (not (on ?b))))\n";
  std::ostringstream p;
  p << "(define (problem flood-" << bits << ") (:domain flood) (:objects";
  for (int i = 0; i < bits; ++i) p << " x" << i;
  p << " - bit) (:init) (:goal (done)))";
  return load("flood-" + std::to_string(bits), dom, p.str());
}

Instance random_small(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto roll = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  // t1 is a subtype of t0; t2 is independent.
  const std::vector<std::string> types{"t0", "t1", "t2"};
  auto compatible = [](const std::string& have, const std::string& want) {
    return have == want || (have == "t1" && want == "t0");
  };

  struct Pred {
    std::string name;
    std::vector<std::string> types;
  };
  std::vector<Pred> preds;
  const int npred = roll(2, 5);
  for (int i = 0; i < npred; ++i) {
    Pred p{"q" + std::to_string(i), {}};
    const int arity = roll(0, 2);
    for (int k = 0; k < arity; ++k) p.types.push_back(types[roll(0, 2)]);
    preds.push_back(p);
  }

  struct Param {
    std::string var;
    std::string type;
  };
  auto atom_over = [&](const Pred& p, const std::vector<Param>& params, std::string& out) {
    out = "(" + p.name;
    for (const auto& want : p.types) {
      std::vector<const Param*> fit;
      for (const auto& pa : params)
        if (compatible(pa.type, want)) fit.push_back(&pa);
      if (fit.empty()) return false;
      out += " " + fit[roll(0, static_cast<int>(fit.size()) - 1)]->var;
    }
    out += ")";
    return true;
  };

  std::ostringstream d;
  d << "(define (domain rnd" << seed << ")\n"
    << "  (:requirements :strips :typing :negative-preconditions :equality)\n"
    << "  (:types t1 - t0 t0 t2 - object)\n  (:predicates";
  for (const auto& p : preds) {
    d << " (" << p.name;
    for (std::size_t k = 0; k < p.types.size(); ++k) d << " ?a" << k << " - " << p.types[k];
    d << ")";
  }
  d << ")\n";
  const int nschema = roll(1, 3);
  for (int s = 0; s < nschema; ++s) {
    std::vector<Param> params;
    const int np = roll(0, 3);
    for (int k = 0; k < np; ++k) params.push_back({"?x" + std::to_string(k), types[roll(0, 2)]});
    d << "  (:action act" << s << "\n    :parameters (";
    for (const auto& pa : params) d << pa.var << " - " << pa.type << " ";
    d << ")\n    :precondition (and";
    const int npre = roll(0, 3);
    for (int k = 0; k < npre; ++k) {
      std::string a;
      if (!atom_over(preds[roll(0, npred - 1)], params, a)) continue;
      d << " " << (coin(0.3) ? "(not " + a + ")" : a);
    }
    if (params.size() >= 2 && coin(0.5)) {
      const auto& x = params[0];
      const auto& y = params[1];
      std::string eq = "(= " + x.var + " " + y.var + ")";
      d << " " << (coin(0.7) ? "(not " + eq + ")" : eq);
    }
    d << ")\n    :effect (and";
    const int neff = roll(1, 3);
    int written = 0;
    for (int k = 0; k < neff + 3 && written < neff; ++k) {
      std::string a;
      if (!atom_over(preds[roll(0, npred - 1)], params, a)) continue;
      d << " " << (coin(0.4) ? "(not " + a + ")" : a);
      ++written;
    }
    d << "))\n";
  }
  d << ")\n";

  std::vector<std::pair<std::string, std::string>> objects;
  for (const auto& t : types) {
    const int n = roll(1, 3);
    for (int i = 0; i < n; ++i) objects.push_back({t + "o" + std::to_string(i), t});
  }
  auto ground_atoms = [&](const Pred& p) {
    std::vector<std::string> out{"(" + p.name};
    for (const auto& want : p.types) {
      std::vector<std::string> next;
      for (const auto& prefix : out)
        for (const auto& [o, t] : objects)
          if (compatible(t, want)) next.push_back(prefix + " " + o);
      out = std::move(next);
    }
    for (auto& s : out) s += ")";
    return out;
  };

  std::ostringstream p;
  p << "(define (problem rndp" << seed << ") (:domain rnd" << seed << ")\n  (:objects";
  for (const auto& [o, t] : objects) p << " " << o << " - " << t;
  p << ")\n  (:init";
  std::vector<std::string> all;
  for (const auto& pr : preds)
    for (auto& a : ground_atoms(pr)) all.push_back(a);
  for (const auto& a : all)
    if (coin(0.35)) p << " " << a;
  p << ")\n  (:goal (and";
  const int ngoal = all.empty() ? 0 : roll(1, 3);
  for (int k = 0; k < ngoal; ++k) {
    const auto& a = all[roll(0, static_cast<int>(all.size()) - 1)];
    p << " " << (coin(0.25) ? "(not " + a + ")" : a);
  }
  if (ngoal == 0) p << " (= t0o0 t0o0)";
  p << ")))\n";
  return load("random-" + std::to_string(seed), d.str(), p.str());
}

}  // namespace fixtures
