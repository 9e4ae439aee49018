#ifndef PROGPLAN_TESTS_FIXTURES_HPP
#define PROGPLAN_TESTS_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "progplan/pddl.hpp"

namespace fixtures {

std::string fixture_path(const std::string& name);
std::string fixture_text(const std::string& name);

struct Instance {
  std::string label;
  progplan::Domain domain;
  progplan::Problem problem;
  /// Printed forms, handy for external programs.
  std::string domain_text;
  std::string problem_text;
};

Instance load(const std::string& label, const std::string& domain_text,
              const std::string& problem_text);

std::string gripper_domain();
/// Balls ball1..ballN start in rooma, goal is all balls in roomb.
std::string gripper_problem(int balls);
Instance gripper(int balls);

std::string blocksworld_domain();
/// Random start and goal towers over `blocks` blocks.
std::string blocksworld_problem(int blocks, std::uint64_t seed);
Instance blocksworld(int blocks, std::uint64_t seed);

std::string transport_domain();
/// Ring or line road network. With `cut`, the goal city loses every
/// incoming road and the task becomes unsolvable.
std::string transport_problem(int cities, int trucks, int packages, bool cut, std::uint64_t seed);
Instance transport(int cities, int trucks, int packages, bool cut, std::uint64_t seed);

/// `bits` independent toggles and a goal over a predicate no action adds:
/// 2^bits reachable states, no plan.
Instance flood(int bits);

/// Small random typed domain with negative and equality preconditions,
/// at most 4 objects per type and at most 3 schemas. The goal may or may
/// not be reachable.
Instance random_small(std::uint64_t seed);

}  // namespace fixtures

#endif
