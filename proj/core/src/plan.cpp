#include "progplan/plan.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace progplan {

std::string to_string(const PlanStep& step) {
  std::string s = "(" + step.schema;
  for (const auto& a : step.args) s += " " + a;
  return s + ")";
}

std::string write_ipc_plan(const Plan& plan) {
  std::string out;
  for (const auto& step : plan.steps) out += to_string(step) + "\n";
  out += "; cost = " + std::to_string(plan.steps.size()) + " (unit cost)\n";
  return out;
}

Plan parse_ipc_plan(std::string_view text) {
  Plan plan;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    if (b == line.size()) continue;
    auto open = line.find('(', b);
    auto close = line.rfind(')');
    if (open != b || close == std::string::npos || close < open)
      throw std::invalid_argument("plan line " + std::to_string(lineno) +
                                  ": expected '(name args...)'");
    std::istringstream words(line.substr(open + 1, close - open - 1));
    PlanStep step;
    std::string w;
    while (words >> w) {
      for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (step.schema.empty())
        step.schema = w;
      else
        step.args.push_back(w);
    }
    if (step.schema.empty())
      throw std::invalid_argument("plan line " + std::to_string(lineno) + ": empty action");
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

}  // namespace progplan
