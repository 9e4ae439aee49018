#include "progplan/harness.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "progplan/anonymize.hpp"
#include "progplan/validator.hpp"

namespace progplan {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(SearchMode m) {
  switch (m) {
    case SearchMode::Gbfs: return "gbfs";
    case SearchMode::Rollout: return "rollout";
    case SearchMode::Dual: return "dual";
    case SearchMode::Auto: return "auto";
  }
  return "?";
}

SearchMode parse_search_mode(std::string_view text) {
  for (auto m : {SearchMode::Gbfs, SearchMode::Rollout, SearchMode::Dual, SearchMode::Auto})
    if (to_string(m) == text) return m;
  throw ConfigError("unknown mode '" + std::string(text) + "' (gbfs, rollout, dual, auto)");
}

bool is_builtin_heuristic(const std::string& name) {
  return name == "goal-count" || name == "blind" || name == "zero";
}

bool is_builtin_policy(const std::string& name) { return name == "first" || name == "random"; }

// ---------------------------------------------------------------------------
// In-process solving
// ---------------------------------------------------------------------------

namespace {

HostOptions with_deadline(HostOptions host, const ResourceLimits& limits) {
  if (limits.time_limit_s) {
    auto d = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                std::chrono::duration<double>(*limits.time_limit_s));
    if (!host.deadline || d < *host.deadline) host.deadline = d;
  }
  return host;
}

std::shared_ptr<ValueFunction> make_value(const Task& task, const SolverSpec& spec,
                                          const HostOptions& host) {
  if (spec.heuristic_source)
    return std::make_shared<ExternalValue>(
        open_program(*spec.heuristic_source, ProgramKind::Value, task, host));
  if (spec.heuristic == "goal-count") return std::make_shared<GoalCountValue>();
  if (spec.heuristic == "blind") return std::make_shared<BlindValue>();
  if (spec.heuristic == "zero") return std::make_shared<ConstantValue>(0.0);
  return std::make_shared<ExternalValue>(
      open_program(read_file(spec.heuristic), ProgramKind::Value, task, host));
}

std::shared_ptr<Policy> make_policy(const Task& task, const SolverSpec& spec,
                                    const HostOptions& host) {
  if (spec.policy_source)
    return std::make_shared<ExternalPolicy>(
        open_program(*spec.policy_source, ProgramKind::Policy, task, host));
  if (spec.policy == "first") return std::make_shared<FirstApplicablePolicy>();
  if (spec.policy == "random") return std::make_shared<RandomPolicy>(spec.seed);
  return std::make_shared<ExternalPolicy>(
      open_program(read_file(spec.policy), ProgramKind::Policy, task, host));
}

}  // namespace

SearchResult solve_task(const Task& task, const SolverSpec& spec) {
  const HostOptions host = with_deadline(spec.host, spec.limits);
  switch (spec.mode) {
    case SearchMode::Gbfs: {
      SafeValue h(make_value(task, spec, host));
      return gbfs(task, h, spec.limits);
    }
    case SearchMode::Rollout: {
      SoundPolicy p(make_policy(task, spec, host), spec.seed);
      return policy_rollout(task, p, spec.limits);
    }
    case SearchMode::Dual: {
      SafeValue h(make_value(task, spec, host));
      SoundPolicy p(make_policy(task, spec, host), spec.seed);
      return dual_queue_gbfs(task, h, p, spec.limits, spec.dual);
    }
    case SearchMode::Auto: break;
  }
  throw ConfigError("auto mode must be resolved to a concrete mode before solving");
}

// ---------------------------------------------------------------------------
// Isolation
// ---------------------------------------------------------------------------

namespace {

ordered_json result_json(const SearchResult& r, const std::string& error) {
  ordered_json j;
  j["outcome"] = std::string(to_string(r.outcome));
  j["reason"] = r.reason;
  j["error"] = error;
  if (r.plan) {
    ordered_json steps = ordered_json::array();
    for (const auto& s : r.plan->steps) {
      ordered_json t = ordered_json::array();
      t.push_back(s.schema);
      for (const auto& a : s.args) t.push_back(a);
      steps.push_back(std::move(t));
    }
    j["plan"] = std::move(steps);
  }
  const auto& st = r.stats;
  j["stats"] = {{"expansions", st.expansions},     {"generations", st.generations},
                {"evaluations", st.evaluations},   {"policy_calls", st.policy_calls},
                {"duplicate_expansions", st.duplicate_expansions},
                {"stored_states", st.stored_states}, {"estimated_bytes", st.estimated_bytes},
                {"wall_seconds", st.wall_seconds}};
  return j;
}

SearchResult result_from_json(const nlohmann::json& j, std::string& error) {
  SearchResult r;
  r.outcome = parse_outcome(j.at("outcome").get<std::string>());
  r.reason = j.at("reason").get<std::string>();
  error = j.at("error").get<std::string>();
  if (j.contains("plan")) {
    Plan p;
    for (const auto& t : j["plan"]) {
      PlanStep s;
      s.schema = t.at(0).get<std::string>();
      for (std::size_t i = 1; i < t.size(); ++i) s.args.push_back(t.at(i).get<std::string>());
      p.steps.push_back(std::move(s));
    }
    r.plan = std::move(p);
  }
  const auto& st = j.at("stats");
  r.stats.expansions = st.at("expansions").get<std::uint64_t>();
  r.stats.generations = st.at("generations").get<std::uint64_t>();
  r.stats.evaluations = st.at("evaluations").get<std::uint64_t>();
  r.stats.policy_calls = st.at("policy_calls").get<std::uint64_t>();
  r.stats.duplicate_expansions = st.at("duplicate_expansions").get<std::uint64_t>();
  r.stats.stored_states = st.at("stored_states").get<std::uint64_t>();
  r.stats.estimated_bytes = st.at("estimated_bytes").get<std::size_t>();
  r.stats.wall_seconds = st.at("wall_seconds").get<double>();
  return r;
}

[[noreturn]] void child_main(int fd, const std::function<SearchResult()>& job,
                             std::size_t memory_bytes) {
  ::setpgid(0, 0);
  if (memory_bytes > 0) {
    rlimit lim{memory_bytes, memory_bytes};
    ::setrlimit(RLIMIT_AS, &lim);
  }
  std::string payload;
  try {
    SearchResult r;
    std::string error;
    try {
      r = job();
    } catch (const std::bad_alloc&) {
      r = SearchResult{};
      r.outcome = Outcome::MemoryLimit;
      r.reason = "address space limit";
    } catch (const HandshakeError& e) {
      r = SearchResult{};
      r.outcome = Outcome::Failure;
      r.reason = "program failed to load";
      error = std::string("handshake: ") + e.what();
    } catch (const std::exception& e) {
      r = SearchResult{};
      r.outcome = Outcome::Failure;
      r.reason = "error";
      error = e.what();
    }
    payload = result_json(r, error).dump();
  } catch (...) {
    payload = R"({"outcome":"memory-limit","reason":"address space limit","error":"","stats":{"expansions":0,"generations":0,"evaluations":0,"policy_calls":0,"duplicate_expansions":0,"stored_states":0,"estimated_bytes":0,"wall_seconds":0}})";
  }
  std::size_t off = 0;
  while (off < payload.size()) {
    ssize_t n = ::write(fd, payload.data() + off, payload.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
  ::_exit(0);
}

}  // namespace

IsolatedRun run_isolated(const std::function<SearchResult()>& job, double time_limit_s,
                         std::size_t memory_bytes, double grace_s) {
  int fds[2];
  if (::pipe(fds) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  std::cout.flush();
  std::cerr.flush();
  const auto start = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::close(fds[0]);
    child_main(fds[1], job, memory_bytes);
  }
  ::setpgid(pid, pid);
  ::close(fds[1]);

  const auto kill_at = start + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(time_limit_s + grace_s));
  std::string data;
  bool killed = false;
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(kill_at - Clock::now()).count();
    if (left <= 0) {
      killed = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int pr = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 1'000'000)));
    if (pr < 0 && errno == EINTR) continue;
    if (pr == 0) continue;
    char buf[65536];
    ssize_t n = ::read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    data.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fds[0]);
  if (killed) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
  }
  int status = 0;
  rusage ru{};
  while (::wait4(pid, &status, 0, &ru) < 0 && errno == EINTR) {
  }
  // The program host may outlive the child; take the whole group down.
  ::kill(-pid, SIGKILL);

  IsolatedRun out;
  out.peak_rss_bytes = static_cast<std::size_t>(ru.ru_maxrss) * 1024;
  out.killed = killed;
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  if (killed) {
    out.result.outcome = Outcome::TimeLimit;
    out.result.reason = "killed after grace period";
    out.result.stats.wall_seconds = wall;
    return out;
  }
  auto j = nlohmann::json::parse(data, nullptr, false);
  if (!j.is_discarded()) {
    try {
      out.result = result_from_json(j, out.child_error);
      return out;
    } catch (const std::exception&) {
    }
  }
  out.result.stats.wall_seconds = wall;
  if (WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL) {
    out.result.outcome = Outcome::MemoryLimit;
    out.result.reason = "child killed";
  } else {
    out.result.outcome = Outcome::Failure;
    out.result.reason = WIFSIGNALED(status)
                            ? "child terminated by signal " + std::to_string(WTERMSIG(status))
                            : "child exited without a result";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config and records
// ---------------------------------------------------------------------------

void ExperimentConfig::validate(bool require_pools) const {
  if (domain_file.empty()) throw ConfigError("--domain is required");
  if (!(time_limit_s > 0)) throw ConfigError("time limit must be positive");
  if (memory_bytes == 0) throw ConfigError("memory limit must be positive");
  if (!(validation_time_limit_s > 0)) throw ConfigError("validation time limit must be positive");
  if (candidates == 0) throw ConfigError("candidate count must be positive");
  const bool have_dir = !programs_dir.empty();
  if (have_dir && !fs::is_directory(programs_dir))
    throw ConfigError("programs directory " + programs_dir + " does not exist");
  if (mode == SearchMode::Auto && require_pools) {
    if (!endpoint) {
      if (!have_dir) throw ConfigError("auto mode needs --programs-dir or --endpoint");
      const bool v = fs::is_directory(fs::path(programs_dir) / "value") &&
                     !fs::is_empty(fs::path(programs_dir) / "value");
      const bool p = fs::is_directory(fs::path(programs_dir) / "policy") &&
                     !fs::is_empty(fs::path(programs_dir) / "policy");
      if (!v || !p) throw ConfigError("auto mode requires both a value and a policy candidate pool");
    }
  }
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string number(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

const char* kRecordsHeader = "# progplan-records v1";
const char* kRecordsColumns =
    "domain,problem,mode,candidate,outcome,cost,wall_s,expansions,peak_memory_bytes,validated";

}  // namespace

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ostringstream o;
  o << kRecordsHeader << "\n" << kRecordsColumns << "\n";
  for (const auto& r : records) {
    o << csv_field(r.domain) << "," << csv_field(r.problem) << "," << csv_field(r.mode) << ","
      << csv_field(r.candidate) << "," << to_string(r.outcome) << ","
      << (r.cost ? number(*r.cost) : "") << "," << number(r.wall_seconds) << "," << r.expansions
      << "," << r.peak_memory_bytes << "," << (r.validated ? 1 : 0) << "\n";
  }
  write_file(path, o.str());
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<RunRecord> out;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kRecordsColumns) throw std::runtime_error(path + ": unexpected records header");
      header = true;
      continue;
    }
    auto f = csv_split(line);
    if (f.size() != 10) throw std::runtime_error(path + ": malformed record line: " + line);
    RunRecord r;
    r.domain = f[0];
    r.problem = f[1];
    r.mode = f[2];
    r.candidate = f[3];
    r.outcome = parse_outcome(f[4]);
    if (!f[5].empty()) r.cost = std::stod(f[5]);
    r.wall_seconds = std::stod(f[6]);
    r.expansions = std::stoull(f[7]);
    r.peak_memory_bytes = std::stoull(f[8]);
    r.validated = f[9] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Solved: return 0;
    case Outcome::Unsolvable: return 2;
    case Outcome::TimeLimit: return 3;
    case Outcome::MemoryLimit: return 4;
    case Outcome::StepLimit: return 5;
    case Outcome::Failure: return 6;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// One problem
// ---------------------------------------------------------------------------

SolveResponse solve_problem(const SolveRequest& request) {
  const Domain domain = parse_domain(read_file(request.domain_file));
  const Problem problem = parse_problem(read_file(request.problem_file), domain);

  Domain search_domain = domain;
  Problem search_problem = problem;
  std::optional<NameMap> names;
  if (request.anonymize) {
    AnonymizedSet a = anonymize(domain, {problem});
    search_domain = std::move(a.domain);
    search_problem = std::move(a.problems.front());
    names = std::move(a.names);
  }

  SolverSpec spec = request.spec;
  const double time_limit = spec.limits.time_limit_s.value_or(1800.0);
  spec.limits.time_limit_s = time_limit;
  // The search stops itself at half the cap; the address-space limit in
  // the child is the backstop.
  if (!spec.limits.memory_bytes) spec.limits.memory_bytes = request.memory_bytes / 2;

  IsolatedRun run = run_isolated(
      [&]() {
        Task task = build_task(search_domain, search_problem);
        return solve_task(task, spec);
      },
      time_limit, request.memory_bytes);

  SolveResponse resp;
  RunRecord& rec = resp.record;
  rec.domain = domain.name;
  rec.problem = problem.name;
  rec.mode = std::string(to_string(spec.mode));
  rec.candidate = request.candidate;
  rec.outcome = run.result.outcome;
  rec.wall_seconds = run.result.stats.wall_seconds;
  rec.expansions = run.result.stats.expansions;
  rec.peak_memory_bytes = run.peak_rss_bytes;
  resp.reason = run.result.reason;
  if (!run.child_error.empty()) resp.reason += ": " + run.child_error;
  resp.load_failed = run.child_error.rfind("handshake: ", 0) == 0;

  if (run.result.outcome == Outcome::Solved && run.result.plan) {
    Plan plan = names ? deanonymize_plan(*run.result.plan, *names) : *run.result.plan;
    ValidationOutcome v;
    try {
      v = validate_plan(domain, problem, plan);
    } catch (const std::exception& e) {
      v.valid = false;
      v.detail = e.what();
    }
    rec.validated = v.valid;
    if (v.valid) {
      rec.cost = v.cost;
      if (!request.plan_file.empty()) {
        if (auto parent = fs::path(request.plan_file).parent_path(); !parent.empty())
          fs::create_directories(parent);
        write_file(request.plan_file, write_ipc_plan(plan));
      }
    } else {
      resp.reason = "plan rejected by validator at step " + std::to_string(v.step) + ": " +
                    std::string(to_string(v.reason)) + " " + v.detail;
    }
    resp.plan = std::move(plan);
  }
  return resp;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

CoverageTable coverage(const RecordSets& sets) {
  if (sets.empty()) throw EmptyInput("no record sets");
  CoverageTable t;
  std::set<std::string> domains;
  for (const auto& [label, records] : sets) {
    t.columns.push_back(label);
    for (const auto& r : records) {
      domains.insert(r.domain);
      ++t.attempted[r.domain][label];
      t.solved[r.domain][label] += r.covered() ? 1 : 0;
    }
  }
  t.domains.assign(domains.begin(), domains.end());
  return t;
}

std::string CoverageTable::markdown() const {
  std::ostringstream o;
  o << "| domain |";
  for (const auto& c : columns) o << " " << c << " |";
  o << "\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) o << "---:|";
  o << "\n";
  std::map<std::string, std::size_t> total_solved, total_attempted;
  auto get = [](const auto& m, const std::string& d, const std::string& c) -> std::size_t {
    auto it = m.find(d);
    if (it == m.end()) return 0;
    auto jt = it->second.find(c);
    return jt == it->second.end() ? 0 : jt->second;
  };
  for (const auto& d : domains) {
    o << "| " << d << " |";
    for (const auto& c : columns) {
      const auto s = get(solved, d, c), a = get(attempted, d, c);
      total_solved[c] += s;
      total_attempted[c] += a;
      o << " " << s << "/" << a << " |";
    }
    o << "\n";
  }
  o << "| total |";
  for (const auto& c : columns) o << " " << total_solved[c] << "/" << total_attempted[c] << " |";
  o << "\n";
  return o.str();
}

std::string CoverageTable::csv() const {
  std::ostringstream o;
  o << "# progplan-coverage v1\ndomain,planner,solved,attempted\n";
  for (const auto& d : domains)
    for (const auto& c : columns) {
      std::size_t s = 0, a = 0;
      if (auto it = solved.find(d); it != solved.end())
        if (auto jt = it->second.find(c); jt != it->second.end()) s = jt->second;
      if (auto it = attempted.find(d); it != attempted.end())
        if (auto jt = it->second.find(c); jt != it->second.end()) a = jt->second;
      o << csv_field(d) << "," << csv_field(c) << "," << s << "," << a << "\n";
    }
  return o.str();
}

namespace {

using Key = std::pair<std::string, std::string>;

std::map<Key, const RunRecord*> index_records(const std::vector<RunRecord>& rs) {
  std::map<Key, const RunRecord*> m;
  for (const auto& r : rs) m[{r.domain, r.problem}] = &r;
  return m;
}

template <class Metric>
std::vector<PairRow> pairs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                           double sentinel, Metric metric) {
  auto ia = index_records(a), ib = index_records(b);
  std::set<Key> keys;
  for (const auto& [k, _] : ia) keys.insert(k);
  for (const auto& [k, _] : ib) keys.insert(k);
  std::vector<PairRow> out;
  for (const auto& k : keys) {
    PairRow row;
    row.domain = k.first;
    row.problem = k.second;
    auto fa = ia.find(k), fb = ib.find(k);
    row.a_solved = fa != ia.end() && fa->second->covered();
    row.b_solved = fb != ib.end() && fb->second->covered();
    row.a = row.a_solved ? metric(*fa->second) : sentinel;
    row.b = row.b_solved ? metric(*fb->second) : sentinel;
    out.push_back(row);
  }
  return out;
}

}  // namespace

std::vector<PairRow> cost_pairs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                                double* sentinel_out) {
  double max_cost = 0.0;
  for (const auto* rs : {&a, &b})
    for (const auto& r : *rs)
      if (r.covered() && r.cost) max_cost = std::max(max_cost, *r.cost);
  const double sentinel = 10.0 * std::max(max_cost, 1.0);
  if (sentinel_out) *sentinel_out = sentinel;
  return pairs(a, b, sentinel, [](const RunRecord& r) { return r.cost.value_or(0.0); });
}

std::vector<PairRow> time_pairs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                                double time_limit_s) {
  return pairs(a, b, time_limit_s, [](const RunRecord& r) { return r.wall_seconds; });
}

std::string pairs_csv(const std::vector<PairRow>& rows, const std::string& label_a,
                      const std::string& label_b, const std::string& metric) {
  std::ostringstream o;
  o << "# progplan-pairs v1 metric=" << metric << "\n";
  o << "domain,problem," << csv_field(label_a) << "," << csv_field(label_b) << ","
    << csv_field(label_a + "_solved") << "," << csv_field(label_b + "_solved") << "\n";
  for (const auto& r : rows)
    o << csv_field(r.domain) << "," << csv_field(r.problem) << "," << number(r.a) << ","
      << number(r.b) << "," << (r.a_solved ? 1 : 0) << "," << (r.b_solved ? 1 : 0) << "\n";
  return o.str();
}

std::vector<RunRecord> stride_records(const std::vector<RunRecord>& records, std::size_t stride) {
  if (stride <= 1) return records;
  std::map<std::string, std::set<std::string>> problems;
  for (const auto& r : records) problems[r.domain].insert(r.problem);
  std::set<Key> keep;
  for (const auto& [d, ps] : problems) {
    std::size_t i = 0;
    for (const auto& p : ps)
      if (i++ % stride == 0) keep.insert({d, p});
  }
  std::vector<RunRecord> out;
  for (const auto& r : records)
    if (keep.count({r.domain, r.problem})) out.push_back(r);
  return out;
}

std::vector<CorrelationRow> correlation(
    const std::map<std::string, std::map<std::string, double>>& scores_by_domain,
    const std::vector<RunRecord>& records) {
  std::vector<CorrelationRow> out;
  for (const auto& [domain, scores] : scores_by_domain) {
    std::vector<double> xs, ys;
    for (const auto& [cand, score] : scores) {
      double cov = 0;
      for (const auto& r : records)
        if (r.domain == domain && r.candidate == cand && r.covered()) cov += 1;
      xs.push_back(score);
      ys.push_back(cov);
    }
    CorrelationRow row;
    row.domain = domain;
    row.candidates = xs.size();
    try {
      row.r = pearson(xs, ys);
    } catch (const DegenerateInput&) {
      row.r.reset();
    }
    out.push_back(row);
  }
  return out;
}

std::string correlation_markdown(const std::vector<CorrelationRow>& rows) {
  std::ostringstream o;
  o << "| domain | candidates | pearson r |\n|---|---:|---:|\n";
  for (const auto& r : rows) {
    o << "| " << r.domain << " | " << r.candidates << " | ";
    if (r.r) o << std::fixed << std::setprecision(3) << *r.r << std::defaultfloat;
    else o << "degenerate";
    o << " |\n";
  }
  return o.str();
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::ostringstream o;
  o << "# progplan-correlation v1\ndomain,candidates,r\n";
  for (const auto& r : rows)
    o << csv_field(r.domain) << "," << r.candidates << "," << (r.r ? number(*r.r) : "degenerate")
      << "\n";
  return o.str();
}

std::map<std::string, double> read_validation_means(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    auto f = csv_split(line);
    if (f.size() != 5) throw std::runtime_error(path + ": malformed validation line: " + line);
    auto& [sum, n] = acc[f[0]];
    sum += std::stod(f[4]);
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [id, sn] : acc) out[id] = sn.first / static_cast<double>(sn.second);
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("[") + name + "] " + e.what());
  }
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

PipelineSummary run_pipeline(const ExperimentConfig& config) {
  PipelineSummary summary;
  stage("config", [&] {
    config.validate(false);
    if (config.train_problems.size() < 2 && !config.train_problems.empty())
      throw ConfigError("need at least two training problems");
    if (config.programs_dir.empty() && !config.endpoint)
      throw ConfigError("pipeline needs --programs-dir or --endpoint");
    return 0;
  });
  const fs::path out = config.out_dir;
  fs::create_directories(out);

  const Domain domain = stage("parse", [&] { return parse_domain(read_file(config.domain_file)); });
  std::vector<Problem> train;
  stage("parse", [&] {
    for (const auto& f : config.train_problems) train.push_back(parse_problem(read_file(f), domain));
    return 0;
  });
  std::vector<std::string> train_names;
  for (const auto& f : config.train_problems) train_names.push_back(stem(f));
  std::vector<std::size_t> order = training_order(train, train_names);
  if (order.size() > config.training_count) order.resize(config.training_count);

  // Candidate pools.
  std::vector<CandidateProgram> values, policies;
  stage("generate", [&] {
    if (!config.programs_dir.empty()) {
      values = load_program_dir((fs::path(config.programs_dir) / "value").string(), ProgramKind::Value);
      policies =
          load_program_dir((fs::path(config.programs_dir) / "policy").string(), ProgramKind::Policy);
    } else {
      if (order.size() < 2) throw ConfigError("the prompt needs two training problems");
      Domain pd = domain;
      std::vector<Problem> pp{train[order[0]], train[order[1]]};
      if (config.anonymize) {
        AnonymizedSet a = anonymize(domain, pp);
        pd = a.domain;
        pp = a.problems;
      }
      const PromptAssets assets = load_prompt_assets(
          config.prompt_dir.empty() ? default_prompt_dir() : config.prompt_dir);
      ChatCompletionsClient client(*config.endpoint);
      for (ProgramKind kind : {ProgramKind::Value, ProgramKind::Policy}) {
        PromptSpec spec = build_prompt(kind, print_domain(pd),
                                       {print_problem(pp[0]), print_problem(pp[1])}, assets);
        write_file((out / ("prompt-" + std::string(to_string(kind)) + ".md")).string(), spec.text());
        GenerationReport rep = generate_candidates(client, spec, config.candidates);
        for (const auto& f : rep.failures) summary.notes.push_back("generation failure: " + f);
        (kind == ProgramKind::Value ? values : policies) = std::move(rep.candidates);
      }
    }
    save_candidates((out / "candidates" / "value").string(), values);
    save_candidates((out / "candidates" / "policy").string(), policies);
    return 0;
  });
  if (values.empty()) summary.notes.push_back("no value candidate pool");
  if (policies.empty()) summary.notes.push_back("no policy candidate pool");

  auto make_spec = [&](SearchMode mode, double time_limit) {
    SolverSpec spec;
    spec.mode = mode;
    spec.seed = config.seed;
    spec.host = config.host;
    spec.limits.time_limit_s = time_limit;
    return spec;
  };

  // Selection.
  std::vector<std::string> val_names;
  for (std::size_t i : order) val_names.push_back(train_names[i]);
  auto select = [&](const std::vector<CandidateProgram>& pool, ProgramKind kind,
                    std::optional<CandidateProgram>& best, double& score) {
    if (pool.empty()) return;
    const std::string k(to_string(kind));
    Selection sel = stage("select", [&] {
      return select_best(pool, val_names, [&](const CandidateProgram& c, std::size_t p) {
        SolveRequest req;
        req.domain_file = config.domain_file;
        req.problem_file = config.train_problems[order[p]];
        req.spec = make_spec(kind == ProgramKind::Value ? SearchMode::Gbfs : SearchMode::Rollout,
                             config.validation_time_limit_s);
        (kind == ProgramKind::Value ? req.spec.heuristic_source : req.spec.policy_source) = c.source;
        req.memory_bytes = config.memory_bytes;
        req.anonymize = config.anonymize;
        req.candidate = c.id;
        SolveResponse r = solve_problem(req);
        if (r.load_failed) throw HandshakeError(r.reason);
        return RunOutcome{r.record.covered(), r.record.wall_seconds};
      });
    });
    write_validation_csv((out / ("validation-" + k + ".csv")).string(), sel.records);
    for (const auto& rec : sel.records)
      if (rec.candidate_id == sel.best.id) score = rec.mean;
    best = sel.best;
  };
  std::optional<CandidateProgram> best_value, best_policy;
  select(values, ProgramKind::Value, best_value, summary.value_score);
  select(policies, ProgramKind::Policy, best_policy, summary.policy_score);
  if (best_value) summary.value_candidate = best_value->id;
  if (best_policy) summary.policy_candidate = best_policy->id;

  // Mode.
  SearchMode mode = config.mode;
  if (mode == SearchMode::Auto) {
    if (best_value && best_policy) {
      summary.mode = select_mode(summary.policy_score, summary.value_score);
      mode = *summary.mode == ExecutionMode::RolloutOnly ? SearchMode::Rollout : SearchMode::Dual;
    } else if (best_value) {
      mode = SearchMode::Gbfs;
    } else if (best_policy) {
      mode = SearchMode::Rollout;
    } else {
      throw std::runtime_error("[select] no candidate selected");
    }
  }
  if ((mode == SearchMode::Gbfs || mode == SearchMode::Dual) && !best_value)
    throw std::runtime_error("[select] mode " + std::string(to_string(mode)) +
                             " needs a value function");
  if ((mode == SearchMode::Rollout || mode == SearchMode::Dual) && !best_policy)
    throw std::runtime_error("[select] mode " + std::string(to_string(mode)) + " needs a policy");
  {
    ordered_json sel;
    sel["value"] = best_value ? ordered_json(best_value->id) : ordered_json(nullptr);
    sel["policy"] = best_policy ? ordered_json(best_policy->id) : ordered_json(nullptr);
    sel["value_score"] = summary.value_score;
    sel["policy_score"] = summary.policy_score;
    sel["mode"] = std::string(to_string(mode));
    sel["notes"] = summary.notes;
    write_file((out / "selection.json").string(), sel.dump(2) + "\n");
  }

  // Test runs.
  stage("test", [&] {
    for (const auto& f : config.test_problems) {
      SolveRequest req;
      req.domain_file = config.domain_file;
      req.problem_file = f;
      req.spec = make_spec(mode, config.time_limit_s);
      if (best_value) req.spec.heuristic_source = best_value->source;
      if (best_policy) req.spec.policy_source = best_policy->source;
      req.memory_bytes = config.memory_bytes;
      req.anonymize = config.anonymize;
      req.plan_file = (out / "plans" / (stem(f) + ".plan")).string();
      const bool use_value = mode == SearchMode::Gbfs || mode == SearchMode::Dual;
      req.candidate = use_value && mode == SearchMode::Gbfs ? best_value->id
                      : mode == SearchMode::Rollout        ? best_policy->id
                                                           : best_policy->id + "+" + best_value->id;
      summary.records.push_back(solve_problem(req).record);
    }
    return 0;
  });

  stage("report", [&] {
    write_records_csv((out / "records.csv").string(), summary.records);
    CoverageTable t = coverage({{std::string(to_string(mode)), summary.records}});
    write_file((out / "coverage.md").string(), t.markdown());
    write_file((out / "coverage.csv").string(), t.csv());
    return 0;
  });
  return summary;
}

}  // namespace progplan
