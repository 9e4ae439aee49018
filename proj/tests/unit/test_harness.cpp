#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "fixtures.hpp"
#include "progplan/harness.hpp"
#include "progplan/validator.hpp"
#include "tempdir.hpp"

using namespace progplan;
namespace fs = std::filesystem;

namespace {

HostOptions stub_host() {
  HostOptions o;
  o.command = {PROGPLAN_STUB_HOST};
  return o;
}

RunRecord record(std::string domain, std::string problem, Outcome o, std::optional<double> cost,
                 double wall, bool validated, std::string candidate = "") {
  RunRecord r;
  r.domain = std::move(domain);
  r.problem = std::move(problem);
  r.mode = "gbfs";
  r.candidate = std::move(candidate);
  r.outcome = o;
  r.cost = cost;
  r.wall_seconds = wall;
  r.validated = validated;
  return r;
}

/// gripper-N problem files plus the domain, written under `dir`.
struct GripperFiles {
  std::string domain;
  std::vector<std::string> problems;
};

GripperFiles gripper_files(const fixtures::TempDir& dir, std::vector<int> sizes) {
  GripperFiles f;
  f.domain = dir.str("domain.pddl");
  write_file(f.domain, fixtures::gripper_domain());
  for (int n : sizes) {
    f.problems.push_back(dir.str("gripper-" + std::to_string(n) + ".pddl"));
    write_file(f.problems.back(), fixtures::gripper_problem(n));
  }
  return f;
}

void write_program(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  write_file((dir / name).string(), text);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("records csv round trip") {
  fixtures::TempDir dir("rec");
  std::vector<RunRecord> rs{record("gripper", "p1", Outcome::Solved, 11.0, 0.25, true, "policy-01+value-03"),
                            record("odd,name", "p\"2", Outcome::TimeLimit, std::nullopt, 1800, false)};
  rs[0].expansions = 42;
  rs[0].peak_memory_bytes = 1 << 20;
  write_records_csv(dir.str("r.csv"), rs);
  auto back = read_records_csv(dir.str("r.csv"));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].domain == rs[i].domain);
    CHECK(back[i].problem == rs[i].problem);
    CHECK(back[i].candidate == rs[i].candidate);
    CHECK(back[i].outcome == rs[i].outcome);
    CHECK(back[i].cost == rs[i].cost);
    CHECK(back[i].wall_seconds == rs[i].wall_seconds);
    CHECK(back[i].expansions == rs[i].expansions);
    CHECK(back[i].peak_memory_bytes == rs[i].peak_memory_bytes);
    CHECK(back[i].validated == rs[i].validated);
  }
  CHECK(read_file(dir.str("r.csv")).rfind("# progplan-records v1\n", 0) == 0);
  write_file(dir.str("bad.csv"), "nope\n");
  CHECK_THROWS(read_records_csv(dir.str("bad.csv")));
}

TEST_CASE("coverage counts only validated plans") {
  std::vector<RunRecord> a{record("d1", "p1", Outcome::Solved, 3, 1, true),
                           record("d1", "p2", Outcome::Solved, 3, 1, false),
                           record("d2", "p1", Outcome::TimeLimit, std::nullopt, 9, false)};
  std::vector<RunRecord> b{record("d1", "p1", Outcome::Solved, 5, 1, true),
                           record("d2", "p1", Outcome::Solved, 8, 2, true)};
  auto t = coverage({{"gbfs", a}, {"dual", b}});
  CHECK(t.solved["d1"]["gbfs"] == 1);
  CHECK(t.attempted["d1"]["gbfs"] == 2);
  CHECK(t.solved["d2"]["dual"] == 1);
  const std::string md = t.markdown();
  CHECK(md.find("| domain | gbfs | dual |") != std::string::npos);
  CHECK(md.find("| total | 1/3 | 2/2 |") != std::string::npos);
  CHECK(t.csv() == "# progplan-coverage v1\ndomain,planner,solved,attempted\n"
                   "d1,gbfs,1,2\nd1,dual,1,1\nd2,gbfs,0,1\nd2,dual,1,1\n");
  CHECK_THROWS_AS(coverage({}), EmptyInput);
}

TEST_CASE("pair sentinels") {
  std::vector<RunRecord> a{record("d", "p1", Outcome::Solved, 7, 2, true),
                           record("d", "p2", Outcome::StepLimit, std::nullopt, 5, false)};
  std::vector<RunRecord> b{record("d", "p1", Outcome::Solved, 12, 3, true),
                           record("d", "p3", Outcome::Solved, 2, 1, true)};
  double sentinel = 0;
  auto rows = cost_pairs(a, b, &sentinel);
  CHECK(sentinel == 120.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].a == 7);
  CHECK(rows[0].b == 12);
  CHECK(rows[1].a == 120.0);
  CHECK(rows[1].b == 120.0);
  CHECK(rows[2].a == 120.0);
  CHECK(rows[2].b == 2);
  auto times = time_pairs(a, b, 1800);
  CHECK(times[1].a == 1800);
  CHECK(times[0].b == 3);
  CHECK(pairs_csv(rows, "x", "y", "cost").find("d,p2,120,120,0,0") != std::string::npos);
  double s2 = 0;
  cost_pairs({}, {}, &s2);
  CHECK(s2 == 10.0);
}

TEST_CASE("stride keeps every k-th problem per domain") {
  std::vector<RunRecord> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(record("d", "p" + std::to_string(i), Outcome::Solved, 1, 1, true));
  rs.push_back(record("e", "p0", Outcome::Solved, 1, 1, true));
  auto s = stride_records(rs, 3);
  CHECK(s.size() == 5);  // p0 p3 p6 p9 and e/p0
  CHECK(stride_records(rs, 1).size() == rs.size());
}

TEST_CASE("correlation report") {
  std::map<std::string, std::map<std::string, double>> scores{
      {"d", {{"c0", 0.1}, {"c1", 0.5}, {"c2", 0.9}}}, {"flat", {{"c0", 0.3}, {"c1", 0.3}}}};
  std::vector<RunRecord> rs;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i <= k; ++i)
      rs.push_back(record("d", "p" + std::to_string(i), Outcome::Solved, 1, 1, true, "c" + std::to_string(k)));
  auto rows = correlation(scores, rs);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].r);
  CHECK(*rows[0].r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(rows[1].r);
  CHECK(correlation_markdown(rows).find("| flat | 2 | degenerate |") != std::string::npos);
  CHECK(correlation_csv(rows).find("flat,2,degenerate") != std::string::npos);
}

TEST_CASE("validation means from csv") {
  fixtures::TempDir dir("means");
  write_file(dir.str("v.csv"), "# progplan-validation v1\ncandidate_id,problem,solved,time_s,score\n"
                               "a,p1,1,0,1\na,p2,0,0,0\nb,p1,1,0,0.5\n");
  auto m = read_validation_means(dir.str("v.csv"));
  CHECK(m["a"] == 0.5);
  CHECK(m["b"] == 0.5);
}

TEST_CASE("isolated runs") {
  SUBCASE("results cross the process boundary") {
    auto run = run_isolated(
        [] {
          SearchResult r;
          r.outcome = Outcome::Solved;
          r.plan = Plan{{{"move", {"a", "b"}}}};
          r.stats.expansions = 9;
          return r;
        },
        10, std::size_t{1} << 30);
    CHECK(run.result.solved());
    CHECK(run.result.plan->steps[0].args[1] == "b");
    CHECK(run.result.stats.expansions == 9);
    CHECK_FALSE(run.killed);
  }
  SUBCASE("overrunning children are killed") {
    auto start = std::chrono::steady_clock::now();
    auto run = run_isolated(
        [] {
          std::this_thread::sleep_for(std::chrono::seconds(30));
          return SearchResult{};
        },
        0.2, std::size_t{1} << 30, 0.3);
    CHECK(run.killed);
    CHECK(run.result.outcome == Outcome::TimeLimit);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
  }
  SUBCASE("allocation failure is a memory limit") {
    auto run = run_isolated(
        [] {
          std::vector<std::vector<char>> hog;
          for (;;) hog.emplace_back(std::size_t{16} << 20, 'x');
          return SearchResult{};
        },
        10, std::size_t{256} << 20);
    CHECK(run.result.outcome == Outcome::MemoryLimit);
  }
  SUBCASE("exceptions become failures") {
    auto run = run_isolated([]() -> SearchResult { throw std::runtime_error("kaboom"); }, 10,
                            std::size_t{1} << 30);
    CHECK(run.result.outcome == Outcome::Failure);
    CHECK(run.child_error == "kaboom");
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code(Outcome::Solved) == 0);
  CHECK(exit_code(Outcome::Unsolvable) == 2);
  CHECK(exit_code(Outcome::TimeLimit) == 3);
  CHECK(exit_code(Outcome::MemoryLimit) == 4);
  CHECK(exit_code(Outcome::StepLimit) == 5);
  CHECK(exit_code(Outcome::Failure) == 6);
}

TEST_CASE("mode names") {
  CHECK(parse_search_mode("dual") == SearchMode::Dual);
  CHECK(parse_search_mode("auto") == SearchMode::Auto);
  CHECK_THROWS_AS(parse_search_mode("astar"), ConfigError);
  auto in = fixtures::gripper(1);
  Task t = build_task(in.domain, in.problem);
  SolverSpec spec;
  spec.mode = SearchMode::Auto;
  CHECK_THROWS_AS(solve_task(t, spec), ConfigError);
}

TEST_CASE("config validation") {
  fixtures::TempDir dir("cfg");
  ExperimentConfig c;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.domain_file = "d.pddl";
  c.validate();
  c.time_limit_s = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.time_limit_s = 10;
  c.programs_dir = dir.str("missing");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.programs_dir = dir.str();
  c.mode = SearchMode::Auto;
  write_program(dir.path() / "value", "a.py", "# stub: default\n");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.validate(false);
  write_program(dir.path() / "policy", "a.py", "# stub: first\n");
  c.validate();
  c.programs_dir.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.endpoint = EndpointConfig{"http://localhost:1/v1", "m", "", std::nullopt, 1};
  c.validate();
}

TEST_CASE("solve_problem writes a validated plan") {
  fixtures::TempDir dir("solve");
  auto files = gripper_files(dir, {3});
  SolveRequest req;
  req.domain_file = files.domain;
  req.problem_file = files.problems[0];
  req.spec.limits.time_limit_s = 30;
  req.memory_bytes = std::size_t{1} << 30;
  req.plan_file = dir.str("out/p.plan");
  auto r = solve_problem(req);
  REQUIRE(r.record.covered());
  CHECK(r.record.domain == "gripper-typed");
  CHECK(r.record.problem == "gripper-3");
  REQUIRE(fs::exists(req.plan_file));
  Plan back = parse_ipc_plan(read_file(req.plan_file));
  CHECK(back == *r.plan);
  auto in = fixtures::gripper(3);
  CHECK(validate_plan(in.domain, in.problem, back).valid);
  CHECK(*r.record.cost == back.cost());
}

TEST_CASE("solve_problem with external programs") {
  fixtures::TempDir dir("solve-ext");
  auto files = gripper_files(dir, {4});
  SolveRequest req;
  req.domain_file = files.domain;
  req.problem_file = files.problems[0];
  req.spec.host = stub_host();
  req.spec.limits.time_limit_s = 30;
  req.memory_bytes = std::size_t{1} << 30;
  SUBCASE("dual queue") {
    req.spec.mode = SearchMode::Dual;
    req.spec.heuristic_source = "# stub: default\n";
    req.spec.policy_source = "# stub: gripper\n";
    auto r = solve_problem(req);
    CHECK(r.record.covered());
    CHECK(r.plan->size() >= 11);
  }
  SUBCASE("anonymized value function") {
    req.anonymize = true;
    req.spec.heuristic_source = "# stub: default\n";
    auto r = solve_problem(req);
    REQUIRE(r.record.covered());
    for (const auto& s : r.plan->steps) CHECK((s.schema == "move" || s.schema == "pick" || s.schema == "drop"));
  }
  SUBCASE("load failure is flagged") {
    req.spec.heuristic_source = "this is not a program";
    auto r = solve_problem(req);
    CHECK(r.load_failed);
    CHECK(r.record.outcome == Outcome::Failure);
    CHECK(r.reason.find("SyntaxError") != std::string::npos);
  }
  SUBCASE("unsolvable is reported") {
    fixtures::TempDir t("unsolv");
    write_file(t.str("d.pddl"), fixtures::transport_domain());
    write_file(t.str("p.pddl"), fixtures::transport_problem(3, 1, 1, true, 0));
    req.domain_file = t.str("d.pddl");
    req.problem_file = t.str("p.pddl");
    req.spec.heuristic_source.reset();
    auto r = solve_problem(req);
    CHECK(r.record.outcome == Outcome::Unsolvable);
    CHECK_FALSE(r.record.covered());
  }
}

TEST_CASE("pipeline offline") {
  fixtures::TempDir dir("pipe");
  auto files = gripper_files(dir, {2, 3, 5, 6});
  const fs::path programs = dir.path() / "programs";
  write_program(programs / "value", "a.py", "# stub: default\n");
  write_program(programs / "value", "b.py", "this does not load\n");
  write_program(programs / "value", "c.py", "# stub: default slow=100\n");

  ExperimentConfig c;
  c.domain_file = files.domain;
  c.train_problems = {files.problems[1], files.problems[0]};
  c.test_problems = {files.problems[2], files.problems[3]};
  c.mode = SearchMode::Auto;
  c.programs_dir = programs.string();
  c.time_limit_s = 60;
  c.validation_time_limit_s = 20;
  c.memory_bytes = std::size_t{2} << 30;
  c.host = stub_host();

  SUBCASE("value pool only degrades to gbfs") {
    c.out_dir = dir.str("out1");
    auto s = run_pipeline(c);
    CHECK(s.value_candidate == "a");
    CHECK_FALSE(s.policy_candidate);
    CHECK_FALSE(s.mode);
    CHECK(std::find(s.notes.begin(), s.notes.end(), "no policy candidate pool") != s.notes.end());
    REQUIRE(s.records.size() == 2);
    for (const auto& r : s.records) {
      CHECK(r.covered());
      CHECK(r.mode == "gbfs");
      CHECK(r.candidate == "a");
    }
    auto sel = nlohmann::json::parse(read_file(c.out_dir + "/selection.json"));
    CHECK(sel["mode"] == "gbfs");
    CHECK(sel["policy"].is_null());
    CHECK(fs::exists(c.out_dir + "/plans/gripper-5.plan"));
    CHECK(fs::exists(c.out_dir + "/coverage.md"));
    CHECK(fs::exists(c.out_dir + "/candidates/value/manifest.json"));
    CHECK(read_records_csv(c.out_dir + "/records.csv").size() == 2);
    auto means = read_validation_means(c.out_dir + "/validation-value.csv");
    CHECK(means.count("b") == 0);
    CHECK(means["a"] > means["c"]);
  }
  SUBCASE("both pools choose a mode") {
    write_program(programs / "policy", "gripper.py", "# stub: gripper\n");
    write_program(programs / "policy", "loop.py", "# stub: loop\n");
    c.out_dir = dir.str("out2");
    auto s = run_pipeline(c);
    CHECK(s.policy_candidate == "gripper");
    REQUIRE(s.mode);
    CHECK(*s.mode == select_mode(s.policy_score, s.value_score));
    for (const auto& r : s.records) CHECK(r.covered());
    CHECK(fs::exists(c.out_dir + "/validation-policy.csv"));
    auto means = read_validation_means(c.out_dir + "/validation-policy.csv");
    CHECK(means["loop"] == 0.0);
  }
  SUBCASE("anonymized runs map plans back") {
    c.anonymize = true;
    c.out_dir = dir.str("out3");
    auto s = run_pipeline(c);
    for (const auto& r : s.records) CHECK(r.covered());
    auto plan = parse_ipc_plan(read_file(c.out_dir + "/plans/gripper-6.plan"));
    auto in = fixtures::gripper(6);
    CHECK(validate_plan(in.domain, in.problem, plan).valid);
  }
  SUBCASE("repeat runs agree") {
    c.out_dir = dir.str("out4");
    auto a = run_pipeline(c);
    c.out_dir = dir.str("out5");
    auto b = run_pipeline(c);
    CHECK(a.value_candidate == b.value_candidate);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].outcome == b.records[i].outcome);
      CHECK(a.records[i].cost == b.records[i].cost);
      CHECK(a.records[i].expansions == b.records[i].expansions);
    }
    CHECK(read_file(c.out_dir + "/plans/gripper-5.plan") ==
          read_file(dir.str("out4") + "/plans/gripper-5.plan"));
  }
  SUBCASE("stage errors") {
    c.out_dir = dir.str("out6");
    c.programs_dir.clear();
    try {
      run_pipeline(c);
      FAIL("expected failure");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).rfind("[config]", 0) == 0);
    }
    c.programs_dir = programs.string();
    write_file(dir.str("broken.pddl"), "(define (problem");
    c.train_problems = {dir.str("broken.pddl"), files.problems[0]};
    try {
      run_pipeline(c);
      FAIL("expected failure");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).rfind("[parse]", 0) == 0);
    }
  }
}

}
