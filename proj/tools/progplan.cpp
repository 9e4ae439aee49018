// progplan command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "progplan/anonymize.hpp"
#include "progplan/harness.hpp"
#include "progplan/pddl.hpp"
#include "progplan/synthesis.hpp"
#include "progplan/task.hpp"
#include "progplan/validator.hpp"

using namespace progplan;
namespace fs = std::filesystem;

namespace {

/// "512M", "8G", "1024K" or plain bytes.
std::size_t parse_bytes(const std::string& text) {
  if (text.empty()) throw ConfigError("empty memory limit");
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("bad memory limit '" + text + "'");
  }
  std::string unit = text.substr(pos);
  for (auto& c : unit) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (!unit.empty() && unit.back() == 'B') unit.pop_back();
  if (!unit.empty() && unit.back() == 'I') unit.pop_back();
  double mult = 1;
  if (unit == "K") mult = 1024.0;
  else if (unit == "M") mult = 1024.0 * 1024;
  else if (unit == "G") mult = 1024.0 * 1024 * 1024;
  else if (!unit.empty()) throw ConfigError("bad memory unit in '" + text + "'");
  if (!(v > 0)) throw ConfigError("memory limit must be positive");
  return static_cast<std::size_t>(v * mult);
}

HostOptions host_options(const std::string& host) {
  HostOptions o = default_host_options();
  if (!host.empty()) {
    o.command.clear();
    std::istringstream words(host);
    for (std::string w; words >> w;) o.command.push_back(w);
  }
  return o;
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

/// Shared options of the search-running subcommands.
struct Common {
  std::string domain;
  std::vector<std::string> problems;
  std::string mode{"gbfs"};
  std::string heuristic{"goal-count"};
  std::string policy{"first"};
  std::string programs_dir;
  std::string endpoint;
  std::string model;
  double time_limit{1800};
  std::string memory_limit{"8G"};
  std::uint64_t seed{0};
  std::optional<std::uint64_t> max_steps;
  bool anonymize{false};
  std::string out;
  std::string host;
};

void add_search_options(CLI::App* app, Common& c) {
  app->add_option("--mode", c.mode, "gbfs | rollout | dual | auto; select and pipeline pick auto when omitted")
      ->capture_default_str();
  app->add_option("--heuristic", c.heuristic, "goal-count | blind | zero | value program file")
      ->capture_default_str();
  app->add_option("--policy", c.policy, "first | random | policy program file")->capture_default_str();
  app->add_option("--time-limit", c.time_limit, "seconds per problem")->capture_default_str();
  app->add_option("--memory-limit", c.memory_limit, "per-problem memory cap, e.g. 8G")->capture_default_str();
  app->add_option("--seed", c.seed, "policy fallback seed")->capture_default_str();
  app->add_option("--max-steps", c.max_steps, "rollout step limit, 0 for none");
  app->add_flag("--anonymize", c.anonymize, "search on an anonymized copy");
  app->add_option("--host", c.host, "program host command (default $PROGPLAN_HOST or progplan-host)");
}

ExperimentConfig experiment(const Common& c, std::vector<std::string> train, std::vector<std::string> test) {
  ExperimentConfig e;
  e.domain_file = c.domain;
  e.train_problems = std::move(train);
  e.test_problems = std::move(test);
  e.mode = parse_search_mode(c.mode);
  e.heuristic = c.heuristic;
  e.policy = c.policy;
  e.programs_dir = c.programs_dir;
  if (!c.endpoint.empty()) {
    EndpointConfig ep;
    ep.url = c.endpoint;
    ep.model = c.model;
    e.endpoint = ep;
    if (c.model.empty()) throw ConfigError("--endpoint needs --model");
  }
  e.time_limit_s = c.time_limit;
  e.memory_bytes = parse_bytes(c.memory_limit);
  e.seed = c.seed;
  e.anonymize = c.anonymize;
  e.out_dir = c.out.empty() ? "out" : c.out;
  e.host = host_options(c.host);
  return e;
}

// ---------------------------------------------------------------------------

int cmd_parse(const Common& c) {
  Domain d = parse_domain(read_file(c.domain));
  std::cout << "domain " << d.name << ": " << d.types.size() << " types, " << d.predicates.size()
            << " predicates, " << d.schemas.size() << " schemas\n";
  for (const auto& f : c.problems) {
    Problem p = parse_problem(read_file(f), d);
    Task t = build_task(d, p);
    std::cout << "problem " << p.name << ": " << p.objects.size() << " objects, " << p.init.size()
              << " init atoms (" << t.static_atoms().size() << " static), " << p.goal.size()
              << " goal literals, " << (t.grounded() ? "grounded" : "lazy") << "\n";
  }
  return 0;
}

int cmd_anonymize(const Common& c) {
  if (c.out.empty()) throw ConfigError("--out is required");
  Domain d = parse_domain(read_file(c.domain));
  std::vector<Problem> ps;
  for (const auto& f : c.problems) ps.push_back(parse_problem(read_file(f), d));
  AnonymizedSet a = anonymize(d, ps);
  fs::create_directories(c.out);
  write_file((fs::path(c.out) / "domain.pddl").string(), print_domain(a.domain));
  for (std::size_t i = 0; i < ps.size(); ++i)
    write_file((fs::path(c.out) / (stem(c.problems[i]) + ".pddl")).string(), print_problem(a.problems[i]));
  std::ofstream names(fs::path(c.out) / "namemap.txt");
  a.names.save(names);
  std::cout << "wrote " << ps.size() << " problems and namemap.txt to " << c.out << "\n";
  return 0;
}

/// Auto mode for a single solve: both pools must exist; a selection.json in
/// the programs directory picks the candidates and mode, otherwise the first
/// candidate of each pool runs in dual-queue mode.
void resolve_auto(const Common& c, SolverSpec& spec, std::string& candidate) {
  ExperimentConfig e;
  e.domain_file = c.domain;
  e.mode = SearchMode::Auto;
  e.programs_dir = c.programs_dir;
  e.validate();
  auto values = load_program_dir((fs::path(c.programs_dir) / "value").string(), ProgramKind::Value);
  auto policies = load_program_dir((fs::path(c.programs_dir) / "policy").string(), ProgramKind::Policy);
  std::string value_id = values.front().id, policy_id = policies.front().id;
  spec.mode = SearchMode::Dual;
  // The pipeline leaves selection.json next to its candidates/ directory.
  fs::path sel_file = fs::path(c.programs_dir) / "selection.json";
  if (!fs::exists(sel_file)) sel_file = fs::path(c.programs_dir).parent_path() / "selection.json";
  if (fs::exists(sel_file)) {
    auto sel = nlohmann::json::parse(read_file(sel_file.string()));
    if (sel.value("value", nlohmann::json()).is_string()) value_id = sel["value"].get<std::string>();
    if (sel.value("policy", nlohmann::json()).is_string()) policy_id = sel["policy"].get<std::string>();
    spec.mode = parse_search_mode(sel.value("mode", "dual"));
  }
  auto find = [](const std::vector<CandidateProgram>& pool, const std::string& id) {
    for (const auto& p : pool)
      if (p.id == id) return p;
    throw ConfigError("candidate " + id + " not found in the programs directory");
  };
  spec.heuristic_source = find(values, value_id).source;
  spec.policy_source = find(policies, policy_id).source;
  candidate = spec.mode == SearchMode::Gbfs      ? value_id
              : spec.mode == SearchMode::Rollout ? policy_id
                                                 : policy_id + "+" + value_id;
}

int cmd_solve(const Common& c) {
  if (c.problems.empty()) throw ConfigError("--problems is required");
  SolverSpec spec;
  std::string candidate;
  const SearchMode mode = parse_search_mode(c.mode);
  spec.mode = mode;
  spec.heuristic = c.heuristic;
  spec.policy = c.policy;
  spec.seed = c.seed;
  spec.host = host_options(c.host);
  if (!(c.time_limit > 0)) throw ConfigError("time limit must be positive");
  spec.limits.time_limit_s = c.time_limit;
  if (c.max_steps)
    spec.limits.max_rollout_steps =
        *c.max_steps == 0 ? std::numeric_limits<std::uint64_t>::max() : *c.max_steps;
  if (mode == SearchMode::Auto) resolve_auto(c, spec, candidate);
  const std::size_t memory = parse_bytes(c.memory_limit);

  int status = 0;
  std::vector<RunRecord> records;
  for (const auto& f : c.problems) {
    SolveRequest req;
    req.domain_file = c.domain;
    req.problem_file = f;
    req.spec = spec;
    req.memory_bytes = memory;
    req.anonymize = c.anonymize;
    req.candidate = candidate;
    if (!c.out.empty())
      req.plan_file = c.problems.size() == 1 && fs::path(c.out).has_extension()
                          ? c.out
                          : (fs::path(c.out) / (stem(f) + ".plan")).string();
    SolveResponse r = solve_problem(req);
    records.push_back(r.record);
    std::cout << r.record.problem << ": " << to_string(r.record.outcome);
    if (r.record.cost) std::cout << " cost " << *r.record.cost;
    std::cout << " expansions " << r.record.expansions << " time " << r.record.wall_seconds << " s";
    if (!r.reason.empty() && r.record.outcome != Outcome::Solved) std::cout << " (" << r.reason << ")";
    if (r.record.outcome == Outcome::Solved && !r.record.validated) std::cout << " [" << r.reason << "]";
    std::cout << "\n";
    if (c.problems.size() == 1 && c.out.empty() && r.plan && r.record.validated)
      std::cout << write_ipc_plan(*r.plan);
    int code = r.record.outcome == Outcome::Solved && !r.record.validated ? exit_code(Outcome::Failure)
                                                                        : exit_code(r.record.outcome);
    if (code != 0 && status == 0) status = code;
  }
  if (c.problems.size() > 1 && !c.out.empty())
    write_records_csv((fs::path(c.out) / "records.csv").string(), records);
  return status;
}

int cmd_validate(const Common& c, const std::string& plan_file) {
  if (c.problems.size() != 1) throw ConfigError("validate takes exactly one problem");
  Domain d = parse_domain(read_file(c.domain));
  Problem p = parse_problem(read_file(c.problems[0]), d);
  Plan plan = parse_ipc_plan(read_file(plan_file));
  ValidationOutcome v = validate_plan(d, p, plan);
  if (v.valid) {
    std::cout << "valid, cost " << v.cost << "\n";
    return 0;
  }
  std::cout << "invalid at step " << v.step << ": " << to_string(v.reason) << " " << v.detail << "\n";
  return 2;
}

int cmd_synthesize(const Common& c, std::size_t candidates, bool prompt_only) {
  if (c.out.empty()) throw ConfigError("--out is required");
  if (c.problems.size() < 2) throw ConfigError("synthesize needs at least two training problems");
  Domain d = parse_domain(read_file(c.domain));
  std::vector<Problem> ps;
  for (const auto& f : c.problems) ps.push_back(parse_problem(read_file(f), d));
  std::vector<std::string> names;
  for (const auto& f : c.problems) names.push_back(stem(f));
  auto order = training_order(ps, names);
  std::vector<Problem> two{ps[order[0]], ps[order[1]]};
  if (c.anonymize) {
    AnonymizedSet a = anonymize(d, two);
    d = a.domain;
    two = a.problems;
  }
  const PromptAssets assets = load_prompt_assets(default_prompt_dir());
  std::unique_ptr<ChatCompletionsClient> client;
  if (!prompt_only) {
    if (c.endpoint.empty() || c.model.empty()) throw ConfigError("synthesize needs --endpoint and --model");
    client = std::make_unique<ChatCompletionsClient>(EndpointConfig{c.endpoint, c.model, "", std::nullopt, 600});
  }
  fs::create_directories(c.out);
  for (ProgramKind kind : {ProgramKind::Value, ProgramKind::Policy}) {
    const std::string k(to_string(kind));
    PromptSpec spec = build_prompt(kind, print_domain(d), {print_problem(two[0]), print_problem(two[1])}, assets);
    write_file((fs::path(c.out) / ("prompt-" + k + ".md")).string(), spec.text());
    if (prompt_only) continue;
    GenerationReport rep = generate_candidates(*client, spec, candidates);
    save_candidates((fs::path(c.out) / k).string(), rep.candidates);
    std::size_t failed_extract = 0;
    for (const auto& cand : rep.candidates) failed_extract += cand.extraction_failed;
    std::cout << k << ": " << rep.candidates.size() << " candidates (" << failed_extract
              << " without code), " << rep.failures.size() << " failed calls\n";
    for (const auto& f : rep.failures) std::cerr << "  " << f << "\n";
  }
  return 0;
}

void print_summary(const PipelineSummary& s) {
  if (s.value_candidate) std::cout << "value: " << *s.value_candidate << " score " << s.value_score << "\n";
  if (s.policy_candidate) std::cout << "policy: " << *s.policy_candidate << " score " << s.policy_score << "\n";
  if (s.mode) std::cout << "mode: " << to_string(*s.mode) << "\n";
  for (const auto& n : s.notes) std::cout << "note: " << n << "\n";
  std::size_t covered = 0;
  for (const auto& r : s.records) covered += r.covered();
  if (!s.records.empty()) std::cout << "coverage: " << covered << "/" << s.records.size() << "\n";
}

int cmd_report(const std::vector<std::string>& record_files, std::vector<std::string> labels,
               const std::vector<std::string>& validation, const Common& c, std::size_t stride) {
  if (record_files.empty()) throw ConfigError("--records is required");
  if (labels.empty())
    for (const auto& f : record_files) labels.push_back(stem(f));
  if (labels.size() != record_files.size()) throw ConfigError("--labels must match --records");
  RecordSets sets;
  for (std::size_t i = 0; i < record_files.size(); ++i)
    sets.push_back({labels[i], stride_records(read_records_csv(record_files[i]), stride)});
  const fs::path out = c.out.empty() ? fs::path("report") : fs::path(c.out);
  fs::create_directories(out);
  CoverageTable t = coverage(sets);
  write_file((out / "coverage.md").string(), t.markdown());
  write_file((out / "coverage.csv").string(), t.csv());
  std::cout << t.markdown();
  if (sets.size() >= 2) {
    double sentinel = 0;
    auto cost = cost_pairs(sets[0].second, sets[1].second, &sentinel);
    write_file((out / "cost-pairs.csv").string(), pairs_csv(cost, labels[0], labels[1], "cost"));
    auto time = time_pairs(sets[0].second, sets[1].second, c.time_limit);
    write_file((out / "time-pairs.csv").string(), pairs_csv(time, labels[0], labels[1], "time"));
  }
  if (!validation.empty()) {
    std::map<std::string, std::map<std::string, double>> scores;
    for (const auto& v : validation) {
      auto eq = v.find('=');
      if (eq == std::string::npos) throw ConfigError("--validation expects DOMAIN=FILE");
      scores[v.substr(0, eq)] = read_validation_means(v.substr(eq + 1));
    }
    std::vector<RunRecord> all;
    for (const auto& [_, rs] : sets) all.insert(all.end(), rs.begin(), rs.end());
    auto rows = correlation(scores, all);
    write_file((out / "correlation.md").string(), correlation_markdown(rows));
    write_file((out / "correlation.csv").string(), correlation_csv(rows));
    std::cout << "\n" << correlation_markdown(rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"progplan: planning with external value functions and policies"};
  app.require_subcommand(1);
  Common c;

  auto* parse = app.add_subcommand("parse", "parse and check a domain and problems");
  parse->add_option("--domain", c.domain)->required();
  parse->add_option("--problems", c.problems);

  auto* anon = app.add_subcommand("anonymize", "write anonymized copies and the name map");
  anon->add_option("--domain", c.domain)->required();
  anon->add_option("--problems", c.problems)->required();
  anon->add_option("--out", c.out, "output directory")->required();

  auto* solve = app.add_subcommand("solve", "solve problems; exit status reflects the first failure");
  solve->add_option("--domain", c.domain)->required();
  solve->add_option("--problems,--problem", c.problems)->required();
  solve->add_option("--programs-dir", c.programs_dir, "value/ and policy/ pools for --mode auto");
  solve->add_option("--out", c.out, "plan file, or directory for several problems");
  add_search_options(solve, c);

  std::string plan_file;
  auto* validate = app.add_subcommand("validate", "check a plan against a problem");
  validate->add_option("--domain", c.domain)->required();
  validate->add_option("--problems,--problem", c.problems)->required();
  validate->add_option("--plan", plan_file)->required();

  std::size_t candidates = 10;
  bool prompt_only = false;
  auto* synth = app.add_subcommand("synthesize", "generate candidate programs from a model endpoint");
  synth->add_option("--domain", c.domain)->required();
  synth->add_option("--problems", c.problems, "training problems")->required();
  synth->add_option("--endpoint", c.endpoint, "chat-completions base URL");
  synth->add_option("--model", c.model);
  synth->add_option("--candidates", candidates)->capture_default_str();
  synth->add_option("--out", c.out)->required();
  synth->add_flag("--anonymize", c.anonymize);
  synth->add_flag("--prompt-only", prompt_only, "write the prompts and stop");

  auto* select = app.add_subcommand("select", "score candidate pools on training problems");
  select->add_option("--domain", c.domain)->required();
  select->add_option("--problems", c.problems, "training problems")->required();
  select->add_option("--programs-dir", c.programs_dir)->required();
  select->add_option("--out", c.out);
  add_search_options(select, c);

  std::vector<std::string> train, test;
  std::size_t training_count = 10;
  double validation_limit = kValidationCutoffSeconds;
  auto* pipe = app.add_subcommand("pipeline", "prompt, generate, select, run and report in one go");
  pipe->add_option("--domain", c.domain)->required();
  pipe->add_option("--train", train, "training problems")->required();
  pipe->add_option("--problems,--test", test, "test problems");
  pipe->add_option("--programs-dir", c.programs_dir, "offline value/ and policy/ pools");
  pipe->add_option("--endpoint", c.endpoint);
  pipe->add_option("--model", c.model);
  pipe->add_option("--candidates", candidates)->capture_default_str();
  pipe->add_option("--training-count", training_count)->capture_default_str();
  pipe->add_option("--validation-time-limit", validation_limit)->capture_default_str();
  pipe->add_option("--out", c.out);
  add_search_options(pipe, c);

  std::vector<std::string> record_files, labels, validation;
  std::size_t stride = 1;
  auto* report = app.add_subcommand("report", "coverage, pair and correlation tables from records");
  report->add_option("--records", record_files, "records.csv files")->required();
  report->add_option("--labels", labels, "one label per records file");
  report->add_option("--validation", validation, "DOMAIN=validation.csv for the correlation table");
  report->add_option("--stride", stride, "keep every k-th problem per domain")->capture_default_str();
  report->add_option("--time-limit", c.time_limit, "sentinel for unsolved cells in time pairs")
      ->capture_default_str();
  report->add_option("--out", c.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*parse) return cmd_parse(c);
    if (*anon) return cmd_anonymize(c);
    if (*solve) return cmd_solve(c);
    if (*validate) return cmd_validate(c, plan_file);
    if (*synth) return cmd_synthesize(c, candidates, prompt_only);
    if (*select) {
      if (select->get_option("--mode")->count() == 0) c.mode = "auto";
      ExperimentConfig e = experiment(c, c.problems, {});
      e.validation_time_limit_s = std::min(kValidationCutoffSeconds, c.time_limit);
      e.training_count = c.problems.size();
      print_summary(run_pipeline(e));
      return 0;
    }
    if (*pipe) {
      if (pipe->get_option("--mode")->count() == 0) c.mode = "auto";
      ExperimentConfig e = experiment(c, train, test);
      e.candidates = candidates;
      e.training_count = training_count;
      e.validation_time_limit_s = validation_limit;
      print_summary(run_pipeline(e));
      return 0;
    }
    if (*report) return cmd_report(record_files, labels, validation, c, stride);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
