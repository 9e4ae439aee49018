#ifndef PROGPLAN_HARNESS_HPP
#define PROGPLAN_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "progplan/external.hpp"
#include "progplan/search.hpp"
#include "progplan/synthesis.hpp"

namespace progplan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SearchMode { Gbfs, Rollout, Dual, Auto };
std::string_view to_string(SearchMode m);
SearchMode parse_search_mode(std::string_view text);

/// What to plan with. Heuristic and policy are built-in names
/// ("goal-count", "blind", "zero"; "first", "random") or program files
/// served by the program host.
struct SolverSpec {
  SearchMode mode{SearchMode::Gbfs};
  std::string heuristic{"goal-count"};
  std::string policy{"first"};
  /// Program text served by the host; overrides the names above.
  std::optional<std::string> heuristic_source;
  std::optional<std::string> policy_source;
  std::uint64_t seed{0};
  ResourceLimits limits;
  HostOptions host;
  DualQueueOptions dual;
};

bool is_builtin_heuristic(const std::string& name);
bool is_builtin_policy(const std::string& name);

/// Runs the configured search in this process. Auto is not accepted here.
SearchResult solve_task(const Task& task, const SolverSpec& spec);

struct IsolatedRun {
  SearchResult result;
  std::size_t peak_rss_bytes{0};
  /// The child overran the wall-clock grace period and was killed.
  bool killed{false};
  /// what() of an exception that escaped the job, prefixed "handshake: "
  /// for HandshakeError.
  std::string child_error;
};

/// Runs `job` in a forked child in its own process group with an address
/// space cap of `memory_bytes`. The child is killed at time_limit_s + grace_s.
IsolatedRun run_isolated(const std::function<SearchResult()>& job, double time_limit_s,
                         std::size_t memory_bytes, double grace_s = 5.0);

struct ExperimentConfig {
  std::string domain_file;
  std::vector<std::string> train_problems;
  std::vector<std::string> test_problems;
  SearchMode mode{SearchMode::Gbfs};
  std::string heuristic{"goal-count"};
  std::string policy{"first"};
  std::string programs_dir;
  std::optional<EndpointConfig> endpoint;
  std::size_t candidates{10};
  std::size_t training_count{10};
  double time_limit_s{1800.0};
  std::size_t memory_bytes{std::size_t{8} << 30};
  double validation_time_limit_s{kValidationCutoffSeconds};
  std::uint64_t seed{0};
  bool anonymize{false};
  std::string out_dir{"out"};
  HostOptions host;
  std::string prompt_dir;

  /// Throws ConfigError. With `require_pools`, auto mode needs both a value
  /// and a policy candidate pool.
  void validate(bool require_pools = true) const;
};

struct RunRecord {
  std::string domain;
  std::string problem;
  std::string mode;
  std::string candidate;
  Outcome outcome{Outcome::Unsolvable};
  std::optional<double> cost;
  double wall_seconds{0.0};
  std::uint64_t expansions{0};
  std::size_t peak_memory_bytes{0};
  bool validated{false};

  bool covered() const { return outcome == Outcome::Solved && validated; }
};

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::string& path);

struct SolveRequest {
  std::string domain_file;
  std::string problem_file;
  SolverSpec spec;
  std::size_t memory_bytes{std::size_t{8} << 30};
  bool anonymize{false};
  /// Plan file destination; empty to skip writing.
  std::string plan_file;
  std::string candidate;
};

struct SolveResponse {
  RunRecord record;
  std::optional<Plan> plan;
  std::string reason;
  /// A program failed its handshake.
  bool load_failed{false};
};

/// One problem: parse, optionally anonymize, search in an isolated child,
/// map the plan back, validate against the original files, write the plan.
SolveResponse solve_problem(const SolveRequest& request);

/// Exit status of `progplan solve` for an outcome.
int exit_code(Outcome o);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Named record sets, e.g. one per planner configuration.
using RecordSets = std::vector<std::pair<std::string, std::vector<RunRecord>>>;

struct CoverageTable {
  std::vector<std::string> columns;  // record-set labels
  std::vector<std::string> domains;
  /// solved[domain][column]
  std::map<std::string, std::map<std::string, std::size_t>> solved;
  std::map<std::string, std::map<std::string, std::size_t>> attempted;

  std::string markdown() const;
  std::string csv() const;
};

/// Counts validator-approved plans. Throws EmptyInput.
CoverageTable coverage(const RecordSets& sets);

struct PairRow {
  std::string domain;
  std::string problem;
  double a{0.0};
  double b{0.0};
  bool a_solved{false};
  bool b_solved{false};
};

/// Plan-cost pairs; unsolved cells hold 10 × the largest observed cost.
std::vector<PairRow> cost_pairs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                                double* sentinel_out = nullptr);
/// Wall-time pairs; unsolved cells hold `time_limit_s`.
std::vector<PairRow> time_pairs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                                double time_limit_s);
std::string pairs_csv(const std::vector<PairRow>& rows, const std::string& label_a,
                      const std::string& label_b, const std::string& metric);

struct CorrelationRow {
  std::string domain;
  std::size_t candidates{0};
  /// nullopt when the coefficient is undefined (reported as "degenerate").
  std::optional<double> r;
};

/// Every `stride`-th problem (in name order) of each domain.
std::vector<RunRecord> stride_records(const std::vector<RunRecord>& records, std::size_t stride);

/// Pearson r per domain between each candidate's mean validation score and
/// its coverage in `records` (matched on RunRecord::candidate).
std::vector<CorrelationRow> correlation(const std::map<std::string, std::map<std::string, double>>&
                                            scores_by_domain,
                                        const std::vector<RunRecord>& records);
std::string correlation_markdown(const std::vector<CorrelationRow>& rows);
std::string correlation_csv(const std::vector<CorrelationRow>& rows);

/// candidate_id → mean score, from a validation CSV.
std::map<std::string, double> read_validation_means(const std::string& path);

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct PipelineSummary {
  std::optional<std::string> value_candidate;
  std::optional<std::string> policy_candidate;
  double value_score{0.0};
  double policy_score{0.0};
  std::optional<ExecutionMode> mode;
  std::vector<RunRecord> records;
  std::vector<std::string> notes;
};

/// prompt → candidates → selection → mode → test runs → reports, every
/// artifact written under config.out_dir. Stage failures throw
/// std::runtime_error with a "[stage]" prefix.
PipelineSummary run_pipeline(const ExperimentConfig& config);

}  // namespace progplan

#endif  // PROGPLAN_HARNESS_HPP
