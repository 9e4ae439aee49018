#ifndef PROGPLAN_SYNTHESIS_HPP
#define PROGPLAN_SYNTHESIS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "progplan/pddl.hpp"
#include "progplan/program.hpp"

namespace progplan {

class MissingFixture : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoLoadableCandidate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Prompt
// ---------------------------------------------------------------------------

/// Static prompt material: instructions, base-class API notes and the
/// Gripper in-context example.
struct PromptAssets {
  std::string instructions_value;
  std::string instructions_policy;
  std::string api_common;
  std::string api_value;
  std::string api_policy;
  std::string example_domain;
  std::string example_problem;
  std::string example_value_program;
  std::string example_policy_program;
};

/// Directory holding the prompt assets: $PROGPLAN_DATA_DIR/prompt if set,
/// otherwise the directory configured at build time.
std::string default_prompt_dir();

/// Throws MissingFixture naming the first absent file.
PromptAssets load_prompt_assets(const std::string& dir);

struct PromptSpec {
  ProgramKind kind{ProgramKind::Value};
  std::string instructions;  // instructions plus API notes
  std::string target_domain;
  std::vector<std::string> training_problems;
  std::string example_domain;
  std::string example_problem;
  std::string example_program;

  /// The assembled prompt: instructions, target domain and training
  /// problems, Gripper files, Gripper program, in that order.
  std::string text() const;
};

/// Requires exactly two training problems; throws MissingFixture when any
/// input text is empty.
PromptSpec build_prompt(ProgramKind kind, const std::string& target_domain,
                        const std::vector<std::string>& training_problems,
                        const PromptAssets& assets);

/// Contents of the last fenced code block, or nullopt if there is none.
std::optional<std::string> extract_code(const std::string& response);

// ---------------------------------------------------------------------------
// Language models and candidates
// ---------------------------------------------------------------------------

struct Completion {
  std::string text;
  double seconds{0.0};
};

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  /// Throws EndpointError on failure.
  virtual Completion complete(const std::string& prompt) = 0;
  virtual std::string model() const = 0;
};

struct EndpointConfig {
  /// Base URL such as "http://localhost:8000/v1"; "/chat/completions" is
  /// appended unless the URL already ends with it.
  std::string url;
  std::string model;
  std::string api_key;
  std::optional<double> temperature;
  double timeout_s{600.0};
};

/// Chat-completions HTTP client. Key defaults to $PROGPLAN_API_KEY.
class ChatCompletionsClient final : public LanguageModel {
 public:
  explicit ChatCompletionsClient(EndpointConfig config);
  Completion complete(const std::string& prompt) override;
  std::string model() const override { return config_.model; }

 private:
  EndpointConfig config_;
};

struct CandidateProgram {
  std::string id;
  /// Generation order; lower wins selection ties.
  std::size_t index{0};
  ProgramKind kind{ProgramKind::Value};
  std::string model;
  double generation_seconds{0.0};
  std::string source;
  std::string response;
  bool extraction_failed{false};
};

struct GenerationReport {
  std::vector<CandidateProgram> candidates;
  /// Diagnostics of calls that failed every retry.
  std::vector<std::string> failures;
};

/// Calls the model `n` times, retrying each failed call up to `retries`
/// times. Throws EndpointError when no call succeeds.
GenerationReport generate_candidates(LanguageModel& model, const PromptSpec& prompt,
                                     std::size_t n = 10, std::size_t retries = 2);

/// Offline pool: every regular file in `dir`, sorted by name. ".py" files
/// are taken verbatim; anything else goes through extract_code. A directory
/// written by save_candidates is read through its manifest instead.
std::vector<CandidateProgram> load_program_dir(const std::string& dir, ProgramKind kind);

/// Writes <id>.py, <id>.response.txt and manifest.json into `dir`.
void save_candidates(const std::string& dir, const std::vector<CandidateProgram>& candidates);
std::vector<CandidateProgram> load_candidates(const std::string& dir);

std::string sha256_hex(const std::string& data);

// ---------------------------------------------------------------------------
// Validation and selection
// ---------------------------------------------------------------------------

inline constexpr double kValidationCutoffSeconds = 60.0;

/// 1 / (1 + ln(t + 1)) for solved runs with t < 60 s, 0 otherwise.
double validation_score(double seconds, bool solved);

struct ProblemScore {
  std::string problem;
  bool solved{false};
  double seconds{0.0};
  double score{0.0};
};

struct ValidationRecord {
  std::string candidate_id;
  std::vector<ProblemScore> problems;
  double mean{0.0};
  bool loadable{true};
  std::string diagnostic;
};

struct RunOutcome {
  bool solved{false};
  double seconds{0.0};
};

/// Runs one candidate on one training problem. Throws HandshakeError (or
/// any exception) when the candidate cannot be loaded.
using CandidateRunner = std::function<RunOutcome(const CandidateProgram&, std::size_t problem)>;

struct Selection {
  CandidateProgram best;
  std::vector<ValidationRecord> records;
};

/// Scores every candidate on every problem; the highest mean wins, ties go
/// to the lower generation index. Throws NoLoadableCandidate.
Selection select_best(const std::vector<CandidateProgram>& candidates,
                      const std::vector<std::string>& problem_names, const CandidateRunner& run);

void write_validation_csv(const std::string& path, const std::vector<ValidationRecord>& records);

enum class ExecutionMode { RolloutOnly, DualQueue };
std::string_view to_string(ExecutionMode m);

/// RolloutOnly iff the policy scored strictly higher.
ExecutionMode select_mode(double policy_score, double value_score);

/// Sample Pearson coefficient. Throws DegenerateInput on mismatched or short
/// input or zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// Training order: fewest objects first, then name. Returns indices.
std::vector<std::size_t> training_order(const std::vector<Problem>& problems,
                                        const std::vector<std::string>& names);

}  // namespace progplan

#endif  // PROGPLAN_SYNTHESIS_HPP
