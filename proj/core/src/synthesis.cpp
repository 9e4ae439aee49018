#include "progplan/synthesis.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#ifndef PROGPLAN_DEFAULT_DATA_DIR
#define PROGPLAN_DEFAULT_DATA_DIR "data"
#endif

namespace progplan {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Prompt
// ---------------------------------------------------------------------------

std::string default_prompt_dir() {
  if (const char* env = std::getenv("PROGPLAN_DATA_DIR"); env && *env)
    return std::string(env) + "/prompt";
  return std::string(PROGPLAN_DEFAULT_DATA_DIR) + "/prompt";
}

PromptAssets load_prompt_assets(const std::string& dir) {
  auto get = [&](const char* name) {
    const fs::path p = fs::path(dir) / name;
    if (!fs::is_regular_file(p)) throw MissingFixture("missing prompt asset " + p.string());
    return read_file(p.string());
  };
  PromptAssets a;
  a.instructions_value = get("instructions-value.txt");
  a.instructions_policy = get("instructions-policy.txt");
  a.api_common = get("api-common.md");
  a.api_value = get("api-value.md");
  a.api_policy = get("api-policy.md");
  a.example_domain = get("gripper-domain.pddl");
  a.example_problem = get("gripper-problem.pddl");
  a.example_value_program = get("gripper-value.py");
  a.example_policy_program = get("gripper-policy.py");
  return a;
}

namespace {

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void fenced(std::ostringstream& o, const char* lang, const std::string& body) {
  o << "```" << lang << "\n" << trimmed(body) << "\n```\n\n";
}

}  // namespace

PromptSpec build_prompt(ProgramKind kind, const std::string& target_domain,
                        const std::vector<std::string>& training_problems,
                        const PromptAssets& assets) {
  if (training_problems.size() != 2)
    throw std::invalid_argument("the prompt takes exactly two training problems");
  if (trimmed(target_domain).empty()) throw MissingFixture("empty target domain");
  for (const auto& p : training_problems)
    if (trimmed(p).empty()) throw MissingFixture("empty training problem");

  const bool value = kind == ProgramKind::Value;
  PromptSpec spec;
  spec.kind = kind;
  spec.instructions = trimmed(value ? assets.instructions_value : assets.instructions_policy) +
                      "\n\n" + trimmed(assets.api_common) + "\n\n" +
                      trimmed(value ? assets.api_value : assets.api_policy);
  spec.target_domain = target_domain;
  spec.training_problems = training_problems;
  spec.example_domain = assets.example_domain;
  spec.example_problem = assets.example_problem;
  spec.example_program = value ? assets.example_value_program : assets.example_policy_program;
  for (const std::string* s : {&spec.example_domain, &spec.example_problem, &spec.example_program})
    if (trimmed(*s).empty()) throw MissingFixture("empty Gripper example");
  return spec;
}

std::string PromptSpec::text() const {
  std::ostringstream o;
  o << "# Task\n\n" << instructions << "\n\n";
  o << "# Target domain\n\n";
  fenced(o, "pddl", target_domain);
  for (std::size_t i = 0; i < training_problems.size(); ++i) {
    o << "# Training problem " << i + 1 << "\n\n";
    fenced(o, "pddl", training_problems[i]);
  }
  o << "# Example domain (Gripper)\n\n";
  fenced(o, "pddl", example_domain);
  o << "# Example problem (Gripper)\n\n";
  fenced(o, "pddl", example_problem);
  o << "# Example " << (kind == ProgramKind::Value ? "value function" : "policy")
    << " for Gripper\n\n";
  fenced(o, "python", example_program);
  return o.str();
}

std::optional<std::string> extract_code(const std::string& response) {
  std::optional<std::string> last;
  std::istringstream in(response);
  std::string line, body;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trimmed(line);
    if (t.rfind("```", 0) == 0) {
      if (inside) {
        last = body;
        inside = false;
      } else {
        inside = true;
        body.clear();
      }
      continue;
    }
    if (inside) body += line + "\n";
  }
  return last;
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

GenerationReport generate_candidates(LanguageModel& model, const PromptSpec& prompt, std::size_t n,
                                     std::size_t retries) {
  if (n == 0) throw std::invalid_argument("candidate count must be at least 1");
  GenerationReport report;
  const std::string text = prompt.text();
  const std::string kind(to_string(prompt.kind));
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<Completion> done;
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= retries && !done; ++attempt) {
      try {
        done = model.complete(text);
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    if (!done) {
      report.failures.push_back("call " + std::to_string(i) + ": " + last_error);
      continue;
    }
    CandidateProgram c;
    std::ostringstream id;
    id << kind << "-" << std::setw(2) << std::setfill('0') << i;
    c.id = id.str();
    c.index = i;
    c.kind = prompt.kind;
    c.model = model.model();
    c.generation_seconds = done->seconds;
    c.response = done->text;
    if (auto code = extract_code(done->text)) c.source = *code;
    else c.extraction_failed = true;
    report.candidates.push_back(std::move(c));
  }
  if (report.candidates.empty())
    throw EndpointError("every model call failed: " +
                        (report.failures.empty() ? std::string("?") : report.failures.back()));
  return report;
}

std::vector<CandidateProgram> load_program_dir(const std::string& dir, ProgramKind kind) {
  if (!fs::is_directory(dir)) return {};
  if (fs::exists(fs::path(dir) / "manifest.json")) {
    auto saved = load_candidates(dir);
    for (auto& c : saved) c.kind = kind;
    return saved;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CandidateProgram> out;
  for (const auto& f : files) {
    CandidateProgram c;
    c.id = f.stem().string();
    c.index = out.size();
    c.kind = kind;
    c.model = "offline";
    c.response = read_file(f.string());
    if (f.extension() == ".py") {
      c.source = c.response;
    } else if (auto code = extract_code(c.response)) {
      c.source = *code;
    } else {
      c.extraction_failed = true;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream o;
  for (unsigned int i = 0; i < len; ++i)
    o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return o.str();
}

void save_candidates(const std::string& dir, const std::vector<CandidateProgram>& candidates) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  for (const auto& c : candidates) {
    const std::string source_file = c.id + ".py";
    const std::string response_file = c.id + ".response.txt";
    write_file((fs::path(dir) / source_file).string(), c.source);
    write_file((fs::path(dir) / response_file).string(), c.response);
    manifest.push_back({{"id", c.id},
                        {"index", c.index},
                        {"kind", std::string(to_string(c.kind))},
                        {"model", c.model},
                        {"generation_seconds", c.generation_seconds},
                        {"sha256", sha256_hex(c.source)},
                        {"source", source_file},
                        {"response", response_file},
                        {"extraction_failed", c.extraction_failed}});
  }
  write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::vector<CandidateProgram> load_candidates(const std::string& dir) {
  const auto path = fs::path(dir) / "manifest.json";
  auto manifest = nlohmann::json::parse(read_file(path.string()));
  std::vector<CandidateProgram> out;
  for (const auto& m : manifest) {
    CandidateProgram c;
    c.id = m.at("id").get<std::string>();
    c.index = m.at("index").get<std::size_t>();
    c.kind = parse_program_kind(m.at("kind").get<std::string>());
    c.model = m.at("model").get<std::string>();
    c.generation_seconds = m.at("generation_seconds").get<double>();
    c.source = read_file((fs::path(dir) / m.at("source").get<std::string>()).string());
    c.response = read_file((fs::path(dir) / m.at("response").get<std::string>()).string());
    c.extraction_failed = m.at("extraction_failed").get<bool>();
    if (sha256_hex(c.source) != m.at("sha256").get<std::string>())
      throw std::runtime_error("candidate " + c.id + " does not match its manifest hash");
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation and selection
// ---------------------------------------------------------------------------

double validation_score(double seconds, bool solved) {
  if (!solved || !(seconds < kValidationCutoffSeconds)) return 0.0;
  if (seconds < 0) seconds = 0;
  return 1.0 / (1.0 + std::log(seconds + 1.0));
}

Selection select_best(const std::vector<CandidateProgram>& candidates,
                      const std::vector<std::string>& problem_names, const CandidateRunner& run) {
  Selection sel;
  const CandidateProgram* best = nullptr;
  double best_mean = -1.0;
  for (const auto& c : candidates) {
    ValidationRecord rec;
    rec.candidate_id = c.id;
    if (c.extraction_failed) {
      rec.loadable = false;
      rec.diagnostic = "no code block in response";
      sel.records.push_back(std::move(rec));
      continue;
    }
    double total = 0.0;
    try {
      for (std::size_t p = 0; p < problem_names.size(); ++p) {
        RunOutcome r = run(c, p);
        ProblemScore ps{problem_names[p], r.solved, r.seconds, validation_score(r.seconds, r.solved)};
        total += ps.score;
        rec.problems.push_back(ps);
      }
    } catch (const std::exception& e) {
      rec.loadable = false;
      rec.diagnostic = e.what();
      rec.problems.clear();
      sel.records.push_back(std::move(rec));
      continue;
    }
    rec.mean = problem_names.empty() ? 0.0 : total / static_cast<double>(problem_names.size());
    if (!best || rec.mean > best_mean || (rec.mean == best_mean && c.index < best->index)) {
      best = &c;
      best_mean = rec.mean;
    }
    sel.records.push_back(std::move(rec));
  }
  if (!best) throw NoLoadableCandidate("no candidate program could be loaded");
  sel.best = *best;
  return sel;
}

void write_validation_csv(const std::string& path, const std::vector<ValidationRecord>& records) {
  std::ostringstream o;
  o << "# progplan-validation v1\n";
  o << "candidate_id,problem,solved,time_s,score\n";
  o << std::setprecision(17);
  for (const auto& r : records)
    for (const auto& p : r.problems)
      o << r.candidate_id << "," << p.problem << "," << (p.solved ? 1 : 0) << "," << p.seconds
        << "," << p.score << "\n";
  write_file(path, o.str());
}

std::string_view to_string(ExecutionMode m) {
  return m == ExecutionMode::RolloutOnly ? "rollout" : "dual";
}

ExecutionMode select_mode(double policy_score, double value_score) {
  return policy_score > value_score ? ExecutionMode::RolloutOnly : ExecutionMode::DualQueue;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DegenerateInput("pearson: length mismatch");
  if (xs.size() < 2) throw DegenerateInput("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) throw DegenerateInput("pearson: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<std::size_t> training_order(const std::vector<Problem>& problems,
                                        const std::vector<std::string>& names) {
  std::vector<std::size_t> idx(problems.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (problems[a].objects.size() != problems[b].objects.size())
      return problems[a].objects.size() < problems[b].objects.size();
    return names[a] < names[b];
  });
  return idx;
}

}  // namespace progplan
