#include "progplan/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <thread>

#include <json.hpp>

extern char** environ;

namespace progplan {

namespace {

using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kMaxLine = 64u << 20;

int remaining_ms(Clock::time_point until) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(until - Clock::now()).count();
  if (left <= 0) return 0;
  return left > 1'000'000'000 ? 1'000'000'000 : static_cast<int>(left);
}

ordered_json atoms_json(const std::vector<Atom>& atoms) {
  ordered_json arr = ordered_json::array();
  for (const auto& a : atoms) {
    ordered_json t = ordered_json::array();
    t.push_back(a.predicate);
    for (const auto& x : a.args) t.push_back(x);
    arr.push_back(std::move(t));
  }
  return arr;
}

}  // namespace

HostOptions default_host_options() {
  HostOptions o;
  if (const char* env = std::getenv("PROGPLAN_HOST"); env && *env) {
    std::istringstream words(env);
    std::string w;
    while (words >> w) o.command.push_back(w);
  }
  if (o.command.empty()) o.command = {"progplan-host"};
  return o;
}

std::unique_ptr<ProgramHandle> ProgramHandle::spawn(const HostOptions& options) {
  if (options.command.empty()) throw SpawnError("empty host command");
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
    throw SpawnError(std::string("socketpair: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);

  std::vector<char*> argv;
  for (const auto& a : options.command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = -1;
  int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(sv[1]);
  if (rc != 0) {
    ::close(sv[0]);
    throw SpawnError("cannot start program host '" + options.command[0] + "': " +
                     std::strerror(rc));
  }
  return std::unique_ptr<ProgramHandle>(new ProgramHandle(pid, sv[0], options));
}

ProgramHandle::ProgramHandle(int pid, int fd, HostOptions options)
    : pid_(pid), fd_(fd), options_(std::move(options)) {}

ProgramHandle::~ProgramHandle() { close(); }

Clock::time_point ProgramHandle::until(std::chrono::milliseconds timeout) const {
  auto t = Clock::now() + timeout;
  if (options_.deadline && *options_.deadline < t) t = *options_.deadline;
  return t;
}

void ProgramHandle::kill_process() {
  alive_ = false;
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

void ProgramHandle::close() {
  if (pid_ <= 0) return;
  if (alive_ && fd_ >= 0) send_line(R"({"op":"quit"})", Clock::now() + std::chrono::milliseconds(200));
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  alive_ = false;
  // Give the host a moment to exit on its own before killing it.
  for (int i = 0; i < 20; ++i) {
    if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
      pid_ = -1;
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  kill_process();
}

bool ProgramHandle::send_line(const std::string& line, Clock::time_point deadline) {
  std::string data = line + "\n";
  std::size_t sent = 0;
  while (sent < data.size()) {
    pollfd p{fd_, POLLOUT, 0};
    int pr = ::poll(&p, 1, remaining_ms(deadline));
    if (pr < 0 && errno == EINTR) continue;
    if (pr <= 0 || (p.revents & (POLLERR | POLLHUP | POLLNVAL))) return false;
    ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> ProgramHandle::read_line(Clock::time_point deadline) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (buffer_.size() > kMaxLine) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    int pr = ::poll(&p, 1, remaining_ms(deadline));
    if (pr < 0 && errno == EINTR) continue;
    if (pr <= 0) return std::nullopt;
    char chunk[65536];
    ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
    if (n <= 0) return std::nullopt;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::optional<std::string> ProgramHandle::exchange(const std::string& line,
                                                   std::chrono::milliseconds timeout) {
  if (!alive_) return std::nullopt;
  ++requests_;
  auto deadline = until(timeout);
  if (!send_line(line, deadline)) {
    kill_process();
    return std::nullopt;
  }
  auto reply = read_line(deadline);
  if (!reply) kill_process();
  return reply;
}

void ProgramHandle::handshake(ProgramKind kind, const std::string& domain_text,
                              const std::string& problem_text,
                              const std::string& program_source) {
  kind_ = kind;
  ordered_json msg;
  msg["op"] = "init";
  msg["kind"] = std::string(to_string(kind));
  msg["domain"] = domain_text;
  msg["problem"] = problem_text;
  msg["program"] = program_source;
  auto reply = exchange(msg.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                        options_.handshake_timeout);
  if (!reply) throw HandshakeError("program host exited or timed out during handshake");
  auto j = nlohmann::json::parse(*reply, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("ok") || !j["ok"].is_boolean()) {
    kill_process();
    throw HandshakeError("malformed handshake reply: " + reply->substr(0, 200));
  }
  if (!j["ok"].get<bool>()) {
    std::string err = j.contains("error") && j["error"].is_string() ? j["error"].get<std::string>()
                                                                      : "program failed to load";
    close();
    throw HandshakeError(err);
  }
}

ValueReply parse_value_reply(const std::string& line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return EvalError{"malformed reply"};
  if (auto it = j.find("value"); it != j.end()) {
    if (it->is_number()) {
      double v = it->get<double>();
      if (std::isnan(v)) return EvalError{"nan"};
      if (std::isinf(v)) return Infinite{};
      return v;
    }
    if (it->is_string()) {
      std::string s = it->get<std::string>();
      if (s == "inf" || s == "+inf" || s == "infinity" || s == "Infinity" || s == "-inf")
        return Infinite{};
      return EvalError{"non-numeric value '" + s + "'"};
    }
    return EvalError{"non-numeric value"};
  }
  if (auto it = j.find("error"); it != j.end())
    return EvalError{it->is_string() ? it->get<std::string>() : it->dump()};
  return EvalError{"reply has neither value nor error"};
}

PolicyReply parse_policy_reply(const std::string& line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return EvalError{"malformed reply"};
  if (auto it = j.find("index"); it != j.end()) {
    if (it->is_number_integer()) return it->get<std::int64_t>();
    return EvalError{"non-integer index"};
  }
  if (auto it = j.find("error"); it != j.end())
    return EvalError{it->is_string() ? it->get<std::string>() : it->dump()};
  return EvalError{"reply has neither index nor error"};
}

ValueReply ProgramHandle::evaluate(const std::vector<Atom>& state) {
  if (!alive_) return EvalError{"program host is dead"};
  ordered_json msg;
  msg["op"] = "evaluate";
  msg["state"] = atoms_json(state);
  auto reply = exchange(msg.dump(), options_.call_timeout);
  if (!reply) return EvalError{"program host died or timed out"};
  ValueReply r = parse_value_reply(*reply);
  if (std::holds_alternative<EvalError>(r)) ++malformed_;
  return r;
}

PolicyReply ProgramHandle::choose(const std::vector<Atom>& state,
                                  const std::vector<PlanStep>& applicable) {
  if (!alive_) return EvalError{"program host is dead"};
  ordered_json msg;
  msg["op"] = "choose";
  msg["state"] = atoms_json(state);
  ordered_json acts = ordered_json::array();
  for (const auto& a : applicable) {
    ordered_json t = ordered_json::array();
    t.push_back(a.schema);
    for (const auto& x : a.args) t.push_back(x);
    acts.push_back(std::move(t));
  }
  msg["applicable"] = std::move(acts);
  auto reply = exchange(msg.dump(), options_.call_timeout);
  if (!reply) return EvalError{"program host died or timed out"};
  PolicyReply r = parse_policy_reply(*reply);
  if (std::holds_alternative<EvalError>(r)) ++malformed_;
  return r;
}

std::shared_ptr<ProgramHandle> open_program(const std::string& source, ProgramKind kind,
                                            const Task& task, const HostOptions& options) {
  std::shared_ptr<ProgramHandle> h = ProgramHandle::spawn(options);
  h->handshake(kind, print_domain(task.domain()), print_problem(task.problem()), source);
  return h;
}

ValueReply ExternalValue::evaluate(const Task& task, const State& s) {
  return handle_->evaluate(task.atoms_of(s));
}

PolicyReply ExternalPolicy::choose(const Task& task, const State& s,
                                   std::span<const GroundAction> applicable) {
  std::vector<PlanStep> steps;
  steps.reserve(applicable.size());
  for (const auto& a : applicable) steps.push_back(task.step(a));
  return handle_->choose(task.atoms_of(s), steps);
}

}  // namespace progplan
