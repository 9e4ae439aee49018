#ifndef PROGPLAN_EXTERNAL_HPP
#define PROGPLAN_EXTERNAL_HPP

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "progplan/program.hpp"

namespace progplan {

class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The host rejected the program at load time; what() carries its diagnostic.
class HandshakeError : public std::runtime_error {
 public:
  explicit HandshakeError(const std::string& diagnostic)
      : std::runtime_error(diagnostic), diagnostic_(diagnostic) {}
  const std::string& diagnostic() const { return diagnostic_; }

 private:
  std::string diagnostic_;
};

struct HostOptions {
  /// argv of the program host. Defaults to $PROGPLAN_HOST split on spaces,
  /// or "progplan-host" looked up on PATH.
  std::vector<std::string> command;
  std::chrono::milliseconds call_timeout{10'000};
  std::chrono::milliseconds handshake_timeout{30'000};
  /// No call waits past this instant, whatever call_timeout says.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

HostOptions default_host_options();

/// A live program-host subprocess speaking the line protocol over a socket
/// pair bound to its stdin/stdout. Requests are strictly sequential.
///
/// A handle dies on EOF, write failure or timeout; the process is killed and
/// every later request fails fast. A malformed reply fails only that request.
class ProgramHandle {
 public:
  static std::unique_ptr<ProgramHandle> spawn(const HostOptions& options);

  ProgramHandle(const ProgramHandle&) = delete;
  ProgramHandle& operator=(const ProgramHandle&) = delete;
  ~ProgramHandle();

  /// Sends init; throws HandshakeError unless the host replies {"ok":true}.
  void handshake(ProgramKind kind, const std::string& domain_text,
                 const std::string& problem_text, const std::string& program_source);

  ValueReply evaluate(const std::vector<Atom>& state);
  PolicyReply choose(const std::vector<Atom>& state, const std::vector<PlanStep>& applicable);

  /// Sends quit and reaps the process.
  void close();

  bool alive() const { return alive_; }
  int pid() const { return pid_; }
  ProgramKind kind() const { return kind_; }
  std::uint64_t requests() const { return requests_; }
  std::uint64_t malformed_replies() const { return malformed_; }
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> d) { options_.deadline = d; }

  /// Raw exchange, exposed for protocol tests. nullopt when the handle died.
  std::optional<std::string> exchange(const std::string& line, std::chrono::milliseconds timeout);

 private:
  ProgramHandle(int pid, int fd, HostOptions options);
  bool send_line(const std::string& line, std::chrono::steady_clock::time_point until);
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point until);
  void kill_process();
  std::chrono::steady_clock::time_point until(std::chrono::milliseconds timeout) const;

  int pid_;
  int fd_;
  HostOptions options_;
  bool alive_{true};
  ProgramKind kind_{ProgramKind::Value};
  std::string buffer_;
  std::uint64_t requests_{0};
  std::uint64_t malformed_{0};
};

/// Spawns a host and performs the handshake for `task`.
std::shared_ptr<ProgramHandle> open_program(const std::string& source, ProgramKind kind,
                                            const Task& task, const HostOptions& options);

class ExternalValue final : public ValueFunction {
 public:
  explicit ExternalValue(std::shared_ptr<ProgramHandle> handle) : handle_(std::move(handle)) {}
  ValueReply evaluate(const Task& task, const State& s) override;
  std::string describe() const override { return "external"; }
  ProgramHandle& handle() { return *handle_; }

 private:
  std::shared_ptr<ProgramHandle> handle_;
};

class ExternalPolicy final : public Policy {
 public:
  explicit ExternalPolicy(std::shared_ptr<ProgramHandle> handle) : handle_(std::move(handle)) {}
  PolicyReply choose(const Task& task, const State& s,
                     std::span<const GroundAction> applicable) override;
  std::string describe() const override { return "external"; }
  ProgramHandle& handle() { return *handle_; }

 private:
  std::shared_ptr<ProgramHandle> handle_;
};

/// Parses one reply line of the value protocol. Exposed for fuzz tests.
ValueReply parse_value_reply(const std::string& line);
PolicyReply parse_policy_reply(const std::string& line);

}  // namespace progplan

#endif  // PROGPLAN_EXTERNAL_HPP
