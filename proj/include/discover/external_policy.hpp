#ifndef DISCOVER_EXTERNAL_POLICY_HPP
#define DISCOVER_EXTERNAL_POLICY_HPP

#include <chrono>
#include <mutex>
#include <stdexcept>
#include <string>
#include <sys/types.h>
#include <vector>

#include "discover/core.hpp"
#include "discover/policy.hpp"

namespace discover {

class ExternalPolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ExternalTimeout : public ExternalPolicyError {
public:
    using ExternalPolicyError::ExternalPolicyError;
};

class MalformedResponse : public ExternalPolicyError {
public:
    using ExternalPolicyError::ExternalPolicyError;
};

inline constexpr int kProtocolVersion = 1;
inline constexpr std::chrono::milliseconds kDefaultExternalTimeout{30'000};

// Line-delimited JSON channel to a child process.
//
//   -> {"type":"hello","version":1}
//   <- {"type":"hello","version":1}
//   -> {"type":"propose","env":"ac1","state":[...],"best_reward":0.5,"step":3}
//   <- {"type":"proposal","state":[...]}
//
// Step-function states are number arrays, circle packings arrays of
// [x, y, r]. Requests on one handle are serialized. A timed-out child is
// killed and restarted before the next request.
class ExternalPolicyHandle {
public:
    ExternalPolicyHandle(std::vector<std::string> argv, std::chrono::milliseconds timeout = kDefaultExternalTimeout);
    ~ExternalPolicyHandle();

    ExternalPolicyHandle(ExternalPolicyHandle const&) = delete;
    auto operator=(ExternalPolicyHandle const&) -> ExternalPolicyHandle& = delete;

    // Throws ExternalTimeout, MalformedResponse, InvariantViolation, or
    // ExternalPolicyError for a dead channel.
    auto propose(std::string_view env, Construction const& state, ProposalContext const& context) -> Construction;

    [[nodiscard]] auto timeout() const noexcept { return timeout_; }

private:
    void start();
    void stop() noexcept;
    void send_line(std::string const& line);
    auto read_line() -> std::string;

    std::vector<std::string> argv_;
    std::chrono::milliseconds timeout_;
    std::mutex mutex_;
    pid_t pid_{-1};
    int to_child_{-1};
    int from_child_{-1};
    std::string buffer_;
};

// Adapts a handle to the engine: untrainable, serial, failures become
// empty proposals (reward 0).
class ExternalProposalPolicy final : public ProposalPolicy {
public:
    explicit ExternalProposalPolicy(ExternalPolicyHandle& handle) : handle_(handle) {}

    auto propose(Environment const& env, Construction const& state, ProposalContext const& context,
                 std::mt19937_64& rng) -> Proposal override;
    [[nodiscard]] auto concurrent() const -> bool override { return false; }

private:
    ExternalPolicyHandle& handle_;
};

} // namespace discover

#endif
