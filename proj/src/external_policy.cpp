#include "discover/external_policy.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

extern char** environ;

namespace discover {

using nlohmann::json;

namespace {

auto state_json(Construction const& c) -> json
{
    json arr = json::array();
    if (c.kind() == ConstructionKind::StepFunction) {
        for (double h : c.heights()) {
            arr.push_back(h);
        }
    } else {
        for (auto const& circle : c.circles()) {
            arr.push_back({circle.x, circle.y, circle.r});
        }
    }
    return arr;
}

} // namespace

ExternalPolicyHandle::ExternalPolicyHandle(std::vector<std::string> argv, std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout)
{
    if (argv_.empty()) {
        throw std::invalid_argument("external policy command is empty");
    }
    std::signal(SIGPIPE, SIG_IGN);
    start();
}

ExternalPolicyHandle::~ExternalPolicyHandle()
{
    stop();
}

void ExternalPolicyHandle::start()
{
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) {
        throw ExternalPolicyError(std::string("pipe: ") + std::strerror(errno));
    }
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw ExternalPolicyError(std::string("pipe: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

    std::vector<char*> args;
    for (auto& a : argv_) {
        args.push_back(a.data());
    }
    args.push_back(nullptr);

    int const rc = posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(in_pipe[0]);
    close(out_pipe[1]);
    if (rc != 0) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        pid_ = -1;
        throw ExternalPolicyError("cannot start " + argv_[0] + ": " + std::strerror(rc));
    }
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    buffer_.clear();

    send_line(json{{"type", "hello"}, {"version", kProtocolVersion}}.dump());
    json reply;
    try {
        reply = json::parse(read_line());
    } catch (json::parse_error const&) {
        stop();
        throw MalformedResponse("handshake reply is not JSON");
    } catch (...) {
        stop();
        throw;
    }
    if (!reply.is_object() || reply.value("type", "") != "hello" || reply.value("version", -1) != kProtocolVersion) {
        stop();
        throw MalformedResponse("unexpected handshake reply");
    }
}

void ExternalPolicyHandle::stop() noexcept
{
    if (to_child_ >= 0) {
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0) {
        kill(pid_, SIGKILL);
        int status = 0;
        waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

void ExternalPolicyHandle::send_line(std::string const& line)
{
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t const n = write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) { continue; }
            throw ExternalPolicyError(std::string("write to external policy failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

auto ExternalPolicyHandle::read_line() -> std::string
{
    auto const deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        auto const left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            throw ExternalTimeout("external policy did not answer within " + std::to_string(timeout_.count()) + " ms");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        int const ready = poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0) {
            if (errno == EINTR) { continue; }
            throw ExternalPolicyError(std::string("poll failed: ") + std::strerror(errno));
        }
        if (ready == 0) {
            continue;
        }
        char chunk[4096];
        ssize_t const n = read(from_child_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) { continue; }
            throw ExternalPolicyError(std::string("read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            throw ExternalPolicyError("external policy closed its output");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

auto ExternalPolicyHandle::propose(std::string_view env, Construction const& state, ProposalContext const& context)
    -> Construction
{
    std::lock_guard lock(mutex_);
    if (pid_ < 0) {
        start();
    }
    json request{{"type", "propose"},
                 {"env", std::string(env)},
                 {"state", state_json(state)},
                 {"best_reward", context.best_reward},
                 {"step", context.step}};
    std::string line;
    try {
        send_line(request.dump());
        line = read_line();
    } catch (ExternalPolicyError const&) {
        // the channel is out of sync or dead; the next request restarts it
        stop();
        throw;
    }
    json reply;
    try {
        reply = json::parse(line);
    } catch (json::parse_error const&) {
        throw MalformedResponse("malformed response: not JSON: " + line.substr(0, 80));
    }
    if (!reply.is_object() || reply.value("type", "") != "proposal" || !reply.contains("state")
        || !reply["state"].is_array()) {
        throw MalformedResponse("malformed response: not a proposal");
    }
    try {
        return decode_construction(reply["state"].dump());
    } catch (MalformedInput const& e) {
        throw MalformedResponse(std::string("malformed response: ") + e.what());
    }
}

auto ExternalProposalPolicy::propose(Environment const& env, Construction const& state,
                                     ProposalContext const& context, std::mt19937_64& /*rng*/) -> Proposal
{
    Proposal out;
    try {
        out.construction = handle_.propose(env.name(), state, context);
    } catch (std::exception const& e) {
        out.error = e.what();
    }
    return out;
}

} // namespace discover
