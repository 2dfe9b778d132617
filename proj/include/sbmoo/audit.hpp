#pragma once

// Audit server for optimisers living in another process. Line-delimited JSON
// over the child's stdin/stdout:
//   harness -> child  {"type":"init","problem":..,"d":..,"budget":..,"pop":..}
//   child -> harness  {"type":"eval","x":[...]}
//   harness -> child  {"type":"objectives","f":[g1,g2],"remaining":n}
//                     {"type":"budget_exhausted"}
//   child -> harness  {"type":"final_population","X":[[...],...]}
//   harness -> child  {"type":"done"}
// The harness owns the objective RNG. The child's stderr is passed through.

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "sbmoo/errors.hpp"
#include "sbmoo/harness.hpp"
#include "sbmoo/trace_io.hpp"

namespace sbmoo {

struct AuditConfig {
    std::string problem = "f1";
    std::size_t d = 2;
    std::size_t budget = 30000;
    std::size_t pop = 100;
    std::size_t run_index = 0;
    std::uint64_t master_seed = 0;
    std::string algorithm = "external";
    std::size_t max_refusals = 1000;  // evals after budget_exhausted before the session is aborted
};

/// Protocol state machine for one child. Transport-free so it can be driven
/// directly in tests.
class AuditSession {
public:
    enum class State { AwaitingEval, Finished };

    explicit AuditSession(AuditConfig cfg)
        : cfg_(std::move(cfg)),
          spec_(ProblemSpec::from_id(cfg_.problem, cfg_.d)),
          seed_(run_seed(cfg_.master_seed, cfg_.problem, cfg_.d, cfg_.run_index)),
          eval_(spec_, cfg_.budget, RngStream(seed_, streams::kObjectives)) {
        if (cfg_.budget == 0) throw ConfigError("audit budget must be >= 1");
        if (cfg_.pop == 0) throw ConfigError("audit pop must be >= 1");
    }

    std::string init_message() const {
        nlohmann::ordered_json j;
        j["type"] = "init";
        j["problem"] = cfg_.problem;
        j["d"] = cfg_.d;
        j["budget"] = cfg_.budget;
        j["pop"] = cfg_.pop;
        return j.dump();
    }

    /// Processes one child line and returns the reply. Throws ProtocolError
    /// on a violation; the session is then unusable.
    std::string handle(std::string_view line) {
        if (state_ == State::Finished) throw ProtocolError("message after final_population");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(std::string("malformed JSON from child: ") + e.what());
        }
        if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
            throw ProtocolError("child message without a string \"type\"");
        const auto type = j["type"].get<std::string>();
        if (type == "eval") return on_eval(j);
        if (type == "final_population") return on_final(j);
        throw ProtocolError("unexpected message type '" + type + "'");
    }

    State state() const noexcept { return state_; }
    std::size_t evaluations() const noexcept { return eval_.used(); }
    std::size_t remaining() const noexcept { return eval_.remaining(); }
    std::size_t refusals() const noexcept { return refusals_; }

    /// Complete only when the child used the whole budget and returned a
    /// valid final population.
    RunTrace trace() const {
        RunTrace t;
        t.problem_id = cfg_.problem;
        t.algorithm_id = cfg_.algorithm;
        t.d = cfg_.d;
        t.run_index = cfg_.run_index;
        t.seed = seed_;
        t.budget = cfg_.budget;
        t.pop = cfg_.pop;
        t.archive = eval_.archive();
        t.xl = final_ ? *final_ : PointSet(cfg_.d);
        t.complete = state_ == State::Finished && eval_.used() == cfg_.budget;
        derive_xp(t);
        return t;
    }

private:
    std::vector<double> parse_x(const nlohmann::json& v, const std::string& what) const {
        if (!v.is_array() || v.size() != cfg_.d)
            throw ProtocolError(what + " must be an array of " + std::to_string(cfg_.d) + " numbers");
        std::vector<double> x;
        x.reserve(cfg_.d);
        for (const auto& c : v) {
            if (!c.is_number()) throw ProtocolError(what + " has a non-numeric coordinate");
            const double xi = c.get<double>();
            if (!(xi >= 0.0 && xi <= 1.0)) throw ProtocolError(what + " leaves [0,1]^d");
            x.push_back(xi == 0.0 ? 0.0 : xi);
        }
        return x;
    }

    std::string on_eval(const nlohmann::json& j) {
        if (!j.contains("x")) throw ProtocolError("eval without x");
        const auto x = parse_x(j["x"], "eval x");
        if (eval_.remaining() == 0) {
            if (++refusals_ > cfg_.max_refusals)
                throw ProtocolError("child kept requesting evaluations after budget_exhausted");
            return R"({"type":"budget_exhausted"})";
        }
        const auto f = eval_(x);
        seen_.insert(x);
        std::string out = R"({"type":"objectives","f":[)";
        detail::append_double(out, f.g1);
        out += ',';
        detail::append_double(out, f.g2);
        out += R"(],"remaining":)";
        out += std::to_string(eval_.remaining());
        out += '}';
        return out;
    }

    std::string on_final(const nlohmann::json& j) {
        if (!j.contains("X") || !j["X"].is_array()) throw ProtocolError("final_population without an X array");
        const auto& arr = j["X"];
        if (arr.size() != cfg_.pop)
            throw ProtocolError("final_population has " + std::to_string(arr.size()) + " members, expected pop = " +
                                std::to_string(cfg_.pop));
        PointSet xl(cfg_.d);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto x = parse_x(arr[i], "final_population member " + std::to_string(i));
            if (!seen_.count(x)) throw ProtocolError("final_population member " + std::to_string(i) + " was never evaluated");
            xl.push_back(x);
        }
        final_ = std::move(xl);
        state_ = State::Finished;
        return R"({"type":"done"})";
    }

    AuditConfig cfg_;
    ProblemSpec spec_;
    std::uint64_t seed_;
    BudgetedEvaluator eval_;
    std::unordered_set<std::vector<double>, detail::VecHash> seen_;
    std::optional<PointSet> final_;
    State state_ = State::AwaitingEval;
    std::size_t refusals_ = 0;
};

struct AuditOutcome {
    RunTrace trace;
    bool protocol_ok = true;
    std::string diagnostic;  // empty on a clean session
    int exit_status = 0;     // child's exit code, or 128 + signal
};

/// Launches `command` through /bin/sh, speaks the protocol, and returns the
/// recorded trace. A crash or early EOF yields an incomplete trace; a
/// protocol violation aborts the session.
inline AuditOutcome run_audit(const std::string& command, const AuditConfig& cfg) {
    AuditSession session(cfg);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
    if (pipe(from_child) != 0) {
        close(to_child[0]);
        close(to_child[1]);
        throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
    }
    std::fflush(nullptr);
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    fcntl(from_child[0], F_SETFD, FD_CLOEXEC);

    // a dead child must surface as a write error, not kill the harness
    struct sigaction ignore {}, previous {};
    ignore.sa_handler = SIG_IGN;
    sigemptyset(&ignore.sa_mask);
    sigaction(SIGPIPE, &ignore, &previous);

    AuditOutcome out;
    auto send = [&](const std::string& msg) {
        std::string line = msg + "\n";
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            const ssize_t n = write(to_child[1], p, left);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        return true;
    };

    FILE* in = fdopen(from_child[0], "r");
    char* buf = nullptr;
    std::size_t cap = 0;
    bool wrote = send(session.init_message());
    while (wrote && session.state() != AuditSession::State::Finished) {
        const ssize_t n = getline(&buf, &cap, in);
        if (n < 0) {
            out.diagnostic = "child closed its stdout after " + std::to_string(session.evaluations()) + " evaluations";
            break;
        }
        std::string_view line(buf, static_cast<std::size_t>(n));
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
        if (line.empty()) continue;
        try {
            wrote = send(session.handle(line));
        } catch (const ProtocolError& e) {
            out.protocol_ok = false;
            out.diagnostic = std::string("protocol violation: ") + e.what();
            break;
        }
    }
    if (!wrote && out.diagnostic.empty())
        out.diagnostic = "child stopped reading after " + std::to_string(session.evaluations()) + " evaluations";
    std::free(buf);
    close(to_child[1]);
    if (!out.protocol_ok) kill(pid, SIGTERM);
    fclose(in);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    sigaction(SIGPIPE, &previous, nullptr);
    if (WIFEXITED(status)) out.exit_status = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) out.exit_status = 128 + WTERMSIG(status);
    if (out.diagnostic.empty() && out.exit_status != 0)
        out.diagnostic = "child exited with status " + std::to_string(out.exit_status);

    out.trace = session.trace();
    return out;
}

}  // namespace sbmoo
