#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridloop/io/net.hpp"

namespace gridloop::apps {

struct SpawnError : std::runtime_error {
    SpawnError(const std::string& name, const std::string& why)
        : std::runtime_error("failed to start \"" + name + "\": " + why), app(name) {}
    std::string app;
};

struct DeadAppError : std::runtime_error {
    explicit DeadAppError(const std::string& name)
        : std::runtime_error("app \"" + name + "\" is dead"), app(name) {}
    std::string app;
};

struct LaunchSpec {
    std::string name;
    std::vector<std::string> argv;
    std::map<std::string, std::string> env;
    // child_fd <- parent_fd, duplicated into the child before exec
    std::vector<std::pair<int, int>> inherit_fds;
    bool pipe_stdio = true;  // control channel on the child's stdin/stdout
};

struct ExitReport {
    enum class How { Graceful, HardKilled, AlreadyExited };
    How how = How::Graceful;
    int exit_code = 0;
    bool signaled = false;
    int term_signal = 0;
};

class ChildProcess {
public:
    int pid = -1;
    io::FdHandle to_child;     // child stdin
    io::FdHandle from_child;   // child stdout
    std::string name;
    std::optional<ExitReport> exited;
    std::string line_buffer;
};

/// How processes come to life. The default launcher spawns plain OS
/// processes; a command launcher wraps the argv in a user-supplied prefix
/// (a container runtime, a namespace wrapper).
class Launcher {
public:
    virtual ~Launcher() = default;
    virtual std::unique_ptr<ChildProcess> spawn(const LaunchSpec& spec) = 0;
};

class ProcessLauncher : public Launcher {
public:
    std::unique_ptr<ChildProcess> spawn(const LaunchSpec& spec) override;
};

class CommandLauncher : public Launcher {
public:
    explicit CommandLauncher(std::vector<std::string> prefix) : prefix_(std::move(prefix)) {}
    std::unique_ptr<ChildProcess> spawn(const LaunchSpec& spec) override;

private:
    std::vector<std::string> prefix_;
};

/// Owns every child of a scenario: start, line-based control I/O, graceful
/// stop (polite signal, then hard kill after the grace period), and the
/// no-orphans guarantee at scenario end.
class Supervisor {
public:
    explicit Supervisor(std::unique_ptr<Launcher> launcher = nullptr);
    ~Supervisor();

    ChildProcess& start(const LaunchSpec& spec);
    ExitReport stop(ChildProcess& child, int grace_ms);
    void stop_all(int grace_ms = 2000);

    void send_line(ChildProcess& child, const std::string& line);
    // Blocks (poll-based) until a line arrives or the deadline passes.
    std::optional<std::string> read_line(ChildProcess& child, io::Deadline deadline);

    void reap();  // nonblocking waitpid sweep
    bool alive(const ChildProcess& child) const;
    size_t live_count();
    const std::vector<std::unique_ptr<ChildProcess>>& children() const { return children_; }

private:
    std::unique_ptr<Launcher> launcher_;
    std::vector<std::unique_ptr<ChildProcess>> children_;
};

}  // namespace gridloop::apps
