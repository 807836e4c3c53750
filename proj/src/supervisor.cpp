#include "gridloop/apps/supervisor.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace gridloop::apps {

namespace {

ExitReport report_from_status(int status) {
    ExitReport r;
    if (WIFEXITED(status)) {
        r.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        r.signaled = true;
        r.term_signal = WTERMSIG(status);
    }
    return r;
}

std::unique_ptr<ChildProcess> spawn_argv(const LaunchSpec& spec,
                                         const std::vector<std::string>& argv) {
    if (argv.empty()) throw SpawnError(spec.name, "empty command");

    int in_pipe[2] = {-1, -1}, out_pipe[2] = {-1, -1}, err_pipe[2] = {-1, -1};
    if (spec.pipe_stdio && (pipe2(in_pipe, O_CLOEXEC) < 0 || pipe2(out_pipe, O_CLOEXEC) < 0))
        throw SpawnError(spec.name, std::strerror(errno));
    if (pipe2(err_pipe, O_CLOEXEC) < 0) throw SpawnError(spec.name, std::strerror(errno));

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    pid_t pid = ::fork();
    if (pid < 0) throw SpawnError(spec.name, std::strerror(errno));
    if (pid == 0) {
        ::prctl(PR_SET_PDEATHSIG, SIGKILL);  // no orphans if the runner dies
        if (spec.pipe_stdio) {
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
        }
        for (auto [child_fd, parent_fd] : spec.inherit_fds) {
            if (::dup2(parent_fd, child_fd) < 0) _exit(126);
            int flags = ::fcntl(child_fd, F_GETFD);
            ::fcntl(child_fd, F_SETFD, flags & ~FD_CLOEXEC);
        }
        for (const auto& [k, v] : spec.env) ::setenv(k.c_str(), v.c_str(), 1);
        ::execvp(cargv[0], cargv.data());
        int err = errno;  // exec failed: report it through the CLOEXEC pipe
        [[maybe_unused]] ssize_t n = ::write(err_pipe[1], &err, sizeof err);
        _exit(127);
    }

    ::close(err_pipe[1]);
    if (spec.pipe_stdio) {
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
    }
    int exec_errno = 0;
    if (::read(err_pipe[0], &exec_errno, sizeof exec_errno) == sizeof(exec_errno)) {
        ::close(err_pipe[0]);
        if (spec.pipe_stdio) {
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
        }
        ::waitpid(pid, nullptr, 0);
        throw SpawnError(spec.name, argv[0] + ": " + std::strerror(exec_errno));
    }
    ::close(err_pipe[0]);

    auto child = std::make_unique<ChildProcess>();
    child->pid = pid;
    child->name = spec.name;
    if (spec.pipe_stdio) {
        io::set_nonblocking(in_pipe[1]);
        io::set_nonblocking(out_pipe[0]);
        child->to_child.reset(in_pipe[1]);
        child->from_child.reset(out_pipe[0]);
    }
    return child;
}

}  // namespace

std::unique_ptr<ChildProcess> ProcessLauncher::spawn(const LaunchSpec& spec) {
    return spawn_argv(spec, spec.argv);
}

std::unique_ptr<ChildProcess> CommandLauncher::spawn(const LaunchSpec& spec) {
    std::vector<std::string> argv = prefix_;
    argv.insert(argv.end(), spec.argv.begin(), spec.argv.end());
    return spawn_argv(spec, argv);
}

Supervisor::Supervisor(std::unique_ptr<Launcher> launcher)
    : launcher_(launcher ? std::move(launcher) : std::make_unique<ProcessLauncher>()) {}

Supervisor::~Supervisor() {
    try {
        stop_all(500);
    } catch (...) {
    }
}

ChildProcess& Supervisor::start(const LaunchSpec& spec) {
    for (const auto& c : children_)
        if (c->name == spec.name && !c->exited)
            throw SpawnError(spec.name, "an app with this name is already running");
    children_.push_back(launcher_->spawn(spec));
    return *children_.back();
}

void Supervisor::reap() {
    for (auto& c : children_) {
        if (c->exited || c->pid < 0) continue;
        int status = 0;
        pid_t r = ::waitpid(c->pid, &status, WNOHANG);
        if (r == c->pid) c->exited = report_from_status(status);
    }
}

bool Supervisor::alive(const ChildProcess& child) const {
    return child.pid >= 0 && !child.exited;
}

size_t Supervisor::live_count() {
    reap();
    size_t n = 0;
    for (const auto& c : children_)
        if (!c->exited && c->pid >= 0) ++n;
    return n;
}

ExitReport Supervisor::stop(ChildProcess& child, int grace_ms) {
    reap();
    if (child.exited) {
        ExitReport r = *child.exited;
        r.how = ExitReport::How::AlreadyExited;
        return r;
    }
    ::kill(child.pid, SIGTERM);
    auto deadline = io::deadline_in(grace_ms);
    while (io::Clock::now() < deadline) {
        int status = 0;
        if (::waitpid(child.pid, &status, WNOHANG) == child.pid) {
            child.exited = report_from_status(status);
            child.exited->how = ExitReport::How::Graceful;
            return *child.exited;
        }
        ::usleep(2000);
    }
    ::kill(child.pid, SIGKILL);
    int status = 0;
    ::waitpid(child.pid, &status, 0);
    child.exited = report_from_status(status);
    child.exited->how = ExitReport::How::HardKilled;
    return *child.exited;
}

void Supervisor::stop_all(int grace_ms) {
    for (auto& c : children_)
        if (!c->exited && c->pid >= 0) stop(*c, grace_ms);
}

void Supervisor::send_line(ChildProcess& child, const std::string& line) {
    if (!child.to_child.valid()) throw DeadAppError(child.name);
    std::string out = line + "\n";
    size_t off = 0;
    auto deadline = io::deadline_in(5000);
    while (off < out.size()) {
        ssize_t n = ::write(child.to_child.get(), out.data() + off, out.size() - off);
        if (n > 0) {
            off += size_t(n);
            continue;
        }
        if (n < 0 && errno == EPIPE) throw DeadAppError(child.name);
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) io::throw_errno("write control");
        if (io::Clock::now() > deadline) throw DeadAppError(child.name);
        ::usleep(1000);
    }
}

std::optional<std::string> Supervisor::read_line(ChildProcess& child, io::Deadline deadline) {
    if (!child.from_child.valid()) throw DeadAppError(child.name);
    while (true) {
        if (auto pos = child.line_buffer.find('\n'); pos != std::string::npos) {
            std::string line = child.line_buffer.substr(0, pos);
            child.line_buffer.erase(0, pos + 1);
            return line;
        }
        char buf[4096];
        ssize_t n = ::read(child.from_child.get(), buf, sizeof buf);
        if (n > 0) {
            child.line_buffer.append(buf, size_t(n));
            continue;
        }
        if (n == 0) throw DeadAppError(child.name);  // EOF: child went away
        if (errno != EAGAIN && errno != EWOULDBLOCK) io::throw_errno("read control");
        if (!io::wait_readable(child.from_child.get(), deadline)) return std::nullopt;
    }
}

}  // namespace gridloop::apps
