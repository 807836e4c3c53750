#pragma once

#include <signal.h>
#include <unistd.h>

#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "gridloop/io/net.hpp"

namespace gridloop::apps_sil {

using Json = nlohmann::json;

inline volatile sig_atomic_t g_terminate = 0;

/// Skeleton every bundled test app runs on: a datagram "device" socket
/// toward its vif (raw IP packets in, raw IP packets out) plus the
/// line-based control channel on stdio:
///   in:  go {...} | reading {...} | sync | quit
///   out: hello | idle | report {...} | setpoint {...}
/// Apps are purely reactive; "sync" answers "idle" only after the device
/// queue is drained, which is what makes lockstep scenario runs reproducible.
class AppShell {
public:
    AppShell() {
        if (const char* peer = ::getenv("VIF_PEER")) {
            device_ = io::UdpSocket::bind(io::Endpoint::loopback(0), "app-device");
            device_.connect(io::Endpoint::parse(peer));
            device_.send({});  // announce to the vif
        }
        if (const char* ip = ::getenv("VIF_IP")) my_ip_ = *io::parse_ipv4(ip);
        io::set_nonblocking(STDIN_FILENO);
        ::signal(SIGTERM, [](int) { g_terminate = 1; });  // cooperative shutdown
    }

    std::function<void(std::vector<uint8_t>)> on_packet;
    std::function<void(const Json&)> on_go;
    std::function<void(const Json&)> on_reading;
    std::function<void()> on_sync;  // runs after the device drain, before idle

    uint32_t my_ip() const { return my_ip_; }
    bool has_device() const { return device_.valid(); }

    void send_packet(std::span<const uint8_t> bytes) {
        if (device_.valid()) device_.send(bytes);
    }

    void say(const std::string& line) {
        std::string out = line + "\n";
        [[maybe_unused]] ssize_t n = ::write(STDOUT_FILENO, out.data(), out.size());
    }

    int run() {
        say("hello");
        while (!quit_ && !g_terminate) {
            io::Poller poller;
            poller.watch_read(STDIN_FILENO);
            if (device_.valid()) poller.watch_read(device_.fd());
            for (int fd : poller.wait(200)) {
                if (device_.valid() && fd == device_.fd()) drain_device();
                if (fd == STDIN_FILENO && !read_control()) return 0;
            }
        }
        return 0;
    }

private:
    void drain_device() {
        while (auto dgram = device_.recv()) {
            if (dgram->data.empty()) continue;
            if (on_packet) on_packet(std::move(dgram->data));
        }
    }

    bool read_control() {
        char buf[4096];
        ssize_t n = ::read(STDIN_FILENO, buf, sizeof buf);
        if (n == 0) return false;  // supervisor closed us
        if (n < 0) return true;
        buffer_.append(buf, size_t(n));
        size_t pos;
        while ((pos = buffer_.find('\n')) != std::string::npos) {
            handle_line(buffer_.substr(0, pos));
            buffer_.erase(0, pos + 1);
            if (quit_) return false;
        }
        return true;
    }

    void handle_line(const std::string& line) {
        auto payload_of = [&](size_t keyword_len) {
            return Json::parse(line.substr(keyword_len), nullptr, false);
        };
        if (line == "sync") {
            if (device_.valid()) drain_device();
            if (on_sync) on_sync();
            say("idle");
        } else if (line.rfind("go ", 0) == 0) {
            if (on_go) on_go(payload_of(3));
        } else if (line.rfind("reading ", 0) == 0) {
            if (on_reading) on_reading(payload_of(8));
        } else if (line == "quit") {
            quit_ = true;
        }
    }

    io::UdpSocket device_;
    uint32_t my_ip_ = 0;
    std::string buffer_;
    bool quit_ = false;
};

}  // namespace gridloop::apps_sil
