#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridloop::io {

struct IoError : std::runtime_error {
    IoError(const std::string& what, int err);
    int err;
};

[[noreturn]] void throw_errno(const std::string& what);

using Clock = std::chrono::steady_clock;
using Deadline = Clock::time_point;

inline Deadline deadline_in(int ms) { return Clock::now() + std::chrono::milliseconds(ms); }

/// IPv4 address + port. The whole test bed runs on IPv4 endpoints; packets
/// crossing the tunnel may still be IPv6.
struct Endpoint {
    uint32_t ip = 0;  // host byte order
    uint16_t port = 0;

    static Endpoint parse(const std::string& text);  // "a.b.c.d:port"
    static Endpoint loopback(uint16_t port) { return Endpoint{0x7f000001u, port}; }
    std::string to_string() const;

    bool operator==(const Endpoint&) const = default;
    bool operator<(const Endpoint& o) const {
        return ip != o.ip ? ip < o.ip : port < o.port;
    }
};

std::string format_ipv4(uint32_t ip);
std::optional<uint32_t> parse_ipv4(const std::string& text);

/// Which kind of socket a component opened, and for what. Tests use the
/// per-process inventory to prove the vif<->vif-sim path never opens a
/// stream socket (the TCP-meltdown rule).
enum class SocketKind { Datagram, Stream, StreamListener };

struct SocketRecord {
    SocketKind kind;
    std::string purpose;
};

class SocketInventory {
public:
    static void record(SocketKind kind, const std::string& purpose);
    static const std::vector<SocketRecord>& entries();
    static size_t count(SocketKind kind, const std::string& purpose_prefix = "");
    static std::string to_json();
};

class FdHandle {
public:
    FdHandle() = default;
    explicit FdHandle(int fd) : fd_(fd) {}
    FdHandle(FdHandle&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    FdHandle& operator=(FdHandle&& o) noexcept;
    ~FdHandle();

    int get() const { return fd_; }
    int release() { return std::exchange(fd_, -1); }
    bool valid() const { return fd_ >= 0; }
    void reset(int fd = -1);

private:
    int fd_ = -1;
};

void set_nonblocking(int fd);
void set_cloexec(int fd, bool on);

enum class SendResult { Sent, WouldBlock, Refused };

/// Nonblocking UDP socket. recv() distinguishes "nothing to read" (nullopt)
/// from a zero-length datagram (a tunnel hello).
class UdpSocket {
public:
    UdpSocket() = default;
    static UdpSocket bind(Endpoint local, const std::string& purpose);
    static UdpSocket adopt(int fd, const std::string& purpose);

    void connect(Endpoint peer);
    SendResult send(std::span<const uint8_t> data);
    SendResult send_to(std::span<const uint8_t> data, Endpoint peer);

    struct Datagram {
        std::vector<uint8_t> data;
        Endpoint from;
    };
    std::optional<Datagram> recv();

    Endpoint local_endpoint() const;
    void set_recv_buffer(int bytes);
    int fd() const { return fd_.get(); }
    bool valid() const { return fd_.valid(); }

private:
    FdHandle fd_;
};

class TcpStream {
public:
    TcpStream() = default;
    static TcpStream connect(Endpoint peer, Deadline deadline, const std::string& purpose);
    static TcpStream adopt(int fd, const std::string& purpose);

    // Nonblocking read: nullopt = would block, 0 = peer closed.
    std::optional<size_t> read(std::span<uint8_t> buf);
    void write_all(std::span<const uint8_t> data, Deadline deadline);

    int fd() const { return fd_.get(); }
    bool valid() const { return fd_.valid(); }
    void close() { fd_.reset(); }

private:
    FdHandle fd_;
};

class TcpListener {
public:
    TcpListener() = default;
    static TcpListener bind(Endpoint local, const std::string& purpose);

    std::optional<TcpStream> accept(const std::string& purpose);
    Endpoint local_endpoint() const;
    int fd() const { return fd_.get(); }
    bool valid() const { return fd_.valid(); }

private:
    FdHandle fd_;
};

/// poll(2) wrapper for the cooperative single-threaded loops used across the
/// kernel, the vif and the vif-sim.
class Poller {
public:
    void clear();
    void watch_read(int fd);
    // Returns fds that became readable; empty on timeout.
    std::vector<int> wait(int timeout_ms);

private:
    std::vector<int> fds_;
};

/// Blocks until fd is readable or the deadline passes. Returns false on timeout.
bool wait_readable(int fd, Deadline deadline);

}  // namespace gridloop::io
