#include "gridloop/io/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>

namespace gridloop::io {

IoError::IoError(const std::string& what, int e)
    : std::runtime_error(what + ": " + std::strerror(e)), err(e) {}

void throw_errno(const std::string& what) { throw IoError(what, errno); }

std::optional<uint32_t> parse_ipv4(const std::string& text) {
    uint32_t ip = 0;
    int part = 0;
    const char* p = text.c_str();
    const char* end = p + text.size();
    for (; part < 4; ++part) {
        unsigned value = 0;
        auto [next, ec] = std::from_chars(p, end, value);
        if (ec != std::errc{} || value > 255 || next == p) return std::nullopt;
        ip = (ip << 8) | value;
        p = next;
        if (part < 3) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return ip;
}

std::string format_ipv4(uint32_t ip) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (ip >> 24) & 0xff, (ip >> 16) & 0xff,
                  (ip >> 8) & 0xff, ip & 0xff);
    return buf;
}

Endpoint Endpoint::parse(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("endpoint missing port: " + text);
    auto ip = parse_ipv4(text.substr(0, colon));
    if (!ip) throw std::invalid_argument("bad IPv4 address in endpoint: " + text);
    unsigned port = 0;
    const std::string ptext = text.substr(colon + 1);
    auto [next, ec] = std::from_chars(ptext.data(), ptext.data() + ptext.size(), port);
    if (ec != std::errc{} || next != ptext.data() + ptext.size() || port > 65535)
        throw std::invalid_argument("bad port in endpoint: " + text);
    return Endpoint{*ip, static_cast<uint16_t>(port)};
}

std::string Endpoint::to_string() const {
    return format_ipv4(ip) + ":" + std::to_string(port);
}

namespace {

std::vector<SocketRecord>& inventory() {
    static std::vector<SocketRecord> records;
    return records;
}

sockaddr_in to_sockaddr(Endpoint ep) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(ep.ip);
    sa.sin_port = htons(ep.port);
    return sa;
}

Endpoint from_sockaddr(const sockaddr_in& sa) {
    return Endpoint{ntohl(sa.sin_addr.s_addr), ntohs(sa.sin_port)};
}

int new_socket(int type, const std::string& what) {
    int fd = ::socket(AF_INET, type | SOCK_NONBLOCK | SOCK_CLOEXEC, 0);
    if (fd < 0) throw_errno("socket(" + what + ")");
    return fd;
}

}  // namespace

void SocketInventory::record(SocketKind kind, const std::string& purpose) {
    inventory().push_back({kind, purpose});
}

const std::vector<SocketRecord>& SocketInventory::entries() { return inventory(); }

size_t SocketInventory::count(SocketKind kind, const std::string& purpose_prefix) {
    size_t n = 0;
    for (const auto& r : inventory())
        if (r.kind == kind && r.purpose.rfind(purpose_prefix, 0) == 0) ++n;
    return n;
}

std::string SocketInventory::to_json() {
    std::string out = "[";
    bool first = true;
    for (const auto& r : inventory()) {
        if (!first) out += ",";
        first = false;
        const char* k = r.kind == SocketKind::Datagram ? "dgram"
                        : r.kind == SocketKind::Stream ? "stream"
                                                       : "listener";
        out += std::string("{\"kind\":\"") + k + "\",\"purpose\":\"" + r.purpose + "\"}";
    }
    return out + "]";
}

FdHandle& FdHandle::operator=(FdHandle&& o) noexcept {
    if (this != &o) {
        reset();
        fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
}

FdHandle::~FdHandle() { reset(); }

void FdHandle::reset(int fd) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
}

void set_nonblocking(int fd) {
    int flags = ::fcntl(fd, F_GETFL);
    if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0)
        throw_errno("fcntl(O_NONBLOCK)");
}

void set_cloexec(int fd, bool on) {
    int flags = ::fcntl(fd, F_GETFD);
    if (flags < 0) throw_errno("fcntl(F_GETFD)");
    flags = on ? (flags | FD_CLOEXEC) : (flags & ~FD_CLOEXEC);
    if (::fcntl(fd, F_SETFD, flags) < 0) throw_errno("fcntl(F_SETFD)");
}

UdpSocket UdpSocket::bind(Endpoint local, const std::string& purpose) {
    UdpSocket s;
    s.fd_.reset(new_socket(SOCK_DGRAM, purpose));
    sockaddr_in sa = to_sockaddr(local);
    if (::bind(s.fd_.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0)
        throw_errno("bind udp " + local.to_string());
    SocketInventory::record(SocketKind::Datagram, purpose);
    return s;
}

UdpSocket UdpSocket::adopt(int fd, const std::string& purpose) {
    UdpSocket s;
    set_nonblocking(fd);
    s.fd_.reset(fd);
    SocketInventory::record(SocketKind::Datagram, purpose);
    return s;
}

void UdpSocket::connect(Endpoint peer) {
    sockaddr_in sa = to_sockaddr(peer);
    if (::connect(fd_.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0)
        throw_errno("connect udp " + peer.to_string());
}

SendResult UdpSocket::send(std::span<const uint8_t> data) {
    ssize_t n = ::send(fd_.get(), data.data(), data.size(), 0);
    if (n >= 0) return SendResult::Sent;
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == ENOBUFS) return SendResult::WouldBlock;
    if (errno == ECONNREFUSED) return SendResult::Refused;
    throw_errno("send udp");
}

SendResult UdpSocket::send_to(std::span<const uint8_t> data, Endpoint peer) {
    sockaddr_in sa = to_sockaddr(peer);
    ssize_t n = ::sendto(fd_.get(), data.data(), data.size(), 0,
                         reinterpret_cast<sockaddr*>(&sa), sizeof sa);
    if (n >= 0) return SendResult::Sent;
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == ENOBUFS) return SendResult::WouldBlock;
    if (errno == ECONNREFUSED) return SendResult::Refused;
    throw_errno("sendto udp " + peer.to_string());
}

std::optional<UdpSocket::Datagram> UdpSocket::recv() {
    uint8_t buf[65536];
    sockaddr_in sa{};
    socklen_t salen = sizeof sa;
    ssize_t n = ::recvfrom(fd_.get(), buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&sa), &salen);
    if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == ECONNREFUSED) return std::nullopt;
        throw_errno("recvfrom udp");
    }
    Datagram d;
    d.data.assign(buf, buf + n);
    d.from = from_sockaddr(sa);
    return d;
}

Endpoint UdpSocket::local_endpoint() const {
    sockaddr_in sa{};
    socklen_t salen = sizeof sa;
    if (::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&sa), &salen) < 0)
        throw_errno("getsockname");
    return from_sockaddr(sa);
}

void UdpSocket::set_recv_buffer(int bytes) {
    // SO_RCVBUFFORCE needs CAP_NET_ADMIN; fall back to the rmem_max-capped set.
    if (::setsockopt(fd_.get(), SOL_SOCKET, SO_RCVBUFFORCE, &bytes, sizeof bytes) < 0)
        ::setsockopt(fd_.get(), SOL_SOCKET, SO_RCVBUF, &bytes, sizeof bytes);
}

TcpStream TcpStream::connect(Endpoint peer, Deadline deadline, const std::string& purpose) {
    TcpStream s;
    s.fd_.reset(new_socket(SOCK_STREAM, purpose));
    sockaddr_in sa = to_sockaddr(peer);
    int rc = ::connect(s.fd_.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa);
    if (rc < 0 && errno == EINPROGRESS) {
        pollfd pfd{s.fd_.get(), POLLOUT, 0};
        while (true) {
            auto left_us = std::chrono::duration_cast<std::chrono::microseconds>(deadline -
                                                                                 Clock::now())
                               .count();
            if (left_us <= 0) throw IoError("connect tcp " + peer.to_string(), ETIMEDOUT);
            int pr = ::poll(&pfd, 1, static_cast<int>(std::min<int64_t>((left_us + 999) / 1000, 100)));
            if (pr < 0 && errno != EINTR) throw_errno("poll(connect)");
            if (pr > 0) break;
        }
        int err = 0;
        socklen_t len = sizeof err;
        if (::getsockopt(s.fd_.get(), SOL_SOCKET, SO_ERROR, &err, &len) < 0) throw_errno("getsockopt");
        if (err != 0) throw IoError("connect tcp " + peer.to_string(), err);
    } else if (rc < 0) {
        throw_errno("connect tcp " + peer.to_string());
    }
    int one = 1;
    ::setsockopt(s.fd_.get(), IPPROTO_TCP, 1 /*TCP_NODELAY*/, &one, sizeof one);
    SocketInventory::record(SocketKind::Stream, purpose);
    return s;
}

TcpStream TcpStream::adopt(int fd, const std::string& purpose) {
    TcpStream s;
    set_nonblocking(fd);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, 1 /*TCP_NODELAY*/, &one, sizeof one);
    s.fd_.reset(fd);
    SocketInventory::record(SocketKind::Stream, purpose);
    return s;
}

std::optional<size_t> TcpStream::read(std::span<uint8_t> buf) {
    ssize_t n = ::read(fd_.get(), buf.data(), buf.size());
    if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) return std::nullopt;
        if (errno == ECONNRESET) return 0;
        throw_errno("read tcp");
    }
    return static_cast<size_t>(n);
}

void TcpStream::write_all(std::span<const uint8_t> data, Deadline deadline) {
    size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::write(fd_.get(), data.data() + off, data.size() - off);
        if (n > 0) {
            off += static_cast<size_t>(n);
            continue;
        }
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) throw_errno("write tcp");
        pollfd pfd{fd_.get(), POLLOUT, 0};
        auto left_us =
            std::chrono::duration_cast<std::chrono::microseconds>(deadline - Clock::now()).count();
        if (left_us <= 0) throw IoError("write tcp", ETIMEDOUT);
        if (::poll(&pfd, 1, static_cast<int>(std::min<int64_t>((left_us + 999) / 1000, 100))) < 0 &&
            errno != EINTR)
            throw_errno("poll(write)");
    }
}

TcpListener TcpListener::bind(Endpoint local, const std::string& purpose) {
    TcpListener l;
    l.fd_.reset(new_socket(SOCK_STREAM, purpose));
    int one = 1;
    ::setsockopt(l.fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in sa = to_sockaddr(local);
    if (::bind(l.fd_.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0)
        throw_errno("bind tcp " + local.to_string());
    if (::listen(l.fd_.get(), 64) < 0) throw_errno("listen");
    SocketInventory::record(SocketKind::StreamListener, purpose);
    return l;
}

std::optional<TcpStream> TcpListener::accept(const std::string& purpose) {
    int fd = ::accept4(fd_.get(), nullptr, nullptr, SOCK_NONBLOCK | SOCK_CLOEXEC);
    if (fd < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) return std::nullopt;
        throw_errno("accept");
    }
    return TcpStream::adopt(fd, purpose);
}

Endpoint TcpListener::local_endpoint() const {
    sockaddr_in sa{};
    socklen_t salen = sizeof sa;
    if (::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&sa), &salen) < 0)
        throw_errno("getsockname");
    return from_sockaddr(sa);
}

void Poller::clear() { fds_.clear(); }

void Poller::watch_read(int fd) { fds_.push_back(fd); }

std::vector<int> Poller::wait(int timeout_ms) {
    std::vector<pollfd> pfds;
    pfds.reserve(fds_.size());
    for (int fd : fds_) pfds.push_back({fd, POLLIN, 0});
    int rc = ::poll(pfds.data(), pfds.size(), timeout_ms);
    if (rc < 0) {
        if (errno == EINTR) return {};
        throw_errno("poll");
    }
    std::vector<int> ready;
    for (const auto& p : pfds)
        if (p.revents & (POLLIN | POLLHUP | POLLERR)) ready.push_back(p.fd);
    return ready;
}

bool wait_readable(int fd, Deadline deadline) {
    pollfd pfd{fd, POLLIN, 0};
    while (true) {
        auto left_us =
            std::chrono::duration_cast<std::chrono::microseconds>(deadline - Clock::now()).count();
        if (left_us <= 0) return false;
        int rc = ::poll(&pfd, 1, static_cast<int>(std::min<int64_t>((left_us + 999) / 1000, 200)));
        if (rc < 0 && errno != EINTR) throw_errno("poll");
        if (rc > 0) return true;
    }
}

}  // namespace gridloop::io
