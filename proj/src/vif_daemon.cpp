#include "gridloop/vif/vif_daemon.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <linux/if.h>
#include <linux/if_tun.h>
#include <net/route.h>
#include <sys/ioctl.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>

namespace gridloop::vif {

namespace {

/// Datagram socket standing in for the tun device: the application sends
/// raw IP packets to it and receives them from it.
std::pair<uint32_t, int> addr_split(const std::string& cidr) {
    auto slash = cidr.find('/');
    uint32_t ip = *io::parse_ipv4(slash == std::string::npos ? cidr : cidr.substr(0, slash));
    int prefix = slash == std::string::npos ? 32 : std::atoi(cidr.c_str() + slash + 1);
    return {ip, prefix};
}

class LoopbackDevice : public Device {
public:
    LoopbackDevice(std::optional<int> fd, io::Endpoint bind_to) {
        socket_ = fd ? io::UdpSocket::adopt(*fd, "vif-device")
                     : io::UdpSocket::bind(bind_to, "vif-device");
    }

    int fd() override { return socket_.fd(); }

    std::optional<std::vector<uint8_t>> read_packet() override {
        while (auto dgram = socket_.recv()) {
            app_ = dgram->from;  // any datagram announces the application
            if (dgram->data.empty()) continue;
            return std::move(dgram->data);
        }
        return std::nullopt;
    }

    bool write_packet(std::span<const uint8_t> packet) override {
        if (!app_) return false;
        return socket_.send_to(packet, *app_) == io::SendResult::Sent;
    }

    io::Endpoint local() const { return socket_.local_endpoint(); }

private:
    io::UdpSocket socket_;
    std::optional<io::Endpoint> app_;
};

class TunDevice : public Device {
public:
    explicit TunDevice(const VifConfig& cfg) {
        fd_.reset(::open("/dev/net/tun", O_RDWR | O_NONBLOCK | O_CLOEXEC));
        if (!fd_.valid()) io::throw_errno("open /dev/net/tun");
        ifreq ifr{};
        ifr.ifr_flags = IFF_TUN | IFF_NO_PI;
        std::snprintf(ifr.ifr_name, IFNAMSIZ, "%s", cfg.tun_name.c_str());
        if (::ioctl(fd_.get(), TUNSETIFF, &ifr) < 0) io::throw_errno("TUNSETIFF " + cfg.tun_name);
        name_ = ifr.ifr_name;
        configure(cfg);
    }

    void configure(const VifConfig& cfg) {
        int ctl = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (ctl < 0) io::throw_errno("socket(tun control)");
        io::FdHandle ctl_guard(ctl);

        auto ifr_named = [&]() {
            ifreq ifr{};
            std::snprintf(ifr.ifr_name, IFNAMSIZ, "%s", name_.c_str());
            return ifr;
        };
        auto set_sockaddr = [](sockaddr& sa, uint32_t ip) {
            auto* in = reinterpret_cast<sockaddr_in*>(&sa);
            in->sin_family = AF_INET;
            in->sin_addr.s_addr = htonl(ip);
        };

        if (!cfg.tun_addr_cidr.empty()) {
            auto cidr = addr_split(cfg.tun_addr_cidr);
            ifreq ifr = ifr_named();
            set_sockaddr(ifr.ifr_addr, cidr.first);
            if (::ioctl(ctl, SIOCSIFADDR, &ifr) < 0) io::throw_errno("SIOCSIFADDR " + name_);
            ifr = ifr_named();
            uint32_t mask = cidr.second == 0 ? 0 : ~uint32_t(0) << (32 - cidr.second);
            set_sockaddr(ifr.ifr_netmask, mask);
            if (::ioctl(ctl, SIOCSIFNETMASK, &ifr) < 0) io::throw_errno("SIOCSIFNETMASK " + name_);
        }
        ifreq ifr = ifr_named();
        if (::ioctl(ctl, SIOCGIFFLAGS, &ifr) < 0) io::throw_errno("SIOCGIFFLAGS " + name_);
        ifr.ifr_flags |= IFF_UP | IFF_RUNNING;
        if (::ioctl(ctl, SIOCSIFFLAGS, &ifr) < 0) io::throw_errno("SIOCSIFFLAGS " + name_);

        // "route add default dev tunX", no gateway: everything enters the
        // simulation; one host route keeps the simulator path on the real
        // interface ("a.b.c.d via gateway").
        if (!cfg.tun_exclude_route.empty()) {
            auto via = cfg.tun_exclude_route.find(" via ");
            if (via != std::string::npos) {
                uint32_t host = *io::parse_ipv4(cfg.tun_exclude_route.substr(0, via));
                uint32_t gw = *io::parse_ipv4(cfg.tun_exclude_route.substr(via + 5));
                rtentry rt{};
                set_sockaddr(rt.rt_dst, host);
                set_sockaddr(rt.rt_genmask, ~uint32_t(0));
                set_sockaddr(rt.rt_gateway, gw);
                rt.rt_flags = RTF_UP | RTF_HOST | RTF_GATEWAY;
                if (::ioctl(ctl, SIOCADDRT, &rt) < 0) io::throw_errno("SIOCADDRT exclude");
            }
        }
        if (cfg.tun_default_route) {
            rtentry rt{};
            set_sockaddr(rt.rt_dst, 0);
            set_sockaddr(rt.rt_genmask, 0);
            rt.rt_flags = RTF_UP;
            std::string dev = name_;
            rt.rt_dev = dev.data();
            if (::ioctl(ctl, SIOCADDRT, &rt) < 0) io::throw_errno("SIOCADDRT default");
        }
    }

    int fd() override { return fd_.get(); }

    std::optional<std::vector<uint8_t>> read_packet() override {
        uint8_t buf[65536];
        ssize_t n = ::read(fd_.get(), buf, sizeof buf);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK) return std::nullopt;
            io::throw_errno("read tun");
        }
        return std::vector<uint8_t>(buf, buf + n);
    }

    bool write_packet(std::span<const uint8_t> packet) override {
        return ::write(fd_.get(), packet.data(), packet.size()) >= 0;
    }

private:
    io::FdHandle fd_;
    std::string name_;
};

void say(const std::string& line) {
    std::string out = line + "\n";
    [[maybe_unused]] ssize_t n = ::write(STDOUT_FILENO, out.data(), out.size());
}

}  // namespace

VifDaemon::VifDaemon(VifConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.transport == VifConfig::Transport::Tun)
        device_ = std::make_unique<TunDevice>(cfg_);
    else
        device_ = std::make_unique<LoopbackDevice>(cfg_.device_fd, cfg_.device_bind);

    tunnel_ = cfg_.tunnel_fd ? io::UdpSocket::adopt(*cfg_.tunnel_fd, "vif-tunnel")
                             : io::UdpSocket::bind(io::Endpoint::loopback(0), "vif-tunnel");
    tunnel_.connect(cfg_.peer);
    hellos_left_ = cfg_.hello_count;
    next_hello_ = io::Clock::now();
}

io::Endpoint VifDaemon::device_endpoint() const {
    if (auto* dev = dynamic_cast<LoopbackDevice*>(device_.get())) return dev->local();
    throw io::IoError("tun transport has no device endpoint", EINVAL);
}

void VifDaemon::mark_peer_live() {
    if (stats_.peer_live) return;
    stats_.peer_live = true;
    while (!pre_peer_buffer_.empty()) {
        auto& pkt = pre_peer_buffer_.front();
        tunnel_.send(pkt);
        ++stats_.forwarded_out;
        buffered_bytes_ -= pkt.size();
        pre_peer_buffer_.pop_front();
    }
    stats_.buffered_now = 0;
}

void VifDaemon::handle_outbound(std::vector<uint8_t> packet) {
    if (stats_.peer_live) {
        tunnel_.send(packet);
        ++stats_.forwarded_out;
        return;
    }
    buffered_bytes_ += packet.size();
    pre_peer_buffer_.push_back(std::move(packet));
    while (buffered_bytes_ > cfg_.buffer_limit_bytes && !pre_peer_buffer_.empty()) {
        buffered_bytes_ -= pre_peer_buffer_.front().size();
        pre_peer_buffer_.pop_front();
        ++stats_.buffer_dropped;
    }
    stats_.buffered_now = buffered_bytes_;
}

void VifDaemon::on_device_readable() {
    while (auto pkt = device_->read_packet()) handle_outbound(std::move(*pkt));
}

void VifDaemon::on_tunnel_readable() {
    while (auto dgram = tunnel_.recv()) {
        mark_peer_live();  // hello-ack or data, either announces the peer
        if (dgram->data.empty()) continue;
        if (device_->write_packet(dgram->data))
            ++stats_.forwarded_in;
        else
            ++stats_.device_dropped;
    }
}

void VifDaemon::hello_timer() {
    if (stats_.peer_live || io::Clock::now() < next_hello_) return;
    if (hellos_left_ == 0) {  // burst exhausted, retry later
        hellos_left_ = cfg_.hello_count;
        ++stats_.hello_bursts;
    }
    tunnel_.send({});
    --hellos_left_;
    next_hello_ = io::Clock::now() + std::chrono::milliseconds(
                                         hellos_left_ > 0 ? cfg_.hello_interval_ms
                                                          : cfg_.hello_retry_ms);
}

void VifDaemon::flush() {
    on_tunnel_readable();
    on_device_readable();
}

std::string VifDaemon::stats_json() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"forwarded_out\":%llu,\"forwarded_in\":%llu,\"buffered_now\":%llu,"
                  "\"buffer_dropped\":%llu,\"device_dropped\":%llu,\"hello_bursts\":%llu,"
                  "\"peer_live\":%s,\"sockets\":%s}",
                  (unsigned long long)stats_.forwarded_out, (unsigned long long)stats_.forwarded_in,
                  (unsigned long long)stats_.buffered_now,
                  (unsigned long long)stats_.buffer_dropped,
                  (unsigned long long)stats_.device_dropped,
                  (unsigned long long)stats_.hello_bursts, stats_.peer_live ? "true" : "false",
                  io::SocketInventory::to_json().c_str());
    return buf;
}

void VifDaemon::handle_control_line(const std::string& line) {
    if (line == "flush") {
        flush();
        say("flushed");
    } else if (line == "stats") {
        say("stats " + stats_json());
    } else if (line == "quit") {
        quit_ = true;
    }
}

bool VifDaemon::poll_once(int timeout_ms) {
    if (quit_) return false;
    hello_timer();
    io::Poller poller;
    poller.watch_read(device_->fd());
    poller.watch_read(tunnel_.fd());
    if (cfg_.control_stdio) poller.watch_read(STDIN_FILENO);

    int wait_ms = timeout_ms;
    if (!stats_.peer_live) {
        // Round up: a sub-millisecond timer must not turn the poll into a spin.
        auto until_us = std::chrono::duration_cast<std::chrono::microseconds>(next_hello_ -
                                                                              io::Clock::now())
                            .count();
        wait_ms = std::clamp<int>(int((until_us + 999) / 1000), 0, timeout_ms);
    }
    for (int fd : poller.wait(wait_ms)) {
        if (fd == device_->fd()) {
            on_device_readable();
        } else if (fd == tunnel_.fd()) {
            on_tunnel_readable();
        } else if (fd == STDIN_FILENO) {
            char buf[4096];
            ssize_t n = ::read(STDIN_FILENO, buf, sizeof buf);
            if (n == 0) quit_ = true;  // supervisor went away
            if (n > 0) {
                control_buffer_.append(buf, size_t(n));
                size_t pos;
                while ((pos = control_buffer_.find('\n')) != std::string::npos) {
                    handle_control_line(control_buffer_.substr(0, pos));
                    control_buffer_.erase(0, pos + 1);
                }
            }
        }
    }
    return !quit_;
}

void VifDaemon::run() {
    if (cfg_.control_stdio) {
        io::set_nonblocking(STDIN_FILENO);
        say("ready " + (cfg_.transport == VifConfig::Transport::Loopback
                            ? "{\"device\":\"" + device_endpoint().to_string() + "\",\"tunnel\":\"" +
                                  tunnel_endpoint().to_string() + "\"}"
                            : "{\"device\":\"tun\"}"));
    }
    while (poll_once(200)) {
    }
}

}  // namespace gridloop::vif
