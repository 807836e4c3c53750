#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridloop/io/net.hpp"

namespace gridloop::vif {

/// The device side of the vif: where the unmodified application's packets
/// come from. Either the kernel tun driver (real mode) or a datagram
/// loopback socket (test transport, no privileges needed).
class Device {
public:
    virtual ~Device() = default;
    virtual int fd() = 0;
    virtual std::optional<std::vector<uint8_t>> read_packet() = 0;
    virtual bool write_packet(std::span<const uint8_t> packet) = 0;
};

struct VifConfig {
    enum class Transport { Tun, Loopback };
    Transport transport = Transport::Loopback;

    io::Endpoint peer;               // vif-sim tunnel endpoint
    std::optional<int> tunnel_fd;    // pre-bound socket handed in by the runner
    std::optional<int> device_fd;    // loopback transport only
    io::Endpoint device_bind = io::Endpoint::loopback(0);

    size_t buffer_limit_bytes = 1 << 20;
    int hello_count = 5;
    int hello_interval_ms = 100;
    int hello_retry_ms = 1000;

    std::string tun_name = "gltun0";
    std::string tun_addr_cidr;       // e.g. "10.64.0.3/24"; empty = leave unconfigured
    bool tun_default_route = false;
    std::string tun_exclude_route;   // "peer_ip via gateway dev ethX", set up verbatim

    bool control_stdio = true;       // flush / stats / quit on stdin, replies on stdout
};

struct VifStats {
    uint64_t forwarded_out = 0;      // device -> tunnel datagrams
    uint64_t forwarded_in = 0;       // tunnel -> device packets
    uint64_t buffered_now = 0;       // bytes waiting for the peer
    uint64_t buffer_dropped = 0;     // oldest-dropped packets
    uint64_t device_dropped = 0;     // inbound with no device peer yet
    uint64_t hello_bursts = 0;
    bool peer_live = false;
};

/// Runs beside one application: forwards every packet read from the device
/// to the vif-sim as a datagram, writes tunnel payloads back to the device,
/// and transparently buffers outbound data until the peer is alive. Single
/// threaded, readiness-driven.
class VifDaemon {
public:
    explicit VifDaemon(VifConfig cfg);

    void run();
    // One poll-loop turn; in-process tests drive this directly.
    // Returns false once quit was requested.
    bool poll_once(int timeout_ms);
    void flush();

    const VifStats& stats() const { return stats_; }
    io::Endpoint device_endpoint() const;
    io::Endpoint tunnel_endpoint() const { return tunnel_.local_endpoint(); }

private:
    void on_device_readable();
    void on_tunnel_readable();
    void handle_outbound(std::vector<uint8_t> packet);
    void mark_peer_live();
    void hello_timer();
    void handle_control_line(const std::string& line);
    std::string stats_json() const;

    VifConfig cfg_;
    std::unique_ptr<Device> device_;
    io::UdpSocket tunnel_;
    VifStats stats_;

    std::deque<std::vector<uint8_t>> pre_peer_buffer_;
    size_t buffered_bytes_ = 0;

    int hellos_left_ = 0;
    io::Deadline next_hello_{};
    std::string control_buffer_;
    bool quit_ = false;
};

}  // namespace gridloop::vif
