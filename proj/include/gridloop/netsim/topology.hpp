#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridloop/addressing/plan.hpp"
#include "gridloop/area.hpp"
#include "gridloop/netsim/delay.hpp"
#include "gridloop/netsim/packet.hpp"

namespace gridloop::netsim {

struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using NodeId = uint32_t;

enum class NodeRole { Router, Host, AppGateway };

struct Node {
    NodeId id = 0;
    NodeRole role = NodeRole::Host;
    uint32_t ip = 0;
    addr::Cidr subnet;
    std::string name;
};

struct LinkSpec {
    double data_rate_bps = 1e9;
    AreaKind area = AreaKind::Dedicated;
    DelayModel delay = DelayModel::defaults(AreaKind::Dedicated);
    uint32_t queue_capacity = 1000;
};

/// Input to build(): subnets (allocated per the Table-I plan), app gateways,
/// optional plain hosts, and backbone links between subnet routers.
struct NetPlan {
    struct Subnet {
        std::string name;
        AreaKind area = AreaKind::Dedicated;
        uint32_t index = 0;           // which /24 of the area block
        int routers = 1;
        std::optional<LinkSpec> host_link;  // default: area defaults
    };
    struct Host {
        std::string name;
        std::string subnet;
        bool app_gateway = true;
        std::optional<uint32_t> pinned_ip;  // must fall inside the subnet
    };
    struct Backbone {
        std::string subnet_a;
        std::string subnet_b;
        LinkSpec link;
    };

    uint64_t seed = 0;
    std::vector<Subnet> subnets;
    std::vector<Host> hosts;
    std::vector<Backbone> backbones;
};

struct HopRecord {
    double queue_wait_ms = 0;
    double serialization_ms = 0;
    double delay_ms = 0;
    double fifo_wait_ms = 0;  // extra wait keeping per-link arrivals in order
};

enum class PacketOutcome { InFlight, Delivered, BrokenLink, QueueDrop, Unroutable, Malformed };

struct PacketRecord {
    uint64_t id = 0;
    PacketInfo info;
    size_t size = 0;
    int64_t ingress_ms = 0;
    NodeId ingress_node = 0;
    std::vector<HopRecord> hops;
    PacketOutcome outcome = PacketOutcome::InFlight;
    double delivered_ms = 0;  // real-valued simulated ms, valid when Delivered

    double transit_ms() const { return delivered_ms - double(ingress_ms); }
};

struct AreaCounters {
    uint64_t delivered = 0;
    uint64_t lost_broken = 0;
    uint64_t dropped_queue = 0;
};

struct Counters {
    uint64_t injected = 0;
    uint64_t delivered = 0;
    uint64_t lost_broken = 0;
    uint64_t dropped_queue = 0;
    uint64_t unroutable = 0;
    uint64_t malformed = 0;
    std::map<AreaKind, AreaCounters> per_area;

    uint64_t in_flight() const {
        return injected - delivered - lost_broken - dropped_queue - unroutable - malformed;
    }
};

/// Discrete-event simulator of one AS: per-link FIFO serialization,
/// per-packet stochastic area delay, drop-tail queues, static shortest-path
/// routing. Single-threaded; stepped by the co-simulation kernel.
class Topology {
public:
    static Topology build(const NetPlan& plan);

    const std::vector<Node>& nodes() const { return nodes_; }
    struct LinkEdge {
        NodeId a, b;
        LinkSpec spec;
    };
    std::vector<LinkEdge> link_edges() const;

    NodeId node_by_name(const std::string& name) const;
    std::optional<NodeId> node_by_ip(uint32_t ip) const;

    void inject(NodeId node, std::vector<uint8_t> bytes, int64_t now_ms);
    // Processes all events with timestamp < until_ms; returns packets
    // delivered to each app gateway during the window.
    std::map<NodeId, std::vector<Packet>> step(int64_t until_ms);

    std::optional<std::vector<NodeId>> route(uint32_t src_ip, uint32_t dst_ip) const;

    const Counters& counters() const { return counters_; }
    const std::vector<PacketRecord>& records() const { return records_; }
    int64_t now_ms() const { return now_ms_; }
    Rng& rng() { return rng_; }

private:
    Topology() : rng_(0) {}

    struct DirState {
        double busy_until = 0;
        double last_arrival = 0;
        uint32_t occupancy = 0;
    };
    struct Link {
        NodeId a, b;
        LinkSpec spec;
        DirState dir[2];  // [0]: a->b, [1]: b->a
    };
    struct Transit {
        std::vector<uint8_t> bytes;
        NodeId dst_node = 0;
        size_t record = 0;
    };
    enum class EventKind { Arrival, Dequeue };
    struct Event {
        double t;
        uint64_t seq;
        EventKind kind;
        uint64_t packet;  // Arrival
        NodeId node;      // Arrival
        uint32_t link;    // Dequeue
        int dir;          // Dequeue
        bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
    };

    void process_arrival(const Event& ev);
    void finish(uint64_t packet, PacketOutcome outcome, AreaKind* area);

    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<std::pair<NodeId, uint32_t>>> adjacency_;  // (neighbor, link idx)
    std::vector<std::vector<NodeId>> next_hop_;  // [node][dst] -> neighbor, self if unreachable
    std::map<uint32_t, NodeId> by_ip_;
    std::map<std::string, NodeId> by_name_;

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
    uint64_t event_seq_ = 0;
    std::map<uint64_t, Transit> in_flight_;
    uint64_t next_packet_id_ = 0;
    std::vector<PacketRecord> records_;
    std::map<NodeId, std::vector<Packet>> delivered_;
    Counters counters_;
    int64_t now_ms_ = 0;
    Rng rng_;
};

}  // namespace gridloop::netsim
