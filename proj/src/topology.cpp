#include "gridloop/netsim/topology.hpp"

#include <algorithm>
#include <deque>

#include "gridloop/io/net.hpp"

namespace gridloop::netsim {

namespace {

void validate_link(const LinkSpec& spec) {
    spec.delay.validate();
    if (spec.delay.kind != spec.area)
        throw TopologyError("delay model kind does not match link area");
    switch (spec.area) {
        case AreaKind::Dedicated:
        case AreaKind::SharedLinks:
            if (spec.data_rate_bps != 1e9)
                throw TopologyError(std::string(area_name(spec.area)) +
                                    " links run at the nominal 1 Gbit/s");
            break;
        case AreaKind::HighImpairment:
            if (spec.data_rate_bps < 50e3 || spec.data_rate_bps > 100e6)
                throw TopologyError("high_impairment data rate must be in [50 kbit/s, 100 Mbit/s]");
            break;
    }
    if (spec.queue_capacity == 0) throw TopologyError("queue_capacity must be >= 1");
}

LinkSpec default_host_link(AreaKind area) {
    LinkSpec spec;
    spec.area = area;
    spec.delay = DelayModel::defaults(area);
    spec.data_rate_bps = area == AreaKind::HighImpairment ? 100e6 : 1e9;
    return spec;
}

}  // namespace

Topology Topology::build(const NetPlan& plan) {
    Topology topo;
    topo.rng_ = Rng(plan.seed);
    addr::SubnetPlan subnet_plan;

    struct SubnetCtx {
        addr::Cidr cidr;
        AreaKind area;
        std::vector<NodeId> routers;
        addr::HostRegistry registry;
        LinkSpec host_link;
    };
    std::map<std::string, SubnetCtx> subnets;

    auto add_node = [&](NodeRole role, uint32_t ip, addr::Cidr subnet,
                        const std::string& name) -> NodeId {
        if (topo.by_name_.count(name)) throw TopologyError("duplicate node name: " + name);
        if (topo.by_ip_.count(ip))
            throw TopologyError("duplicate node address: " + io::format_ipv4(ip));
        NodeId id = static_cast<NodeId>(topo.nodes_.size());
        topo.nodes_.push_back(Node{id, role, ip, subnet, name});
        topo.by_ip_[ip] = id;
        topo.by_name_[name] = id;
        return id;
    };
    auto add_link = [&](NodeId a, NodeId b, const LinkSpec& spec) {
        validate_link(spec);
        topo.links_.push_back(Link{a, b, spec, {}});
    };

    for (const auto& s : plan.subnets) {
        if (subnets.count(s.name)) throw TopologyError("duplicate subnet name: " + s.name);
        if (s.routers < 1) throw TopologyError("subnet " + s.name + " needs at least one router");
        addr::Cidr cidr = subnet_plan.allocate_subnet(s.area, s.index);
        SubnetCtx ctx{cidr, s.area, {}, addr::HostRegistry(cidr),
                      s.host_link.value_or(default_host_link(s.area))};
        for (int r = 0; r < s.routers; ++r) {
            uint32_t ip = ctx.registry.allocate(addr::HostRole::Router);
            NodeId id = add_node(NodeRole::Router, ip, cidr, s.name + ".r" + std::to_string(r + 1));
            if (r > 0) add_link(ctx.routers.back(), id, ctx.host_link);
            ctx.routers.push_back(id);
        }
        subnets.emplace(s.name, std::move(ctx));
    }

    for (const auto& h : plan.hosts) {
        auto it = subnets.find(h.subnet);
        if (it == subnets.end())
            throw TopologyError("host " + h.name + " references unknown subnet " + h.subnet);
        auto& ctx = it->second;
        uint32_t ip = ctx.registry.allocate(addr::HostRole::Host);
        if (h.pinned_ip) {
            if (!ctx.cidr.contains(*h.pinned_ip) || *h.pinned_ip == ctx.cidr.base ||
                *h.pinned_ip == ctx.cidr.broadcast())
                throw TopologyError("host " + h.name + " address " + io::format_ipv4(*h.pinned_ip) +
                                    " is outside its area subnet " + ctx.cidr.to_string());
            ip = *h.pinned_ip;
        }
        NodeId id = add_node(h.app_gateway ? NodeRole::AppGateway : NodeRole::Host, ip, ctx.cidr,
                             h.name);
        add_link(id, ctx.routers.front(), ctx.host_link);
    }

    for (const auto& bb : plan.backbones) {
        auto a = subnets.find(bb.subnet_a);
        auto b = subnets.find(bb.subnet_b);
        if (a == subnets.end() || b == subnets.end())
            throw TopologyError("backbone references unknown subnet " + bb.subnet_a + " or " +
                                bb.subnet_b);
        add_link(a->second.routers.front(), b->second.routers.front(), bb.link);
    }

    // Adjacency, sorted by neighbor address for deterministic exploration.
    topo.adjacency_.assign(topo.nodes_.size(), {});
    for (uint32_t i = 0; i < topo.links_.size(); ++i) {
        const auto& l = topo.links_[i];
        topo.adjacency_[l.a].emplace_back(l.b, i);
        topo.adjacency_[l.b].emplace_back(l.a, i);
    }
    for (auto& adj : topo.adjacency_)
        std::sort(adj.begin(), adj.end(), [&](const auto& x, const auto& y) {
            return topo.nodes_[x.first].ip < topo.nodes_[y.first].ip;
        });

    const size_t n = topo.nodes_.size();
    if (n == 0) throw TopologyError("empty topology");

    // All-pairs hop distances by per-source BFS.
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (NodeId s = 0; s < n; ++s) {
        std::deque<NodeId> q{s};
        dist[s][s] = 0;
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            for (const auto& [v, link] : topo.adjacency_[u]) {
                if (dist[s][v] < 0) {
                    dist[s][v] = dist[s][u] + 1;
                    q.push_back(v);
                }
            }
        }
    }
    for (NodeId v = 0; v < n; ++v)
        if (dist[0][v] < 0)
            throw TopologyError("disconnected topology: node " + topo.nodes_[v].name +
                                " is unreachable");

    // next_hop[u][d]: neighbor minimizing (distance to d, neighbor address).
    topo.next_hop_.assign(n, std::vector<NodeId>(n));
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId d = 0; d < n; ++d) {
            if (u == d) {
                topo.next_hop_[u][d] = u;
                continue;
            }
            NodeId best = u;
            int best_dist = -1;
            for (const auto& [v, link] : topo.adjacency_[u]) {  // address-sorted
                if (dist[v][d] >= 0 && (best_dist < 0 || dist[v][d] < best_dist)) {
                    best = v;
                    best_dist = dist[v][d];
                }
            }
            topo.next_hop_[u][d] = best;
        }
    }
    return topo;
}

std::vector<Topology::LinkEdge> Topology::link_edges() const {
    std::vector<LinkEdge> out;
    out.reserve(links_.size());
    for (const auto& l : links_) out.push_back(LinkEdge{l.a, l.b, l.spec});
    return out;
}

NodeId Topology::node_by_name(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw TopologyError("unknown node: " + name);
    return it->second;
}

std::optional<NodeId> Topology::node_by_ip(uint32_t ip) const {
    auto it = by_ip_.find(ip);
    if (it == by_ip_.end()) return std::nullopt;
    return it->second;
}

void Topology::inject(NodeId node, std::vector<uint8_t> bytes, int64_t now_ms) {
    if (node >= nodes_.size()) throw TopologyError("inject at unknown node");
    ++counters_.injected;
    PacketRecord rec;
    rec.id = next_packet_id_++;
    rec.size = bytes.size();
    rec.ingress_ms = now_ms;
    rec.ingress_node = node;

    auto info = parse_packet(bytes);
    if (!info) {
        rec.outcome = PacketOutcome::Malformed;
        ++counters_.malformed;
        records_.push_back(std::move(rec));
        return;
    }
    rec.info = *info;
    std::optional<NodeId> dst =
        info->version == 4 ? node_by_ip(info->dst_ip) : std::nullopt;
    if (!dst) {
        rec.outcome = PacketOutcome::Unroutable;
        ++counters_.unroutable;
        records_.push_back(std::move(rec));
        return;
    }
    records_.push_back(std::move(rec));
    in_flight_[records_.back().id] = Transit{std::move(bytes), *dst, records_.size() - 1};
    events_.push(Event{double(now_ms), event_seq_++, EventKind::Arrival, records_.back().id, node,
                       0, 0});
}

void Topology::finish(uint64_t packet, PacketOutcome outcome, AreaKind* area) {
    auto it = in_flight_.find(packet);
    PacketRecord& rec = records_[it->second.record];
    rec.outcome = outcome;
    if (outcome == PacketOutcome::BrokenLink) {
        ++counters_.lost_broken;
        if (area) ++counters_.per_area[*area].lost_broken;
    } else if (outcome == PacketOutcome::QueueDrop) {
        ++counters_.dropped_queue;
        if (area) ++counters_.per_area[*area].dropped_queue;
    }
    in_flight_.erase(it);
}

void Topology::process_arrival(const Event& ev) {
    auto it = in_flight_.find(ev.packet);
    Transit& transit = it->second;
    PacketRecord& rec = records_[transit.record];

    if (ev.node == transit.dst_node) {
        rec.outcome = PacketOutcome::Delivered;
        rec.delivered_ms = ev.t;
        ++counters_.delivered;
        AreaKind dst_area = AreaKind::Dedicated;
        // Attribute the delivery to the destination's access-link area.
        for (const auto& [nb, li] : adjacency_[ev.node]) {
            dst_area = links_[li].spec.area;
            break;
        }
        ++counters_.per_area[dst_area].delivered;
        Packet pkt;
        pkt.bytes = std::move(transit.bytes);
        pkt.info = rec.info;
        pkt.ingress_ms = rec.ingress_ms;
        delivered_[ev.node].push_back(std::move(pkt));
        in_flight_.erase(it);
        return;
    }

    NodeId next = next_hop_[ev.node][transit.dst_node];
    if (next == ev.node) {  // cannot happen with a connected build; guard anyway
        rec.outcome = PacketOutcome::Unroutable;
        ++counters_.unroutable;
        in_flight_.erase(it);
        return;
    }
    uint32_t link_idx = 0;
    for (const auto& [nb, li] : adjacency_[ev.node])
        if (nb == next) {
            link_idx = li;
            break;
        }
    Link& link = links_[link_idx];
    int dir = link.a == ev.node ? 0 : 1;
    DirState& st = link.dir[dir];

    if (st.occupancy >= link.spec.queue_capacity) {
        AreaKind area = link.spec.area;
        finish(ev.packet, PacketOutcome::QueueDrop, &area);
        return;
    }
    DelaySample d = sample_delay(link.spec.delay, rng_);
    if (!d) {
        AreaKind area = link.spec.area;
        finish(ev.packet, PacketOutcome::BrokenLink, &area);
        return;
    }

    // Per-hop latency: queue wait + serialization + sampled area delay.
    // Arrival times on a link never go backwards (FIFO medium).
    double wait = st.busy_until > ev.t ? st.busy_until - ev.t : 0.0;
    double ser = double(rec.size) * 8.0 / link.spec.data_rate_bps * 1000.0;
    double raw = ((ev.t + wait) + ser) + *d;
    double fifo = st.last_arrival > raw ? st.last_arrival - raw : 0.0;
    double arrival = raw + fifo;
    if (arrival < st.last_arrival) arrival = st.last_arrival;

    st.busy_until = (ev.t + wait) + ser;
    st.last_arrival = arrival;
    ++st.occupancy;
    rec.hops.push_back(HopRecord{wait, ser, *d, fifo});

    events_.push(Event{st.busy_until, event_seq_++, EventKind::Dequeue, 0, 0, link_idx, dir});
    events_.push(Event{arrival, event_seq_++, EventKind::Arrival, ev.packet, next, 0, 0});
}

std::map<NodeId, std::vector<Packet>> Topology::step(int64_t until_ms) {
    if (until_ms < now_ms_) throw TopologyError("step target is in the past");
    while (!events_.empty() && events_.top().t < double(until_ms)) {
        Event ev = events_.top();
        events_.pop();
        if (ev.kind == EventKind::Dequeue) {
            --links_[ev.link].dir[ev.dir].occupancy;
        } else {
            process_arrival(ev);
        }
    }
    now_ms_ = until_ms;
    return std::exchange(delivered_, {});
}

std::optional<std::vector<NodeId>> Topology::route(uint32_t src_ip, uint32_t dst_ip) const {
    auto src = node_by_ip(src_ip);
    auto dst = node_by_ip(dst_ip);
    if (!src || !dst) return std::nullopt;
    std::vector<NodeId> path{*src};
    NodeId cur = *src;
    while (cur != *dst) {
        NodeId next = next_hop_[cur][*dst];
        if (next == cur) return std::nullopt;
        path.push_back(next);
        cur = next;
    }
    return path;
}

}  // namespace gridloop::netsim
