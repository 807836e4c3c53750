#include "gridloop/vif/vifsim_daemon.hpp"

#include "gridloop/cosim/remote.hpp"
#include "gridloop/vif/base64.hpp"

namespace gridloop::vif {

using cosim::Json;

VifSimDaemon::VifSimDaemon(VifSimConfig cfg) : cfg_(std::move(cfg)) {
    udp_ = cfg_.listen_fd ? io::UdpSocket::adopt(*cfg_.listen_fd, "vifsim-tunnel")
                          : io::UdpSocket::bind(cfg_.listen, "vifsim-tunnel");
    udp_.set_recv_buffer(cfg_.recv_buffer_bytes);
}

cosim::SimulatorMeta VifSimDaemon::init(const std::string& assigned_name, const Json&) {
    name_ = assigned_name;
    cosim::SimulatorMeta meta;
    meta.models["vif"] = cosim::ModelMeta{{"rx"}, {"tx"}};
    return meta;
}

std::vector<cosim::EntityDescr> VifSimDaemon::create(int num, const std::string& model,
                                                     const Json& params) {
    if (model != "vif") throw std::runtime_error("unknown model: " + model);
    if (cfg_.mode == VifSimConfig::Mode::PerContainer && (num != 1 || !containers_.empty()))
        throw std::runtime_error("per-container mode serves exactly one vif entity");
    std::vector<cosim::EntityDescr> out;
    std::vector<std::string> peers;
    if (params.contains("peers")) peers = params.at("peers").get<std::vector<std::string>>();
    if (!peers.empty() && peers.size() != size_t(num))
        throw std::runtime_error("peers list must match the entity count");
    for (int i = 0; i < num; ++i) {
        Container c;
        c.eid = "vif-" + std::to_string(containers_.size());
        if (!peers.empty()) {
            c.addr = io::Endpoint::parse(peers[size_t(i)]);
            by_addr_[*c.addr] = containers_.size();
        }
        out.push_back(cosim::EntityDescr{c.eid, "vif"});
        containers_.push_back(std::move(c));
    }
    return out;
}

VifSimDaemon::Container* VifSimDaemon::attribute(const io::Endpoint& from, bool parsable_start) {
    if (auto it = by_addr_.find(from); it != by_addr_.end()) return &containers_[it->second];
    if (!parsable_start) return nullptr;
    // Announce: bind the source address to the first container slot that has
    // no address yet.
    for (size_t i = 0; i < containers_.size(); ++i) {
        if (!containers_[i].addr) {
            containers_[i].addr = from;
            by_addr_[from] = i;
            udp_.send_to({}, from);  // ack so the vif sees a live peer
            return &containers_[i];
        }
    }
    return nullptr;
}

void VifSimDaemon::drain_udp() {
    while (auto dgram = udp_.recv()) {
        ++stats_.datagrams_in;
        if (dgram->data.empty()) {  // hello
            if (attribute(dgram->from, true))
                udp_.send_to({}, dgram->from);  // acked even when already known
            else
                ++stats_.unknown_dropped;
            continue;
        }
        auto probe = packet_len_from_header(dgram->data);
        bool plausible = probe.kind != HeaderProbe::Kind::BadVersion;
        Container* c = attribute(dgram->from, plausible);
        if (!c) {
            ++stats_.unknown_dropped;
            continue;
        }
        for (auto& packet : c->buffer.feed(dgram->data)) {
            ++stats_.packets_assembled;
            c->assembled_b64.push_back(base64_encode(packet));
        }
    }
}

void VifSimDaemon::step(cosim::SimTime, const Json& inputs) {
    drain_udp();
    for (const auto& [eid, attrs] : inputs.items()) {
        if (!attrs.contains("rx")) continue;
        Container* c = nullptr;
        for (auto& cand : containers_)
            if (cand.eid == eid) c = &cand;
        if (!c) throw std::runtime_error("rx for unknown entity " + eid);
        for (const auto& [src, value] : attrs.at("rx").items()) {
            (void)src;
            if (value.is_null()) continue;
            for (auto& bytes : decode_packets_b64(value.get<std::vector<std::string>>())) {
                if (!c->addr) {
                    ++stats_.no_addr_dropped;
                    continue;
                }
                udp_.send_to(bytes, *c->addr);
                ++stats_.packets_injected;
            }
        }
    }
}

Json VifSimDaemon::get_data(const Json& request) {
    drain_udp();
    Json out = Json::object();
    for (const auto& [eid, attrs] : request.items()) {
        for (const auto& attr : attrs) {
            if (attr.get<std::string>() != "tx") continue;
            for (auto& c : containers_) {
                if (c.eid != eid) continue;
                Json list = Json::array();
                for (auto& s : c.assembled_b64) list.push_back(std::move(s));
                c.assembled_b64.clear();
                out[eid]["tx"] = std::move(list);
            }
        }
    }
    return out;
}

VifSimStats VifSimDaemon::stats() const {
    VifSimStats s = stats_;
    for (const auto& c : containers_) s.desyncs += c.buffer.desync_count();
    return s;
}

int VifSimDaemon::run_process() {
    io::TcpStream stream;
    try {
        stream = io::TcpStream::connect(cfg_.kernel, io::deadline_in(10000), "vifsim-kernel");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vif-sim: kernel handshake failed: %s\n", e.what());
        return 1;
    }
    cosim::SimulatorServer server(std::move(stream), *this);
    io::Poller poller;
    while (!server.done()) {
        poller.clear();
        poller.watch_read(server.fd());
        poller.watch_read(udp_.fd());
        for (int fd : poller.wait(200)) {
            if (fd == udp_.fd()) drain_udp();
            if (fd == server.fd() && !server.pump()) break;
        }
    }
    return 0;
}

}  // namespace gridloop::vif
