#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridloop/cosim/simulator.hpp"
#include "gridloop/io/net.hpp"
#include "gridloop/vif/reassembly.hpp"

namespace gridloop::vif {

struct VifSimConfig {
    io::Endpoint kernel;
    std::optional<int> listen_fd;
    io::Endpoint listen = io::Endpoint::loopback(0);
    enum class Mode { PerContainer, Mux } mode = Mode::PerContainer;
    int recv_buffer_bytes = 4 << 20;
};

struct VifSimStats {
    uint64_t datagrams_in = 0;
    uint64_t packets_assembled = 0;
    uint64_t packets_injected = 0;   // toward the containers
    uint64_t unknown_dropped = 0;    // datagrams with no attributable container
    uint64_t no_addr_dropped = 0;    // rx for a container not yet announced
    uint64_t desyncs = 0;
};

/// Simulation-side adapter for one or many containers: learns each
/// container's return address from its hello burst (or first data),
/// reassembles the tunnel byte stream into whole IP packets, and exposes one
/// "vif" entity per container with tx/rx lists of Base64 packets.
class VifSimDaemon : public cosim::Simulator {
public:
    explicit VifSimDaemon(VifSimConfig cfg);

    // Simulator surface (the kernel drives these; unit tests call them too).
    cosim::SimulatorMeta init(const std::string& assigned_name, const cosim::Json& params) override;
    std::vector<cosim::EntityDescr> create(int num, const std::string& model,
                                           const cosim::Json& params) override;
    void step(cosim::SimTime time, const cosim::Json& inputs) override;
    cosim::Json get_data(const cosim::Json& request) override;

    /// Connects to the kernel and serves until "stop". Returns the exit code.
    int run_process();

    void drain_udp();
    io::Endpoint listen_endpoint() const { return udp_.local_endpoint(); }
    int tunnel_fd() const { return udp_.fd(); }
    VifSimStats stats() const;

private:
    struct Container {
        std::string eid;
        std::optional<io::Endpoint> addr;
        FrameBuffer buffer;
        std::vector<std::string> assembled_b64;
    };

    Container* attribute(const io::Endpoint& from, bool parsable_start);

    VifSimConfig cfg_;
    io::UdpSocket udp_;
    std::string name_ = "vif-sim";
    std::vector<Container> containers_;
    std::map<io::Endpoint, size_t> by_addr_;
    VifSimStats stats_;
};

}  // namespace gridloop::vif
