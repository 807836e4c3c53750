#pragma once

#include <map>
#include <string>

#include "gridloop/cosim/simulator.hpp"
#include "gridloop/netsim/topology.hpp"

namespace gridloop::netsim {

/// Presents the topology to the kernel: one NetworkNode entity per app
/// gateway, rx (inject packets) and tx (packets delivered to the gateway).
/// Packet values on the wire are lists of Base64 strings.
class NetworkSimulator : public cosim::Simulator {
public:
    explicit NetworkSimulator(Topology topology) : topo_(std::move(topology)) {}

    Topology& topology() { return topo_; }
    const Topology& topology() const { return topo_; }

    cosim::SimulatorMeta init(const std::string& assigned_name, const cosim::Json& params) override;
    std::vector<cosim::EntityDescr> create(int num, const std::string& model,
                                           const cosim::Json& params) override;
    void step(cosim::SimTime time, const cosim::Json& inputs) override;
    cosim::Json get_data(const cosim::Json& request) override;

    // Entity path used for a gateway name.
    static std::string entity_path(const std::string& gateway);

private:
    Topology topo_;
    std::map<std::string, NodeId> node_by_path_;
    std::map<NodeId, std::string> path_by_node_;
    std::map<std::string, std::vector<std::string>> pending_tx_;
};

}  // namespace gridloop::netsim
