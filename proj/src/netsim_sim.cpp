#include "gridloop/netsim/sim.hpp"

#include "gridloop/vif/base64.hpp"

namespace gridloop::netsim {

using cosim::Json;

std::string NetworkSimulator::entity_path(const std::string& gateway) {
    return "SimulatedNetwork/" + gateway + "/app-0";
}

cosim::SimulatorMeta NetworkSimulator::init(const std::string&, const Json&) {
    cosim::SimulatorMeta meta;
    meta.models["NetworkNode"] = cosim::ModelMeta{{"rx"}, {"tx"}};
    return meta;
}

std::vector<cosim::EntityDescr> NetworkSimulator::create(int num, const std::string& model,
                                                         const Json& params) {
    if (model != "NetworkNode") throw TopologyError("unknown model: " + model);
    auto names = params.at("names").get<std::vector<std::string>>();
    if (static_cast<int>(names.size()) != num)
        throw TopologyError("create expects one gateway name per entity");
    std::vector<cosim::EntityDescr> out;
    for (const auto& name : names) {
        NodeId node = topo_.node_by_name(name);
        if (topo_.nodes()[node].role != NodeRole::AppGateway)
            throw TopologyError(name + " is not an app gateway");
        std::string path = entity_path(name);
        node_by_path_[path] = node;
        path_by_node_[node] = path;
        out.push_back(cosim::EntityDescr{path, "NetworkNode"});
    }
    return out;
}

void NetworkSimulator::step(cosim::SimTime time, const Json& inputs) {
    for (const auto& [path, attrs] : inputs.items()) {
        auto it = node_by_path_.find(path);
        if (it == node_by_path_.end()) throw TopologyError("step input for unknown entity " + path);
        if (!attrs.contains("rx")) continue;
        for (const auto& [src, value] : attrs.at("rx").items()) {
            (void)src;
            if (value.is_null()) continue;
            auto packets = vif::decode_packets_b64(value.get<std::vector<std::string>>());
            for (auto& bytes : packets) topo_.inject(it->second, std::move(bytes), time);
        }
    }
    auto delivered = topo_.step(time + 1);
    for (auto& [node, packets] : delivered) {
        auto path = path_by_node_.find(node);
        if (path == path_by_node_.end()) continue;  // gateway without an entity
        auto& queue = pending_tx_[path->second];
        for (auto& pkt : packets) queue.push_back(vif::base64_encode(pkt.bytes));
    }
}

Json NetworkSimulator::get_data(const Json& request) {
    Json out = Json::object();
    for (const auto& [path, attrs] : request.items()) {
        for (const auto& attr : attrs) {
            if (attr.get<std::string>() != "tx") continue;
            auto it = pending_tx_.find(path);
            Json list = Json::array();
            if (it != pending_tx_.end()) {
                for (auto& s : it->second) list.push_back(std::move(s));
                it->second.clear();
            }
            out[path]["tx"] = std::move(list);
        }
    }
    return out;
}

}  // namespace gridloop::netsim
