#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridloop/cosim/wire.hpp"

namespace gridloop::cosim {

/// Simulated milliseconds since scenario start. Lockstep step size is 1 ms.
using SimTime = int64_t;

struct ModelMeta {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

/// What a simulator declares in its init reply: model name -> attributes.
struct SimulatorMeta {
    std::map<std::string, ModelMeta> models;

    Json to_json() const;
    static SimulatorMeta from_json(const Json& j);
};

struct EntityDescr {
    std::string path;   // hierarchical, "/"-separated
    std::string model;
};

/// Lifecycle spoken to every simulator, in-process or remote:
/// init -> create* -> setup_done -> (step, get_data)* -> stop.
class Simulator {
public:
    virtual ~Simulator() = default;

    virtual SimulatorMeta init(const std::string& assigned_name, const Json& params) = 0;
    virtual std::vector<EntityDescr> create(int num, const std::string& model,
                                            const Json& params) = 0;
    virtual void setup_done() {}
    // inputs: {entity_path: {attr: {src_full_id: value}}}
    virtual void step(SimTime time, const Json& inputs) = 0;
    // request: {entity_path: [attr, ...]}; returns {entity_path: {attr: value}}
    virtual Json get_data(const Json& request) = 0;
    virtual void stop() {}
};

}  // namespace gridloop::cosim
