#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridloop/cosim/remote.hpp"
#include "gridloop/cosim/simulator.hpp"
#include "gridloop/io/net.hpp"

namespace gridloop::cosim {

struct WorldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepStats {
    uint64_t steps = 0;
    uint64_t exchanges = 0;
    bool operator==(const StepStats&) const = default;
};

/// Raised when a simulator dies mid-run; the run aborts rather than silently
/// skipping the simulator.
struct SimulatorCrashed : WorldError {
    SimulatorCrashed(const std::string& sim, StepStats partial_stats, const std::string& why)
        : WorldError("simulator \"" + sim + "\" failed: " + why),
          simulator(sim),
          partial(partial_stats) {}
    std::string simulator;
    StepStats partial;
};

struct EntityId {
    std::string simulator;
    std::string path;  // hierarchical, "/"-separated

    std::string full() const { return simulator + "." + path; }
    bool operator==(const EntityId&) const = default;
    bool operator<(const EntityId& o) const {
        return simulator != o.simulator ? simulator < o.simulator : path < o.path;
    }
};

struct Connection {
    EntityId src;
    std::string src_attr;
    EntityId dst;
    std::string dst_attr;
    bool time_shifted = false;
    Json initial_data;  // object keyed by src_attr; required when time_shifted
};

struct SimulatorHandle {
    size_t index = 0;
    std::string name;
};

struct WorldConfig {
    std::optional<io::Endpoint> listen;  // TCP listener for external simulators
    int request_timeout_ms = 30000;
    int accept_timeout_ms = 10000;
};

/// Minimal stepped co-simulation kernel. Simulators are stepped in lockstep
/// 1 ms steps; non-time-shifted edges deliver within the step in topological
/// order, time-shifted edges deliver one step late (initial data at step 0).
/// Single-threaded; remote I/O is handled cooperatively on this thread.
class World {
public:
    explicit World(WorldConfig cfg = {});

    io::Endpoint listener_endpoint() const;

    SimulatorHandle register_simulator(const std::string& name, std::unique_ptr<Simulator> sim,
                                       const Json& init_params = Json::object());
    // Accepts the next inbound connection on the listener and runs the init
    // round-trip. Registration order is the matching rule: spawn, then register.
    SimulatorHandle register_remote(const std::string& name,
                                    const Json& init_params = Json::object());

    std::vector<EntityId> create(const SimulatorHandle& sim, int num, const std::string& model,
                                 const Json& params = Json::object());

    const Connection& connect(const EntityId& src, const EntityId& dst,
                              const std::pair<std::string, std::string>& attrs,
                              bool time_shifted = false, const Json& initial_data = Json());

    StepStats step_until(SimTime until);
    SimTime now() const { return now_; }
    StepStats stats() const { return stats_; }

    void set_pre_step_hook(std::function<void(SimTime)> hook) { pre_step_ = std::move(hook); }
    // Runs after step() and before get_data() of the named simulator — the
    // window where the scenario runner settles software-in-the-loop traffic.
    void set_barrier_hook(const std::string& sim_name,
                          std::function<void(SimTime, const Json& inputs)> hook);

    uint64_t polls(const std::string& sim_name) const;
    const std::vector<Connection>& connections() const { return connections_; }
    void stop_all();

    ~World();

private:
    struct SimEntry {
        std::string name;
        std::unique_ptr<Simulator> sim;
        SimulatorMeta meta;
        uint64_t polls = 0;
        std::function<void(SimTime, const Json&)> barrier;
    };
    struct EntityEntry {
        EntityId id;
        size_t sim_index;
        std::string model;
    };

    SimulatorHandle finish_registration(const std::string& name, std::unique_ptr<Simulator> sim,
                                        const Json& init_params);
    const EntityEntry& entity(const EntityId& id) const;
    const ModelMeta& model_of(const EntityEntry& e) const;
    void check_acyclic() const;
    std::vector<size_t> topo_order() const;
    void step_once(SimTime t);

    WorldConfig cfg_;
    io::TcpListener listener_;
    std::vector<SimEntry> sims_;
    std::map<std::string, size_t> sim_by_name_;
    std::map<EntityId, EntityEntry> entities_;
    std::vector<Connection> connections_;
    std::function<void(SimTime)> pre_step_;

    SimTime now_ = 0;
    StepStats stats_;
    bool setup_done_sent_ = false;
    bool stopped_ = false;
    // outputs_[entity full][attr] as of the current / previous step
    std::map<std::string, Json> current_outputs_, previous_outputs_;
};

}  // namespace gridloop::cosim
