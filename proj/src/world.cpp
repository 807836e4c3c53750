#include "gridloop/cosim/world.hpp"

#include <algorithm>

namespace gridloop::cosim {

World::World(WorldConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.listen) listener_ = io::TcpListener::bind(*cfg_.listen, "kernel-listener");
}

World::~World() {
    try {
        stop_all();
    } catch (...) {
    }
}

io::Endpoint World::listener_endpoint() const {
    if (!listener_.valid()) throw WorldError("world has no listener configured");
    return listener_.local_endpoint();
}

SimulatorHandle World::finish_registration(const std::string& name, std::unique_ptr<Simulator> sim,
                                           const Json& init_params) {
    if (sim_by_name_.count(name)) throw WorldError("duplicate simulator name: " + name);
    Json params = init_params.is_object() ? init_params : Json::object();
    params["step_size_ms"] = 1;
    SimulatorMeta meta = sim->init(name, params);
    SimEntry entry;
    entry.name = name;
    entry.sim = std::move(sim);
    entry.meta = std::move(meta);
    sims_.push_back(std::move(entry));
    sim_by_name_[name] = sims_.size() - 1;
    return SimulatorHandle{sims_.size() - 1, name};
}

SimulatorHandle World::register_simulator(const std::string& name, std::unique_ptr<Simulator> sim,
                                          const Json& init_params) {
    return finish_registration(name, std::move(sim), init_params);
}

SimulatorHandle World::register_remote(const std::string& name, const Json& init_params) {
    if (sim_by_name_.count(name)) throw WorldError("duplicate simulator name: " + name);
    if (!listener_.valid())
        throw WorldError("cannot register remote simulator \"" + name + "\": no listener");
    auto deadline = io::deadline_in(cfg_.accept_timeout_ms);
    while (true) {
        if (auto stream = listener_.accept("kernel-sim:" + name)) {
            auto remote =
                std::make_unique<RemoteSimulator>(std::move(*stream), cfg_.request_timeout_ms);
            return finish_registration(name, std::move(remote), init_params);
        }
        if (!io::wait_readable(listener_.fd(), deadline))
            throw WorldError("handshake timeout registering remote simulator \"" + name +
                             "\" (dead external simulator?)");
    }
}

std::vector<EntityId> World::create(const SimulatorHandle& sim, int num, const std::string& model,
                                    const Json& params) {
    auto& entry = sims_.at(sim.index);
    if (!entry.meta.models.count(model))
        throw WorldError("simulator \"" + entry.name + "\" declares no model \"" + model + "\"");
    auto described = entry.sim->create(num, model, params);
    if (static_cast<int>(described.size()) != num)
        throw WorldError("simulator \"" + entry.name + "\" created " +
                         std::to_string(described.size()) + " entities, expected " +
                         std::to_string(num));
    std::vector<EntityId> out;
    for (const auto& d : described) {
        EntityId id{entry.name, d.path};
        if (entities_.count(id)) throw WorldError("duplicate entity: " + id.full());
        entities_[id] = EntityEntry{id, sim.index, d.model};
        out.push_back(id);
    }
    return out;
}

const World::EntityEntry& World::entity(const EntityId& id) const {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw WorldError("unknown entity: " + id.full());
    return it->second;
}

const ModelMeta& World::model_of(const EntityEntry& e) const {
    return sims_[e.sim_index].meta.models.at(e.model);
}

void World::check_acyclic() const {
    // Cycle detection over the simulator-level condensation of non-shifted
    // edges: that graph must stay a DAG for same-step delivery to be stepable.
    std::map<size_t, std::set<size_t>> edges;
    for (const auto& c : connections_) {
        if (c.time_shifted) continue;
        edges[entity(c.src).sim_index].insert(entity(c.dst).sim_index);
    }
    std::map<size_t, int> state;  // 0 unvisited, 1 on stack, 2 done
    std::function<bool(size_t)> dfs = [&](size_t u) {
        state[u] = 1;
        for (size_t v : edges[u]) {
            if (state[v] == 1) return false;
            if (state[v] == 0 && !dfs(v)) return false;
        }
        state[u] = 2;
        return true;
    };
    for (size_t i = 0; i < sims_.size(); ++i)
        if (state[i] == 0 && !dfs(i))
            throw WorldError(
                "cycle: the non-time-shifted connection graph must stay acyclic; break the loop "
                "with time_shifted=true and initial_data");
}

const Connection& World::connect(const EntityId& src, const EntityId& dst,
                                 const std::pair<std::string, std::string>& attrs,
                                 bool time_shifted, const Json& initial_data) {
    const auto& src_entity = entity(src);
    const auto& dst_entity = entity(dst);
    const auto& src_model = model_of(src_entity);
    const auto& dst_model = model_of(dst_entity);
    const auto& [out_attr, in_attr] = attrs;

    auto has = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) != v.end();
    };
    if (!has(src_model.outputs, out_attr))
        throw WorldError("unknown attribute: \"" + out_attr + "\" is not an output of " +
                         src.full());
    if (!has(dst_model.inputs, in_attr))
        throw WorldError("unknown attribute: \"" + in_attr + "\" is not an input of " + dst.full());
    for (const auto& c : connections_)
        if (c.src == src && c.dst == dst && c.src_attr == out_attr && c.dst_attr == in_attr)
            throw WorldError("duplicate connection " + src.full() + ":" + out_attr + " -> " +
                             dst.full() + ":" + in_attr);

    Connection conn{src, out_attr, dst, in_attr, time_shifted, Json()};
    if (time_shifted) {
        if (!initial_data.is_object() || !initial_data.contains(out_attr))
            throw WorldError("time-shifted connections require initial_data keyed by the source "
                             "attribute, e.g. {\"" + out_attr + "\": null}");
        conn.initial_data = initial_data;
    } else if (!initial_data.is_null()) {
        throw WorldError("initial_data is only meaningful on time-shifted connections");
    }

    connections_.push_back(std::move(conn));
    try {
        check_acyclic();
    } catch (...) {
        connections_.pop_back();
        throw;
    }
    return connections_.back();
}

std::vector<size_t> World::topo_order() const {
    std::vector<std::set<size_t>> deps(sims_.size());
    for (const auto& c : connections_) {
        if (c.time_shifted) continue;
        size_t s = entity(c.src).sim_index;
        size_t d = entity(c.dst).sim_index;
        if (s != d) deps[d].insert(s);
    }
    std::vector<size_t> order;
    std::vector<bool> placed(sims_.size(), false);
    while (order.size() < sims_.size()) {
        bool progressed = false;
        for (size_t i = 0; i < sims_.size(); ++i) {  // ties: registration order
            if (placed[i]) continue;
            bool ready = std::all_of(deps[i].begin(), deps[i].end(),
                                     [&](size_t d) { return placed[d]; });
            if (ready) {
                order.push_back(i);
                placed[i] = true;
                progressed = true;
            }
        }
        if (!progressed) throw WorldError("internal: connection graph has a cycle");
    }
    return order;
}

void World::step_once(SimTime t) {
    if (pre_step_) pre_step_(t);
    current_outputs_.clear();

    for (size_t index : topo_order()) {
        auto& entry = sims_[index];

        Json inputs = Json::object();
        for (const auto& c : connections_) {
            if (entity(c.dst).sim_index != index) continue;
            const Json* value = nullptr;
            Json initial;
            if (c.time_shifted) {
                if (t == 0) {
                    initial = c.initial_data.at(c.src_attr);
                    value = &initial;
                } else if (auto it = previous_outputs_.find(c.src.full());
                           it != previous_outputs_.end() && it->second.contains(c.src_attr)) {
                    value = &it->second.at(c.src_attr);
                }
            } else if (auto it = current_outputs_.find(c.src.full());
                       it != current_outputs_.end() && it->second.contains(c.src_attr)) {
                value = &it->second.at(c.src_attr);
            }
            if (!value) continue;
            inputs[c.dst.path][c.dst_attr][c.src.full()] = *value;
            ++stats_.exchanges;
        }

        try {
            entry.sim->step(t, inputs);
            if (entry.barrier) entry.barrier(t, inputs);

            Json request = Json::object();
            for (const auto& c : connections_) {
                if (entity(c.src).sim_index != index) continue;
                Json& attrs = request[c.src.path];
                if (!attrs.is_array()) attrs = Json::array();
                if (std::find(attrs.begin(), attrs.end(), Json(c.src_attr)) == attrs.end())
                    attrs.push_back(c.src_attr);
            }
            Json data = entry.sim->get_data(request);
            ++entry.polls;
            for (const auto& [path, attrs] : data.items())
                for (const auto& [attr, value] : attrs.items())
                    current_outputs_[entry.name + "." + path][attr] = value;
        } catch (const WorldError&) {
            throw;
        } catch (const std::exception& e) {
            throw SimulatorCrashed(entry.name, stats_, e.what());
        }
    }

    previous_outputs_ = std::move(current_outputs_);
    current_outputs_.clear();
    ++stats_.steps;
}

StepStats World::step_until(SimTime until) {
    if (until < now_) throw WorldError("step target is in the past");
    if (!setup_done_sent_) {
        for (auto& entry : sims_) {
            try {
                entry.sim->setup_done();
            } catch (const std::exception& e) {
                throw SimulatorCrashed(entry.name, stats_, e.what());
            }
        }
        setup_done_sent_ = true;
    }
    while (now_ < until) {
        step_once(now_);
        ++now_;
    }
    return stats_;
}

void World::set_barrier_hook(const std::string& sim_name,
                             std::function<void(SimTime, const Json&)> hook) {
    auto it = sim_by_name_.find(sim_name);
    if (it == sim_by_name_.end()) throw WorldError("unknown simulator: " + sim_name);
    sims_[it->second].barrier = std::move(hook);
}

uint64_t World::polls(const std::string& sim_name) const {
    auto it = sim_by_name_.find(sim_name);
    if (it == sim_by_name_.end()) throw WorldError("unknown simulator: " + sim_name);
    return sims_[it->second].polls;
}

void World::stop_all() {
    if (stopped_) return;
    stopped_ = true;
    for (auto& entry : sims_) {
        try {
            entry.sim->stop();
        } catch (const std::exception&) {
        }
    }
}

}  // namespace gridloop::cosim
