#include "gridloop/grid/grid.hpp"

#include <functional>
#include <set>

namespace gridloop::grid {

using cosim::Json;

GridModel::GridModel(std::string root, std::vector<BusSpec> buses, std::vector<LineSpec> lines)
    : root_(std::move(root)), buses_(std::move(buses)), lines_(std::move(lines)) {
    for (size_t i = 0; i < buses_.size(); ++i) {
        if (buses_[i].base_load_kw < 0) throw GridError("base_load_kw must be >= 0");
        if (!bus_index_.emplace(buses_[i].id, i).second)
            throw GridError("duplicate bus id: " + buses_[i].id);
    }
    if (!bus_index_.count(root_)) throw GridError("unknown root bus: " + root_);
    for (size_t i = 0; i < lines_.size(); ++i) {
        const auto& l = lines_[i];
        if (!bus_index_.count(l.from) || !bus_index_.count(l.to))
            throw GridError("line references unknown bus: " + l.from + "->" + l.to);
        if (l.capacity_kw <= 0) throw GridError("line capacity must be > 0");
        children_[l.from].push_back(i);
    }
    // A radial grid is a tree: every non-root bus has exactly one feeding line.
    if (lines_.size() != buses_.size() - 1)
        throw GridError("radial topology required: need exactly one line per non-root bus");
    std::set<std::string> seen{root_};
    std::function<void(const std::string&)> walk = [&](const std::string& bus) {
        for (size_t li : children_[bus]) {
            const auto& l = lines_[li];
            if (!seen.insert(l.to).second)
                throw GridError("non-tree topology: bus " + l.to + " fed twice");
            walk(l.to);
        }
    };
    walk(root_);
    if (seen.size() != buses_.size()) throw GridError("non-tree topology: unreachable buses");
}

void GridModel::apply_setpoints(const std::map<std::string, double>& p_kw_delta_by_bus) {
    for (const auto& [bus, delta] : p_kw_delta_by_bus) {
        if (!bus_index_.count(bus)) throw GridError("setpoint for unknown bus: " + bus);
        delta_[bus] = delta;
    }
}

double GridModel::net_load_kw(const std::string& bus) const {
    auto it = bus_index_.find(bus);
    if (it == bus_index_.end()) throw GridError("unknown bus: " + bus);
    double delta = delta_.count(bus) ? delta_.at(bus) : 0.0;
    return buses_[it->second].base_load_kw + delta;
}

GridModel::StepResult GridModel::step(int64_t) {
    StepResult out;
    std::map<std::string, double> subtree_load;
    std::function<double(const std::string&)> sum = [&](const std::string& bus) {
        double total = net_load_kw(bus);
        auto it = children_.find(bus);
        if (it != children_.end())
            for (size_t li : it->second) total += sum(lines_[li].to);
        subtree_load[bus] = total;
        return total;
    };
    sum(root_);

    std::map<std::string, double> feeding_loading;  // bus -> loading of its feeding line
    for (const auto& l : lines_) {
        double loading = std::abs(subtree_load[l.to]) / l.capacity_kw;
        out.line_loading[l.from + "->" + l.to] = loading;
        feeding_loading[l.to] = loading;
    }
    for (const auto& b : buses_) {
        Reading r;
        r.p_kw = net_load_kw(b.id);
        double loading = feeding_loading.count(b.id) ? feeding_loading[b.id] : 0.0;
        r.v_pu = std::max(0.9, 1.0 - 0.01 * loading);
        out.buses[b.id] = r;
    }
    return out;
}

cosim::SimulatorMeta GridSimulator::init(const std::string&, const Json&) {
    cosim::SimulatorMeta meta;
    meta.models["Bus"] = cosim::ModelMeta{{"setpoint"}, {"reading"}};
    return meta;
}

std::vector<cosim::EntityDescr> GridSimulator::create(int num, const std::string& model,
                                                      const Json& params) {
    if (model != "Bus") throw GridError("unknown model: " + model);
    auto ids = params.at("buses").get<std::vector<std::string>>();
    if (static_cast<int>(ids.size()) != num) throw GridError("need one bus id per entity");
    std::vector<cosim::EntityDescr> out;
    for (const auto& id : ids) {
        model_.net_load_kw(id);  // validates the id
        out.push_back(cosim::EntityDescr{id, "Bus"});
    }
    return out;
}

void GridSimulator::step(cosim::SimTime time, const Json& inputs) {
    std::map<std::string, double> deltas;
    for (const auto& [bus, attrs] : inputs.items()) {
        if (!attrs.contains("setpoint")) continue;
        for (const auto& [src, value] : attrs.at("setpoint").items()) {
            (void)src;
            if (value.is_null()) continue;
            if (value.contains("p_kw")) deltas[bus] = value.at("p_kw").get<double>();
        }
    }
    model_.apply_setpoints(deltas);
    last_ = model_.step(time);
}

Json GridSimulator::get_data(const Json& request) {
    Json out = Json::object();
    for (const auto& [bus, attrs] : request.items()) {
        for (const auto& attr : attrs) {
            if (attr.get<std::string>() != "reading") continue;
            const auto& r = last_.buses.at(bus);
            out[bus]["reading"] = Json{{"v_pu", r.v_pu}, {"p_kw", r.p_kw}};
        }
    }
    return out;
}

}  // namespace gridloop::grid
