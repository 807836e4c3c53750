#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridloop/cosim/simulator.hpp"

namespace gridloop::grid {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BusSpec {
    std::string id;
    double base_load_kw = 0;
    std::vector<std::string> apps;  // app names bound to this bus
};

struct LineSpec {
    std::string from;  // toward the root
    std::string to;
    double capacity_kw = 0;
};

struct Reading {
    double v_pu = 1.0;
    double p_kw = 0.0;
};

/// Deliberately simple radial bus/line model: line flow is the sum of
/// downstream net loads, and the voltage reading is a documented toy rule
/// (1 - 0.01 * feeding-line loading, floored at 0.9). Its only job is giving
/// software-in-the-loop apps readings that react to their setpoints.
class GridModel {
public:
    GridModel(std::string root, std::vector<BusSpec> buses, std::vector<LineSpec> lines);

    void apply_setpoints(const std::map<std::string, double>& p_kw_delta_by_bus);

    struct StepResult {
        std::map<std::string, Reading> buses;
        std::map<std::string, double> line_loading;  // "from->to"
    };
    StepResult step(int64_t t_ms);

    const std::vector<BusSpec>& buses() const { return buses_; }
    double net_load_kw(const std::string& bus) const;

private:
    std::string root_;
    std::vector<BusSpec> buses_;
    std::vector<LineSpec> lines_;
    std::map<std::string, size_t> bus_index_;
    std::map<std::string, double> delta_;
    std::map<std::string, std::vector<size_t>> children_;  // bus -> line indices below it
};

/// Kernel adapter: one entity per bus, attribute "reading" out (v_pu, p_kw)
/// and "setpoint" in ({"p_kw": delta}).
class GridSimulator : public cosim::Simulator {
public:
    explicit GridSimulator(GridModel model) : model_(std::move(model)) {}

    GridModel& model() { return model_; }

    cosim::SimulatorMeta init(const std::string&, const cosim::Json&) override;
    std::vector<cosim::EntityDescr> create(int num, const std::string& model,
                                           const cosim::Json& params) override;
    void step(cosim::SimTime time, const cosim::Json& inputs) override;
    cosim::Json get_data(const cosim::Json& request) override;

private:
    GridModel model_;
    GridModel::StepResult last_;
};

}  // namespace gridloop::grid
