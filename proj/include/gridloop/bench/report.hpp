#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridloop/cosim/world.hpp"
#include "gridloop/netsim/topology.hpp"

namespace gridloop::bench {

struct Sample {
    std::string measurement;
    int node_count = 0;
    int repeat = 0;
    double value = 0;
    std::string unit;
};

struct Aggregate {
    int node_count = 0;
    size_t n = 0;
    double mean = 0, sd = 0, min = 0, max = 0;
};

struct MeasurementReport {
    std::string name;
    std::string unit;
    std::vector<Sample> rows;          // one row per (node_count, repeat)
    std::vector<Aggregate> per_count;  // over the rows of each count
    uint64_t attempts = 0;             // pair-level: repeats x pairs summed over counts
    uint64_t successes = 0;
    uint64_t losses = 0;               // timeouts / broken paths
    uint64_t failures = 0;             // stalled transfers
};

struct SelfCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct RunReport {
    cosim::StepStats kernel;
    netsim::Counters net;
    std::vector<MeasurementReport> measurements;
    std::vector<SelfCheck> checks;
    cosim::Json vif_stats = cosim::Json::object();  // per-app vif counters + socket kinds
    double wall_ms = 0;
    double wall_ms_per_sim_ms = 0;
    int64_t sim_ms = 0;

    bool all_checks_passed() const;
    cosim::Json to_json() const;
};

// Deterministic float text (shortest round-trip form).
std::string format_double(double v);

std::string write_csv(const RunReport& report);
std::vector<Sample> parse_csv(const std::string& text);
std::vector<Aggregate> aggregate_samples(const std::vector<Sample>& rows);

void emit_outputs(const RunReport& report, const std::string& dir);

}  // namespace gridloop::bench
