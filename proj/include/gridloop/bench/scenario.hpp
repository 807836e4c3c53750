#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridloop/grid/grid.hpp"
#include "gridloop/netsim/topology.hpp"
#include "gridloop/vif/vifsim_daemon.hpp"

namespace gridloop::bench {

using Json = cosim::Json;

struct MeasurementSpec {
    enum class Kind { Rtt, BulkThroughput };
    Kind kind = Kind::Rtt;
    std::vector<std::pair<std::string, std::string>> pairs;  // (client, server)
    std::vector<int> pair_counts;  // sweep; defaults to {pairs.size()}
    int repeats = 1;
    // rtt
    int payload_bytes = 1400;
    int64_t timeout_ms = 20000;
    int64_t gap_ms = 2;
    // bulk
    uint64_t bytes_total = 65536;
    int chunk_bytes = 1400;
    int window_packets = 32;
    int64_t stall_timeout_ms = 30000;

    std::string name() const { return kind == Kind::Rtt ? "rtt" : "bulk_throughput"; }
};

struct AppEntry {
    std::string name;
    std::string subnet;
    std::vector<std::string> command;
    std::map<std::string, std::string> env;
    bool control = true;  // bundled deterministic app speaking the control protocol
    std::optional<std::string> grid_bus;
    int shutdown_grace_ms = 2000;
    size_t buffer_limit = 1 << 20;
    std::optional<uint32_t> pinned_ip;
};

struct SubnetEntry {
    std::string name;
    AreaKind area = AreaKind::Dedicated;
    uint32_t index = 0;
    int routers = 1;
    std::optional<netsim::LinkSpec> link;
};

struct LinkEntry {
    std::string a, b;
    netsim::LinkSpec link;
};

struct GridSection {
    std::string root;
    std::vector<grid::BusSpec> buses;
    std::vector<grid::LineSpec> lines;
};

/// One run, declaratively: areas and links, subnets, apps, an optional grid,
/// and the measurement jobs. The seed is mandatory; identical spec + seed
/// reproduces the identical report with the bundled apps.
struct ScenarioSpec {
    uint64_t seed = 0;
    int64_t duration_ms = 0;
    vif::VifSimConfig::Mode mode = vif::VifSimConfig::Mode::PerContainer;
    std::vector<SubnetEntry> subnets;
    std::vector<LinkEntry> links;
    std::vector<AppEntry> apps;
    std::optional<GridSection> grid;
    std::vector<MeasurementSpec> measurements;

    // Collects every problem instead of stopping at the first.
    static ScenarioSpec parse(const Json& doc, std::vector<std::string>& errors);
    static ScenarioSpec load(const std::string& path, std::vector<std::string>& errors);

    netsim::NetPlan net_plan() const;
    const AppEntry* app(const std::string& name) const;
};

}  // namespace gridloop::bench
