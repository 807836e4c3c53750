#include "gridloop/bench/scenario.hpp"

#include <fstream>
#include <set>

#include "gridloop/io/net.hpp"

namespace gridloop::bench {

namespace {

std::optional<netsim::DelayModel> parse_delay(AreaKind area, const Json& j,
                                              std::vector<std::string>& errors,
                                              const std::string& where) {
    netsim::DelayModel model = netsim::DelayModel::defaults(area);
    try {
        switch (area) {
            case AreaKind::Dedicated: {
                netsim::DedicatedParams p;
                p.base_ms = j.value("base_ms", p.base_ms);
                p.scale_ms = j.value("scale_ms", p.scale_ms);
                p.rate = j.value("rate", p.rate);
                model.params = p;
                break;
            }
            case AreaKind::SharedLinks: {
                netsim::SharedParams p;
                p.mean_ms = j.value("mean_ms", p.mean_ms);
                p.sd_ms = j.value("sd_ms", p.sd_ms);
                model.params = p;
                break;
            }
            case AreaKind::HighImpairment: {
                netsim::HighImpairmentParams p;
                p.min_ms = j.value("min_ms", p.min_ms);
                p.max_ms = j.value("max_ms", p.max_ms);
                p.p_break = j.value("p_break", p.p_break);
                model.params = p;
                break;
            }
        }
        model.validate();
        return model;
    } catch (const std::exception& e) {
        errors.push_back(where + ": " + e.what());
        return std::nullopt;
    }
}

std::optional<netsim::LinkSpec> parse_link_spec(AreaKind area, const Json& j,
                                                std::vector<std::string>& errors,
                                                const std::string& where) {
    netsim::LinkSpec spec;
    spec.area = area;
    spec.delay = netsim::DelayModel::defaults(area);
    spec.data_rate_bps = area == AreaKind::HighImpairment ? 100e6 : 1e9;
    spec.data_rate_bps = j.value("data_rate_bps", spec.data_rate_bps);
    spec.queue_capacity = j.value("queue_capacity", spec.queue_capacity);
    if (j.contains("delay")) {
        auto model = parse_delay(area, j.at("delay"), errors, where + ".delay");
        if (!model) return std::nullopt;
        spec.delay = *model;
    }
    return spec;
}

}  // namespace

const AppEntry* ScenarioSpec::app(const std::string& name) const {
    for (const auto& a : apps)
        if (a.name == name) return &a;
    return nullptr;
}

ScenarioSpec ScenarioSpec::parse(const Json& doc, std::vector<std::string>& errors) {
    ScenarioSpec spec;
    if (!doc.is_object()) {
        errors.push_back("scenario must be a JSON object");
        return spec;
    }

    if (!doc.contains("seed") || !doc["seed"].is_number_integer() ||
        (doc["seed"].is_number_integer() && !doc["seed"].is_number_unsigned() &&
         doc["seed"].get<int64_t>() < 0))
        errors.push_back("seed: required (non-negative integer); runs must be reproducible");
    else
        spec.seed = doc["seed"].get<uint64_t>();

    if (!doc.contains("duration_ms") || !doc["duration_ms"].is_number_integer() ||
        doc["duration_ms"].get<int64_t>() <= 0)
        errors.push_back("duration_ms: required positive integer");
    else
        spec.duration_ms = doc["duration_ms"].get<int64_t>();

    std::string mode = doc.value("mode", "per-container");
    if (mode == "mux")
        spec.mode = vif::VifSimConfig::Mode::Mux;
    else if (mode != "per-container")
        errors.push_back("mode: must be \"per-container\" or \"mux\"");

    std::set<std::string> subnet_names;
    for (const auto& s : doc.value("subnets", Json::array())) {
        SubnetEntry e;
        e.name = s.value("name", "");
        if (e.name.empty()) errors.push_back("subnets[]: name required");
        if (!subnet_names.insert(e.name).second)
            errors.push_back("subnets[]: duplicate name \"" + e.name + "\"");
        auto area = area_from_name(s.value("area", ""));
        if (!area) {
            errors.push_back("subnet \"" + e.name + "\": unknown area \"" +
                             s.value("area", "") + "\"");
            continue;
        }
        e.area = *area;
        e.index = s.value("index", 0u);
        if (e.index >= addr::SubnetPlan::kSubnetsPerArea)
            errors.push_back("subnet \"" + e.name + "\": index must be < 4096");
        e.routers = s.value("routers", 1);
        if (e.routers < 1) errors.push_back("subnet \"" + e.name + "\": needs >= 1 router");
        if (s.contains("link"))
            e.link = parse_link_spec(e.area, s.at("link"), errors, "subnet " + e.name);
        spec.subnets.push_back(std::move(e));
    }
    if (spec.subnets.empty()) errors.push_back("subnets: at least one subnet required");

    for (const auto& l : doc.value("links", Json::array())) {
        LinkEntry e;
        e.a = l.value("a", "");
        e.b = l.value("b", "");
        if (!subnet_names.count(e.a) || !subnet_names.count(e.b))
            errors.push_back("link " + e.a + "<->" + e.b + ": unknown subnet");
        auto area = area_from_name(l.value("area", ""));
        if (!area) {
            errors.push_back("link " + e.a + "<->" + e.b + ": unknown area");
            continue;
        }
        auto link = parse_link_spec(*area, l, errors, "link " + e.a + "<->" + e.b);
        if (!link) continue;
        e.link = *link;
        spec.links.push_back(std::move(e));
    }

    std::set<std::string> app_names;
    for (const auto& a : doc.value("apps", Json::array())) {
        AppEntry e;
        e.name = a.value("name", "");
        if (e.name.empty()) errors.push_back("apps[]: name required");
        if (!app_names.insert(e.name).second)
            errors.push_back("apps[]: duplicate name \"" + e.name + "\"");
        e.subnet = a.value("subnet", "");
        if (!subnet_names.count(e.subnet))
            errors.push_back("app \"" + e.name + "\": unknown subnet \"" + e.subnet + "\"");
        e.command = a.value("command", std::vector<std::string>{});
        if (e.command.empty()) errors.push_back("app \"" + e.name + "\": command required");
        if (a.contains("env"))
            for (const auto& [k, v] : a.at("env").items()) e.env[k] = v.get<std::string>();
        e.control = a.value("control", true);
        e.shutdown_grace_ms = a.value("shutdown_grace_ms", 2000);
        e.buffer_limit = a.value("buffer_limit", size_t(1) << 20);
        if (a.contains("grid_bus")) e.grid_bus = a.at("grid_bus").get<std::string>();
        if (a.contains("ip")) {
            auto ip = io::parse_ipv4(a.at("ip").get<std::string>());
            if (!ip)
                errors.push_back("app \"" + e.name + "\": bad ip");
            else
                e.pinned_ip = *ip;
        }
        spec.apps.push_back(std::move(e));
    }

    if (doc.contains("grid")) {
        const auto& g = doc.at("grid");
        GridSection section;
        section.root = g.value("root", "");
        for (const auto& b : g.value("buses", Json::array())) {
            grid::BusSpec bus;
            bus.id = b.value("id", "");
            bus.base_load_kw = b.value("base_load_kw", 0.0);
            bus.apps = b.value("apps", std::vector<std::string>{});
            for (const auto& bound : bus.apps)
                if (!app_names.count(bound))
                    errors.push_back("grid bus \"" + bus.id + "\": unknown app \"" + bound + "\"");
            section.buses.push_back(std::move(bus));
        }
        for (const auto& l : g.value("lines", Json::array()))
            section.lines.push_back(grid::LineSpec{l.value("from", ""), l.value("to", ""),
                                                   l.value("capacity_kw", 0.0)});
        try {
            grid::GridModel probe(section.root, section.buses, section.lines);
        } catch (const std::exception& e) {
            errors.push_back(std::string("grid: ") + e.what());
        }
        spec.grid = std::move(section);
        for (const auto& a : spec.apps)
            if (a.grid_bus) {
                bool found = false;
                for (const auto& b : spec.grid->buses) found = found || b.id == *a.grid_bus;
                if (!found)
                    errors.push_back("app \"" + a.name + "\": unknown grid_bus \"" + *a.grid_bus +
                                     "\"");
            }
    } else {
        for (const auto& a : spec.apps)
            if (a.grid_bus)
                errors.push_back("app \"" + a.name + "\": grid_bus given but no grid section");
    }

    for (const auto& m : doc.value("measurements", Json::array())) {
        MeasurementSpec e;
        std::string kind = m.value("kind", "");
        if (kind == "rtt") {
            e.kind = MeasurementSpec::Kind::Rtt;
        } else if (kind == "bulk_throughput") {
            e.kind = MeasurementSpec::Kind::BulkThroughput;
        } else {
            errors.push_back("measurements[]: unknown kind \"" + kind + "\"");
            continue;
        }
        for (const auto& p : m.value("pairs", Json::array())) {
            if (!p.is_array() || p.size() != 2) {
                errors.push_back(e.name() + ": each pair is [client, server]");
                continue;
            }
            std::string c = p[0].get<std::string>(), s = p[1].get<std::string>();
            for (const auto& end : {c, s})
                if (!app_names.count(end))
                    errors.push_back(e.name() + ": unknown app \"" + end + "\"");
            e.pairs.emplace_back(c, s);
        }
        if (e.pairs.empty()) errors.push_back(e.name() + ": at least one pair required");
        e.repeats = m.value("repeats", 1);
        if (e.repeats < 1) errors.push_back(e.name() + ": repeats must be >= 1");
        e.pair_counts = m.value("pair_counts", std::vector<int>{int(e.pairs.size())});
        for (int c : e.pair_counts)
            if (c < 1 || c > int(e.pairs.size()))
                errors.push_back(e.name() + ": pair_counts entries must be in [1, pairs]");
        e.payload_bytes = m.value("payload_bytes", e.payload_bytes);
        if (e.payload_bytes < 8 || e.payload_bytes > 65000)
            errors.push_back(e.name() + ": payload_bytes out of range");
        e.timeout_ms = m.value("timeout_ms", e.timeout_ms);
        e.gap_ms = m.value("gap_ms", e.gap_ms);
        e.bytes_total = m.value("bytes_total", e.bytes_total);
        if (e.bytes_total < 1) errors.push_back(e.name() + ": bytes_total must be >= 1");
        e.chunk_bytes = m.value("chunk_bytes", e.chunk_bytes);
        if (e.chunk_bytes < 28 || e.chunk_bytes > 65000)
            errors.push_back(e.name() + ": chunk_bytes out of range");
        e.window_packets = m.value("window_packets", e.window_packets);
        if (e.window_packets < 1) errors.push_back(e.name() + ": window_packets must be >= 1");
        e.stall_timeout_ms = m.value("stall_timeout_ms", e.stall_timeout_ms);
        spec.measurements.push_back(std::move(e));
    }

    return spec;
}

ScenarioSpec ScenarioSpec::load(const std::string& path, std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) {
        errors.push_back("cannot open scenario file: " + path);
        return {};
    }
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        errors.push_back("scenario file is not valid JSON: " + path);
        return {};
    }
    return parse(doc, errors);
}

netsim::NetPlan ScenarioSpec::net_plan() const {
    netsim::NetPlan plan;
    plan.seed = seed;
    for (const auto& s : subnets)
        plan.subnets.push_back({s.name, s.area, s.index, s.routers, s.link});
    for (const auto& a : apps) plan.hosts.push_back({a.name, a.subnet, true, a.pinned_ip});
    for (const auto& l : links) plan.backbones.push_back({l.a, l.b, l.link});
    return plan;
}

}  // namespace gridloop::bench
