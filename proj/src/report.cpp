#include "gridloop/bench/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridloop/bench/svg.hpp"

namespace gridloop::bench {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

bool RunReport::all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const SelfCheck& c) { return c.passed; });
}

cosim::Json RunReport::to_json() const {
    cosim::Json j;
    j["kernel"] = {{"steps", kernel.steps}, {"exchanges", kernel.exchanges}};
    j["network"] = {{"injected", net.injected},
                    {"delivered", net.delivered},
                    {"lost_broken", net.lost_broken},
                    {"dropped_queue", net.dropped_queue},
                    {"unroutable", net.unroutable},
                    {"malformed", net.malformed},
                    {"in_flight", net.in_flight()}};
    for (const auto& [area, c] : net.per_area)
        j["network"]["areas"][area_name(area)] = {{"delivered", c.delivered},
                                                  {"lost_broken", c.lost_broken},
                                                  {"dropped_queue", c.dropped_queue}};
    for (const auto& m : measurements) {
        cosim::Json mj;
        mj["name"] = m.name;
        mj["unit"] = m.unit;
        mj["attempts"] = m.attempts;
        mj["successes"] = m.successes;
        mj["losses"] = m.losses;
        mj["failures"] = m.failures;
        for (const auto& a : m.per_count)
            mj["per_count"].push_back({{"node_count", a.node_count},
                                       {"n", a.n},
                                       {"mean", a.mean},
                                       {"sd", a.sd},
                                       {"min", a.min},
                                       {"max", a.max}});
        j["measurements"].push_back(std::move(mj));
    }
    for (const auto& c : checks)
        j["self_checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["vif_stats"] = vif_stats;
    j["wall_ms"] = wall_ms;
    j["wall_ms_per_sim_ms"] = wall_ms_per_sim_ms;
    j["sim_ms"] = sim_ms;
    return j;
}

std::string write_csv(const RunReport& report) {
    std::string out = "measurement,node_count,repeat,value,unit\n";
    for (const auto& m : report.measurements)
        for (const auto& r : m.rows)
            out += r.measurement + "," + std::to_string(r.node_count) + "," +
                   std::to_string(r.repeat) + "," + format_double(r.value) + "," + r.unit + "\n";
    return out;
}

std::vector<Sample> parse_csv(const std::string& text) {
    std::vector<Sample> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    if (line != "measurement,node_count,repeat,value,unit")
        throw std::runtime_error("unexpected CSV header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Sample s;
        std::istringstream ls(line);
        std::string field;
        std::getline(ls, s.measurement, ',');
        std::getline(ls, field, ',');
        s.node_count = std::stoi(field);
        std::getline(ls, field, ',');
        s.repeat = std::stoi(field);
        std::getline(ls, field, ',');
        s.value = std::stod(field);
        std::getline(ls, s.unit, ',');
        rows.push_back(std::move(s));
    }
    return rows;
}

std::vector<Aggregate> aggregate_samples(const std::vector<Sample>& rows) {
    std::map<int, std::vector<double>> by_count;
    for (const auto& r : rows) by_count[r.node_count].push_back(r.value);
    std::vector<Aggregate> out;
    for (const auto& [count, values] : by_count) {
        Aggregate a;
        a.node_count = count;
        a.n = values.size();
        a.min = *std::min_element(values.begin(), values.end());
        a.max = *std::max_element(values.begin(), values.end());
        double sum = 0;
        for (double v : values) sum += v;
        a.mean = sum / double(values.size());
        double ss = 0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.sd = values.size() > 1 ? std::sqrt(ss / double(values.size() - 1)) : 0.0;
        out.push_back(a);
    }
    return out;
}

void emit_outputs(const RunReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw std::runtime_error("cannot create output dir: " + dir);

    auto write_file = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + name + " in " + dir);
        out << content;
    };
    write_file("report.csv", write_csv(report));
    write_file("report.json", report.to_json().dump(2) + "\n");

    auto plot_for = [&](const std::string& name, const std::string& unit) {
        std::vector<PlotPoint> points;
        for (const auto& m : report.measurements)
            if (m.name == name)
                for (const auto& a : m.per_count)
                    points.push_back({double(a.node_count), a.mean, a.sd});
        return svg_line_plot(name + " vs node count", "node count", unit, points);
    };
    write_file("rtt.svg", plot_for("rtt", "ms"));
    write_file("throughput.svg", plot_for("bulk_throughput", "kB/s"));
}

}  // namespace gridloop::bench
