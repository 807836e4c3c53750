#include "gridloop/bench/runner.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace gridloop::bench {

using cosim::SimTime;

std::string default_bin_dir() {
    char buf[4096];
    ssize_t n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (n <= 0) return ".";
    buf[n] = 0;
    return std::filesystem::path(buf).parent_path().string();
}

namespace {

bool rx_nonempty(const Json& attrs) {
    if (!attrs.contains("rx")) return false;
    for (const auto& [src, value] : attrs.at("rx").items()) {
        (void)src;
        if (value.is_array() && !value.empty()) return true;
    }
    return false;
}

}  // namespace

/// In-process "application simulators": one entity per app. Readings are
/// written to the app's control channel and setpoints collected back; "go"
/// commands from the measurement drivers ride the same step. In lockstep
/// runs every poked app is settled (sync/idle) before its traffic is pushed
/// onward, which is what makes repeat runs bit-identical.
class AppControlSim : public cosim::Simulator {
public:
    explicit AppControlSim(ScenarioRuntime& runtime) : runtime_(runtime) {}

    cosim::SimulatorMeta init(const std::string&, const Json&) override {
        cosim::SimulatorMeta meta;
        meta.models["App"] = cosim::ModelMeta{{"reading"}, {"setpoint"}};
        return meta;
    }

    std::vector<cosim::EntityDescr> create(int num, const std::string& model,
                                           const Json& params) override {
        auto names = params.at("names").get<std::vector<std::string>>();
        if (model != "App" || int(names.size()) != num)
            throw std::runtime_error("App entities need one app name each");
        std::vector<cosim::EntityDescr> out;
        for (const auto& n : names) out.push_back({n, "App"});
        return out;
    }

    void step(SimTime, const Json& inputs) override {
        std::set<std::string> to_settle;
        for (const auto& [name, attrs] : inputs.items()) {
            if (!attrs.contains("reading")) continue;
            for (const auto& [src, value] : attrs.at("reading").items()) {
                (void)src;
                if (value.is_null()) continue;
                runtime_.send_control(name, "reading " + value.dump());
                to_settle.insert(name);
            }
        }
        for (auto& [name, go] : runtime_.take_gos()) {
            runtime_.send_control(name, "go " + go.dump());
            to_settle.insert(name);
        }
        if (!runtime_.lockstep()) return;
        for (const auto& name : to_settle) {
            runtime_.control_sync(name);
            runtime_.flush_vif(name);
        }
    }

    Json get_data(const Json& request) override {
        Json out = Json::object();
        for (const auto& [name, attrs] : request.items()) {
            for (const auto& attr : attrs) {
                if (attr.get<std::string>() != "setpoint") continue;
                if (auto sp = runtime_.take_setpoint(name)) out[name]["setpoint"] = *sp;
            }
        }
        return out;
    }

private:
    ScenarioRuntime& runtime_;
};

// --------------------------------------------------------------------------
// Measurement drivers

namespace {

/// Fires one echo round per repeat: all active pairs ping at the same step,
/// the sample is the event-log round trip (request transit + reply transit,
/// simulated ms). Timeouts count as losses and never enter the mean.
class RttDriver : public MeasurementDriver {
public:
    RttDriver(ScenarioRuntime& r, const MeasurementSpec& m) : r_(r), m_(m) {
        out_.name = m_.name();
        out_.unit = "ms";
    }

    bool done() const override { return count_idx_ >= m_.pair_counts.size(); }

    void pre_step(SimTime t) override {
        if (done() || phase_ != Phase::Fire) return;
        const int count = m_.pair_counts[count_idx_];
        round_.clear();
        for (int i = 0; i < count; ++i) {
            const auto& [client, server] = m_.pairs[size_t(i)];
            r_.queue_go(client, Json{{"target", io::format_ipv4(r_.app_ip(server))},
                                     {"seq", seq_},
                                     {"payload", m_.payload_bytes}});
            round_.push_back(Pending{r_.app_ip(client), r_.app_ip(server), {}, {}});
        }
        round_start_ = r_.topology().records().size();
        fired_at_ = t;
        phase_ = Phase::Wait;
    }

    void post_step(SimTime t) override {
        if (done()) return;
        if (phase_ == Phase::Gap) {
            if (t >= gap_until_) phase_ = Phase::Fire;
            return;
        }
        if (phase_ != Phase::Wait) return;
        // Outcomes are written into the log in place when packets land, so
        // the round's slice is rescanned each step.
        const auto& records = r_.topology().records();
        for (auto& p : round_) p.request_transit = p.reply_transit = std::nullopt;
        for (size_t i = round_start_; i < records.size(); ++i) {
            const auto& rec = records[i];
            if (rec.outcome != netsim::PacketOutcome::Delivered) continue;
            if (rec.info.protocol != 1 || rec.info.ident != seq_) continue;
            for (auto& p : round_) {
                if (rec.info.src_ip == p.client_ip && rec.info.dst_ip == p.server_ip)
                    p.request_transit = rec.transit_ms();
                else if (rec.info.src_ip == p.server_ip && rec.info.dst_ip == p.client_ip)
                    p.reply_transit = rec.transit_ms();
            }
        }
        bool complete = std::all_of(round_.begin(), round_.end(), [](const Pending& p) {
            return p.request_transit && p.reply_transit;
        });
        if (!complete && t - fired_at_ < m_.timeout_ms) return;
        finalize_round(t);
    }

    void finish(SimTime t) override {
        if (phase_ == Phase::Wait) finalize_round(t);
        while (!done()) {  // rounds never attempted count as losses
            const int count = m_.pair_counts[count_idx_];
            out_.attempts += uint64_t(count);
            out_.losses += uint64_t(count);
            advance();
        }
    }

    MeasurementReport take_report() override {
        out_.per_count = aggregate_samples(out_.rows);
        return std::move(out_);
    }

private:
    struct Pending {
        uint32_t client_ip, server_ip;
        std::optional<double> request_transit, reply_transit;
    };
    enum class Phase { Fire, Wait, Gap };

    void finalize_round(SimTime t) {
        const int count = m_.pair_counts[count_idx_];
        double sum = 0;
        int successes = 0;
        for (const auto& p : round_) {
            ++out_.attempts;
            if (p.request_transit && p.reply_transit) {
                sum += *p.request_transit + *p.reply_transit;
                ++successes;
                ++out_.successes;
            } else {
                ++out_.losses;
            }
        }
        if (successes > 0)
            out_.rows.push_back(Sample{out_.name, count, repeat_, sum / successes, "ms"});
        ++seq_;
        advance();
        phase_ = Phase::Gap;
        gap_until_ = t + m_.gap_ms;
    }

    void advance() {
        if (++repeat_ >= m_.repeats) {
            repeat_ = 0;
            ++count_idx_;
        }
    }

    ScenarioRuntime& r_;
    MeasurementSpec m_;
    MeasurementReport out_;
    size_t count_idx_ = 0;
    int repeat_ = 0;
    uint16_t seq_ = 1;
    Phase phase_ = Phase::Fire;
    SimTime fired_at_ = 0, gap_until_ = 0;
    std::vector<Pending> round_;
    size_t round_start_ = 0;
};

/// One windowed bulk transfer per pair per repeat, all active pairs
/// concurrently. Throughput = bytes_total / (last chunk delivery - first
/// chunk ingress), simulated time, so one sample per pair per repeat.
/// A transfer with no progress for stall_timeout_ms is a failed run.
class BulkDriver : public MeasurementDriver {
public:
    BulkDriver(ScenarioRuntime& r, const MeasurementSpec& m) : r_(r), m_(m) {
        out_.name = m_.name();
        out_.unit = "kB/s";
        total_chunks_ = uint32_t((m_.bytes_total + uint64_t(m_.chunk_bytes) - 1) /
                                 uint64_t(m_.chunk_bytes));
    }

    bool done() const override { return count_idx_ >= m_.pair_counts.size(); }

    void pre_step(SimTime t) override {
        if (done() || phase_ != Phase::Fire) return;
        const int count = m_.pair_counts[count_idx_];
        round_.clear();
        ++transfer_id_;
        for (int i = 0; i < count; ++i) {
            const auto& [sender, receiver] = m_.pairs[size_t(i)];
            r_.queue_go(sender, Json{{"target", io::format_ipv4(r_.app_ip(receiver))},
                                     {"bytes", m_.bytes_total},
                                     {"chunk", m_.chunk_bytes},
                                     {"window", m_.window_packets},
                                     {"transfer", transfer_id_}});
            Pending p;
            p.sender_ip = r_.app_ip(sender);
            p.receiver_ip = r_.app_ip(receiver);
            p.last_progress = t;
            round_.push_back(p);
        }
        round_start_ = r_.topology().records().size();
        fired_at_ = t;
        phase_ = Phase::Wait;
    }

    void post_step(SimTime t) override {
        if (done()) return;
        if (phase_ == Phase::Gap) {
            if (t >= gap_until_) phase_ = Phase::Fire;
            return;
        }
        if (phase_ != Phase::Wait) return;
        const auto& records = r_.topology().records();
        for (auto& p : round_) {
            uint32_t chunks = 0;
            std::optional<int64_t> first;
            double last = 0;
            for (size_t i = round_start_; i < records.size(); ++i) {
                const auto& rec = records[i];
                if (rec.outcome != netsim::PacketOutcome::Delivered) continue;
                if (rec.info.protocol != 17 || (rec.info.ident & 0x8000) != 0) continue;
                if (rec.info.src_ip != p.sender_ip || rec.info.dst_ip != p.receiver_ip) continue;
                ++chunks;
                if (!first) first = rec.ingress_ms;
                last = std::max(last, rec.delivered_ms);
            }
            if (chunks > p.chunks) p.last_progress = t;
            p.chunks = chunks;
            p.first_ingress = first;
            p.last_delivery = last;
        }
        bool all_settled = true;
        for (auto& p : round_) {
            if (p.chunks >= total_chunks_ || p.failed) continue;
            if (t - p.last_progress > m_.stall_timeout_ms)
                p.failed = true;
            else
                all_settled = false;
        }
        if (all_settled) finalize_round(t);
    }

    void finish(SimTime t) override {
        if (phase_ == Phase::Wait) {
            for (auto& p : round_)
                if (p.chunks < total_chunks_) p.failed = true;
            finalize_round(t);
        }
        while (!done()) {
            const int count = m_.pair_counts[count_idx_];
            out_.attempts += uint64_t(count);
            out_.failures += uint64_t(count);
            advance();
        }
    }

    MeasurementReport take_report() override {
        out_.per_count = aggregate_samples(out_.rows);
        return std::move(out_);
    }

    void add_checks(std::vector<SelfCheck>& checks) override {
        checks.push_back({"capacity_bound:" + m_.name(), bound_ok_,
                          "throughput never exceeds the slowest link on the path"});
    }

private:
    struct Pending {
        uint32_t sender_ip = 0, receiver_ip = 0;
        uint32_t chunks = 0;
        std::optional<int64_t> first_ingress;
        double last_delivery = 0;
        SimTime last_progress = 0;
        bool failed = false;
    };
    enum class Phase { Fire, Wait, Gap };

    double path_capacity_kBps(uint32_t src, uint32_t dst) {
        auto path = r_.topology().route(src, dst);
        if (!path || path->size() < 2) return 0;
        double min_rate = 1e18;
        auto edges = r_.topology().link_edges();
        for (size_t i = 0; i + 1 < path->size(); ++i) {
            for (const auto& e : edges)
                if ((e.a == (*path)[i] && e.b == (*path)[i + 1]) ||
                    (e.b == (*path)[i] && e.a == (*path)[i + 1]))
                    min_rate = std::min(min_rate, e.spec.data_rate_bps);
        }
        return min_rate / 8000.0;  // bits/s -> decimal kB/s
    }

    void finalize_round(SimTime t) {
        const int count = m_.pair_counts[count_idx_];
        double sum = 0;
        int successes = 0;
        for (const auto& p : round_) {
            ++out_.attempts;
            if (!p.failed && p.first_ingress && p.chunks >= total_chunks_) {
                double transfer_ms = p.last_delivery - double(*p.first_ingress);
                double kBps = double(m_.bytes_total) / transfer_ms;  // B/ms == kB/s
                bound_ok_ = bound_ok_ &&
                            kBps <= path_capacity_kBps(p.sender_ip, p.receiver_ip) * 1.000001;
                sum += kBps;
                ++successes;
                ++out_.successes;
            } else {
                ++out_.failures;
            }
        }
        if (successes > 0)
            out_.rows.push_back(Sample{out_.name, count, repeat_, sum / successes, "kB/s"});
        advance();
        phase_ = Phase::Gap;
        gap_until_ = t + m_.gap_ms;
    }

    void advance() {
        if (++repeat_ >= m_.repeats) {
            repeat_ = 0;
            ++count_idx_;
        }
    }

    ScenarioRuntime& r_;
    MeasurementSpec m_;
    MeasurementReport out_;
    uint32_t total_chunks_ = 0;
    uint32_t transfer_id_ = 0;
    size_t count_idx_ = 0;
    int repeat_ = 0;
    Phase phase_ = Phase::Fire;
    SimTime fired_at_ = 0, gap_until_ = 0;
    std::vector<Pending> round_;
    size_t round_start_ = 0;
    bool bound_ok_ = true;
};

}  // namespace

// --------------------------------------------------------------------------

ScenarioRuntime::ScenarioRuntime(ScenarioSpec spec, RunOptions opt)
    : spec_(std::move(spec)), opt_(std::move(opt)) {
    if (opt_.seed_override) spec_.seed = *opt_.seed_override;
    if (opt_.force_mux) spec_.mode = vif::VifSimConfig::Mode::Mux;
    if (opt_.bin_dir.empty()) opt_.bin_dir = default_bin_dir();
    for (const auto& a : spec_.apps) lockstep_ = lockstep_ && a.control;
    for (const auto& m : spec_.measurements)
        for (const auto& [c, s] : m.pairs)
            for (const auto& end : {c, s})
                if (const AppEntry* e = spec_.app(end); e && !e->control)
                    throw std::runtime_error("measurement pairs need control-speaking apps; \"" +
                                             end + "\" is not one");
}

ScenarioRuntime::~ScenarioRuntime() {
    if (world_) world_->stop_all();
    supervisor_.stop_all(1000);
}

std::string ScenarioRuntime::resolve_binary(const std::string& name) const {
    if (name.find('/') != std::string::npos) return name;
    auto candidate = std::filesystem::path(opt_.bin_dir) / name;
    if (std::filesystem::exists(candidate)) return candidate.string();
    return name;  // PATH lookup
}

ScenarioRuntime::AppProc& ScenarioRuntime::app_proc(const std::string& name) {
    for (auto& a : apps_)
        if (a.entry.name == name) return a;
    throw std::runtime_error("unknown app: " + name);
}

void ScenarioRuntime::queue_go(const std::string& app, const Json& go) {
    pending_gos_.emplace_back(app, go);
}

std::vector<std::pair<std::string, Json>> ScenarioRuntime::take_gos() {
    return std::exchange(pending_gos_, {});
}

std::optional<Json> ScenarioRuntime::take_setpoint(const std::string& app) {
    auto it = setpoints_.find(app);
    if (it == setpoints_.end()) return std::nullopt;
    Json v = std::move(it->second);
    setpoints_.erase(it);
    return v;
}

void ScenarioRuntime::send_control(const std::string& name, const std::string& line) {
    auto& proc = app_proc(name);
    if (!proc.app || !proc.entry.control) return;
    supervisor_.send_line(*proc.app, line);
}

void ScenarioRuntime::control_sync(const std::string& name) {
    auto& proc = app_proc(name);
    if (!proc.app || !proc.entry.control) return;
    supervisor_.send_line(*proc.app, "sync");
    auto deadline = io::deadline_in(opt_.control_timeout_ms);
    while (true) {
        auto line = supervisor_.read_line(*proc.app, deadline);
        if (!line) throw apps::DeadAppError(name + " (no idle reply)");
        if (*line == "idle") return;
        if (line->rfind("setpoint ", 0) == 0) {
            Json v = Json::parse(line->substr(9), nullptr, false);
            if (!v.is_discarded()) setpoints_[name] = std::move(v);
        } else if (line->rfind("report ", 0) == 0) {
            Json v = Json::parse(line->substr(7), nullptr, false);
            if (!v.is_discarded()) proc.reports.push_back(std::move(v));
        }
    }
}

void ScenarioRuntime::flush_vif(const std::string& name) {
    auto& proc = app_proc(name);
    if (!proc.vif) return;
    supervisor_.send_line(*proc.vif, "flush");
    auto deadline = io::deadline_in(opt_.control_timeout_ms);
    while (true) {
        auto line = supervisor_.read_line(*proc.vif, deadline);
        if (!line) throw apps::DeadAppError("vif:" + name + " (no flush reply)");
        if (*line == "flushed") return;
    }
}

void ScenarioRuntime::build() {
    netsim::Topology topo = netsim::Topology::build(spec_.net_plan());
    for (const auto& entry : spec_.apps) {
        AppProc proc;
        proc.entry = entry;
        proc.ip = topo.nodes()[topo.node_by_name(entry.name)].ip;
        apps_.push_back(std::move(proc));
    }

    cosim::WorldConfig wcfg;
    wcfg.listen = opt_.kernel_listen.value_or(io::Endpoint::loopback(0));
    world_ = std::make_unique<cosim::World>(wcfg);

    // Registration order pins the topological tie-break:
    // grid -> app control -> vif-sims -> netsim.
    if (spec_.grid) {
        grid::GridModel model(spec_.grid->root, spec_.grid->buses, spec_.grid->lines);
        auto sim = std::make_unique<grid::GridSimulator>(std::move(model));
        grid_ = sim.get();
        auto handle = world_->register_simulator("grid", std::move(sim));
        std::vector<std::string> bus_ids;
        for (const auto& b : spec_.grid->buses) bus_ids.push_back(b.id);
        world_->create(handle, int(bus_ids.size()), "Bus", Json{{"buses", bus_ids}});
    }
    {
        auto handle = world_->register_simulator("apps", std::make_unique<AppControlSim>(*this));
        std::vector<std::string> names;
        for (const auto& a : apps_) names.push_back(a.entry.name);
        auto entities = world_->create(handle, int(names.size()), "App", Json{{"names", names}});
        for (size_t i = 0; i < apps_.size(); ++i) apps_[i].app_entity = entities[i];
    }

    launch_vifsims();

    {
        auto sim = std::make_unique<netsim::NetworkSimulator>(std::move(topo));
        netsim_ = sim.get();
        auto handle = world_->register_simulator("ict", std::move(sim));
        std::vector<std::string> names;
        for (const auto& a : apps_) names.push_back(a.entry.name);
        auto entities =
            world_->create(handle, int(names.size()), "NetworkNode", Json{{"names", names}});
        for (size_t i = 0; i < apps_.size(); ++i) apps_[i].gw_entity = entities[i];
    }

    launch_vifs_and_apps();
    wire();
    install_barriers();
}

void ScenarioRuntime::launch_vifsims() {
    const auto kernel_ep = world_->listener_endpoint();
    const std::string vifsim_bin = resolve_binary("vif-sim");

    // The runner pre-binds every socket and hands fds to the children: no
    // port races, and container attribution is pinned by source address.
    auto spawn_vifsim = [&](const std::string& proc_name, int udp_fd, const char* mode) {
        apps::LaunchSpec spec;
        spec.name = proc_name;
        spec.argv = {vifsim_bin, "--kernel", kernel_ep.to_string(),
                     "--listen-fd", "3", "--mode", mode};
        spec.inherit_fds = {{3, udp_fd}};
        spec.pipe_stdio = false;
        supervisor_.start(spec);
    };
    auto bind_tunnel = [&](AppProc& a) {
        auto t = io::UdpSocket::bind(io::Endpoint::loopback(0), "runner-vif-tunnel");
        a.vif_tunnel_ep = t.local_endpoint();
        tunnel_keep_.push_back(std::move(t));
    };

    if (spec_.mode == vif::VifSimConfig::Mode::Mux) {
        auto udp = io::UdpSocket::bind(io::Endpoint::loopback(0), "runner-vifsim-mux");
        udp.set_recv_buffer(4 << 20);
        for (auto& a : apps_) a.vifsim_ep = udp.local_endpoint();
        spawn_vifsim("vifsim:mux", udp.fd(), "mux");
        auto handle = world_->register_remote("vifsim-mux");
        vifsim_names_.push_back("vifsim-mux");

        std::vector<std::string> peers;
        for (auto& a : apps_) {
            bind_tunnel(a);
            peers.push_back(a.vif_tunnel_ep.to_string());
            a.vifsim_name = "vifsim-mux";
        }
        auto entities = world_->create(handle, int(apps_.size()), "vif", Json{{"peers", peers}});
        for (size_t i = 0; i < apps_.size(); ++i) apps_[i].vif_entity = entities[i];
    } else {
        for (auto& a : apps_) {
            auto udp = io::UdpSocket::bind(io::Endpoint::loopback(0), "runner-vifsim");
            udp.set_recv_buffer(4 << 20);
            a.vifsim_ep = udp.local_endpoint();
            a.vifsim_name = "vifsim-" + a.entry.name;
            spawn_vifsim("vifsim:" + a.entry.name, udp.fd(), "per-container");
            auto handle = world_->register_remote(a.vifsim_name);
            vifsim_names_.push_back(a.vifsim_name);

            bind_tunnel(a);
            a.vif_entity = world_->create(handle, 1, "vif",
                                          Json{{"peers", {a.vif_tunnel_ep.to_string()}}})[0];
        }
    }
}

void ScenarioRuntime::launch_vifs_and_apps() {
    const std::string vif_bin = resolve_binary("vif");
    for (size_t i = 0; i < apps_.size(); ++i) {
        auto& a = apps_[i];
        auto device = io::UdpSocket::bind(io::Endpoint::loopback(0), "runner-vif-device");
        device.set_recv_buffer(4 << 20);
        a.vif_device_ep = device.local_endpoint();

        apps::LaunchSpec vif_spec;
        vif_spec.name = "vif:" + a.entry.name;
        vif_spec.argv = {vif_bin,
                         "--peer", a.vifsim_ep.to_string(),
                         "--tunnel-fd", "3",
                         "--device-fd", "4",
                         "--transport", opt_.real_tun ? "tun" : "loopback",
                         "--buffer-limit", std::to_string(a.entry.buffer_limit)};
        vif_spec.inherit_fds = {{3, tunnel_keep_[i].fd()}, {4, device.fd()}};
        a.vif = &supervisor_.start(vif_spec);

        apps::LaunchSpec app_spec;
        app_spec.name = a.entry.name;
        app_spec.argv = a.entry.command;
        app_spec.argv[0] = resolve_binary(app_spec.argv[0]);
        app_spec.env = a.entry.env;
        app_spec.env["VIF_PEER"] = a.vif_device_ep.to_string();
        app_spec.env["VIF_IP"] = io::format_ipv4(a.ip);
        app_spec.pipe_stdio = a.entry.control;
        a.app = &supervisor_.start(app_spec);
    }
    tunnel_keep_.clear();  // children own the fds now
}

void ScenarioRuntime::wire() {
    for (auto& a : apps_) {
        world_->connect(a.vif_entity, a.gw_entity, {"tx", "rx"});
        world_->connect(a.gw_entity, a.vif_entity, {"tx", "rx"}, true, Json{{"tx", nullptr}});
        if (spec_.grid && a.entry.grid_bus) {
            cosim::EntityId bus{"grid", *a.entry.grid_bus};
            world_->connect(bus, a.app_entity, {"reading", "reading"});
            world_->connect(a.app_entity, bus, {"setpoint", "setpoint"}, true,
                            Json{{"setpoint", nullptr}});
        }
    }
}

void ScenarioRuntime::install_barriers() {
    std::map<std::string, std::vector<std::string>> served;  // vif-sim -> its apps
    for (const auto& a : apps_) served[a.vifsim_name].push_back(a.entry.name);
    for (const auto& [sim_name, app_names] : served) {
        world_->set_barrier_hook(sim_name, [this, names = app_names](SimTime, const Json& inputs) {
            if (!lockstep_) return;
            std::vector<std::string> triggered;
            for (const auto& name : names) {
                auto it = inputs.find(app_proc(name).vif_entity.path);
                if (it != inputs.end() && rx_nonempty(*it)) triggered.push_back(name);
            }
            if (triggered.empty()) return;
            for (const auto& n : triggered) flush_vif(n);     // tunnel payloads -> devices
            for (const auto& n : triggered) control_sync(n);  // apps react
            for (const auto& n : triggered) flush_vif(n);     // reactions -> vif-sim
        });
    }
}

void ScenarioRuntime::await_readiness() {
    auto deadline = io::deadline_in(opt_.readiness_timeout_ms);
    for (auto& a : apps_) {
        if (a.entry.control) {
            std::optional<std::string> line;
            do {
                line = supervisor_.read_line(*a.app, deadline);
            } while (line && *line != "hello");
            if (!line) throw apps::DeadAppError(a.entry.name + " (no hello)");
        }
        std::optional<std::string> line;
        do {
            line = supervisor_.read_line(*a.vif, deadline);
        } while (line && line->rfind("ready", 0) != 0);
        if (!line) throw apps::DeadAppError("vif:" + a.entry.name + " (not ready)");
    }
    while (true) {  // all tunnels alive: hello acked by the vif-sim
        bool all_live = true;
        for (auto& a : apps_) {
            supervisor_.send_line(*a.vif, "stats");
            std::optional<std::string> line;
            do {
                line = supervisor_.read_line(*a.vif, deadline);
            } while (line && line->rfind("stats ", 0) != 0);
            if (!line) throw apps::DeadAppError("vif:" + a.entry.name + " (no stats)");
            Json stats = Json::parse(line->substr(6), nullptr, false);
            all_live = all_live && stats.value("peer_live", false);
        }
        if (all_live) return;
        if (io::Clock::now() > deadline)
            throw std::runtime_error("tunnels did not come alive before the readiness timeout");
        ::usleep(20000);
    }
}

std::unique_ptr<MeasurementDriver> ScenarioRuntime::make_driver(const MeasurementSpec& m) {
    if (m.kind == MeasurementSpec::Kind::Rtt) return std::make_unique<RttDriver>(*this, m);
    return std::make_unique<BulkDriver>(*this, m);
}

RunReport ScenarioRuntime::run() {
    build();
    await_readiness();

    RunReport report;
    auto wall_start = io::Clock::now();

    for (const auto& m : spec_.measurements) {
        auto driver = make_driver(m);
        while (!driver->done() && world_->now() < spec_.duration_ms) {
            driver->pre_step(world_->now());
            world_->step_until(world_->now() + 1);
            driver->post_step(world_->now());
        }
        driver->finish(world_->now());
        report.measurements.push_back(driver->take_report());
        driver->add_checks(report.checks);
        // Let trailing deliveries reach the applications (one step for the
        // time-shifted edge, one for the settle barrier).
        world_->step_until(std::min<SimTime>(world_->now() + 3, spec_.duration_ms));
    }
    if (spec_.measurements.empty()) world_->step_until(spec_.duration_ms);

    auto wall_end = io::Clock::now();
    report.kernel = world_->stats();
    report.sim_ms = world_->now();
    report.net = netsim_->topology().counters();
    report.wall_ms =
        std::chrono::duration_cast<std::chrono::microseconds>(wall_end - wall_start).count() /
        1000.0;
    report.wall_ms_per_sim_ms = report.sim_ms > 0 ? report.wall_ms / double(report.sim_ms) : 0.0;

    for (auto& a : apps_) {
        if (!a.vif || !supervisor_.alive(*a.vif)) continue;
        try {
            supervisor_.send_line(*a.vif, "stats");
            auto deadline = io::deadline_in(opt_.control_timeout_ms);
            std::optional<std::string> line;
            do {
                line = supervisor_.read_line(*a.vif, deadline);
            } while (line && line->rfind("stats ", 0) != 0);
            if (line) {
                Json parsed = Json::parse(line->substr(6), nullptr, false);
                if (!parsed.is_discarded()) report.vif_stats[a.entry.name] = std::move(parsed);
            }
        } catch (const std::exception&) {
        }
    }

    world_->stop_all();
    for (auto& a : apps_) {
        if (a.app && a.entry.control && supervisor_.alive(*a.app)) {
            try {
                supervisor_.send_line(*a.app, "quit");
            } catch (...) {
            }
        }
    }
    supervisor_.stop_all(2000);
    final_checks(report);

    if (!opt_.out_dir.empty()) emit_outputs(report, opt_.out_dir);
    return report;
}

void ScenarioRuntime::final_checks(RunReport& report) {
    auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        report.checks.push_back({name, ok, detail});
    };

    const auto& c = report.net;
    uint64_t accounted = c.delivered + c.lost_broken + c.dropped_queue + c.unroutable +
                         c.malformed + c.in_flight();
    add("conservation", accounted == c.injected,
        "injected=" + std::to_string(c.injected) + " accounted=" + std::to_string(accounted));

    for (const auto& m : report.measurements) {
        bool ok = m.successes + m.losses + m.failures == m.attempts;
        add("sample_accounting:" + m.name, ok,
            std::to_string(m.successes) + "+" + std::to_string(m.losses) + "+" +
                std::to_string(m.failures) + " == " + std::to_string(m.attempts));
    }

    uint64_t echo_reports = 0, mismatches = 0;
    for (const auto& a : apps_)
        for (const auto& r : a.reports)
            if (r.value("kind", "") == "echo-reply") {
                ++echo_reports;
                if (!r.value("match", false)) ++mismatches;
            }
    add("payload_integrity", mismatches == 0,
        std::to_string(echo_reports) + " echo replies, " + std::to_string(mismatches) +
            " mismatched");

    bool polling_ok = true;
    for (const auto& n : vifsim_names_)
        polling_ok = polling_ok && world_->polls(n) == report.kernel.steps;
    add("vifsim_polling", polling_ok, "one get_data per vif-sim per step");

    // Event-log arithmetic: delivery time equals ingress plus the logged
    // per-hop components, summed in simulation order (exact when the FIFO
    // clamp never engaged).
    bool exact = true;
    for (const auto& rec : netsim_->topology().records()) {
        if (rec.outcome != netsim::PacketOutcome::Delivered) continue;
        double acc = double(rec.ingress_ms);
        bool clamped = false;
        for (const auto& h : rec.hops) {
            acc = ((acc + h.queue_wait_ms) + h.serialization_ms) + h.delay_ms;
            acc = acc + h.fifo_wait_ms;
            clamped = clamped || h.fifo_wait_ms > 0;
        }
        if (std::abs(acc - rec.delivered_ms) > (clamped ? 1e-9 : 0.0)) exact = false;
    }
    add("event_log_sum", exact, "delivery == ingress + sum(per-hop components)");

    size_t vif_streams = 0, vifs_reporting = 0;
    for (const auto& [app, stats] : report.vif_stats.items()) {
        (void)app;
        ++vifs_reporting;
        for (const auto& sock : stats.value("sockets", Json::array()))
            if (sock.value("kind", "") != "dgram") ++vif_streams;
    }
    add("datagram_only_tunnel", vif_streams == 0 && vifs_reporting == apps_.size(),
        std::to_string(vifs_reporting) + " vifs reporting, " + std::to_string(vif_streams) +
            " non-datagram sockets");

    size_t leftover = supervisor_.live_count();
    add("no_orphans", leftover == 0, std::to_string(leftover) + " children alive after stop");
}

}  // namespace gridloop::bench
