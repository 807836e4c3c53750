#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridloop/apps/supervisor.hpp"
#include "gridloop/bench/report.hpp"
#include "gridloop/bench/scenario.hpp"
#include "gridloop/cosim/world.hpp"
#include "gridloop/grid/grid.hpp"
#include "gridloop/netsim/sim.hpp"

namespace gridloop::bench {

struct RunOptions {
    std::string out_dir;                    // empty: do not write files
    std::optional<io::Endpoint> kernel_listen;  // default: an ephemeral loopback port
    std::optional<uint64_t> seed_override;
    bool force_mux = false;
    bool real_tun = false;
    std::string bin_dir;                    // where vif / vif-sim / bundled apps live
    int readiness_timeout_ms = 20000;
    int control_timeout_ms = 15000;
    bool verbose = false;
};

std::string default_bin_dir();  // directory of the running executable

class MeasurementDriver;

/// Assembles and runs one scenario: in-process netsim/grid/app-control
/// simulators, out-of-process vif-sims, one vif and one application process
/// per app entry, all joined through the kernel. With bundled (control-
/// speaking) apps the run is driven in lockstep barriers, which is what the
/// reproducibility guarantee rests on.
class ScenarioRuntime {
public:
    ScenarioRuntime(ScenarioSpec spec, RunOptions opt);
    ~ScenarioRuntime();

    RunReport run();

    // Surface used by the control simulator and the measurement drivers.
    struct AppProc {
        AppEntry entry;
        apps::ChildProcess* app = nullptr;
        apps::ChildProcess* vif = nullptr;
        std::string vifsim_name;
        cosim::EntityId vif_entity, gw_entity, app_entity;
        uint32_t ip = 0;
        io::Endpoint vif_tunnel_ep, vif_device_ep, vifsim_ep;
        std::vector<Json> reports;
    };

    void queue_go(const std::string& app, const Json& go);
    std::vector<std::pair<std::string, Json>> take_gos();
    void send_control(const std::string& app, const std::string& line);
    void control_sync(const std::string& app);
    void flush_vif(const std::string& app);
    std::optional<Json> take_setpoint(const std::string& app);

    netsim::Topology& topology() { return netsim_->topology(); }
    grid::GridSimulator* grid_sim() { return grid_; }
    uint32_t app_ip(const std::string& name) { return app_proc(name).ip; }
    AppProc& app_proc(const std::string& name);
    const std::vector<AppProc>& app_procs() const { return apps_; }
    bool lockstep() const { return lockstep_; }

private:
    void build();
    void launch_vifsims();
    void launch_vifs_and_apps();
    void wire();
    void install_barriers();
    void await_readiness();
    std::unique_ptr<MeasurementDriver> make_driver(const MeasurementSpec& m);
    void final_checks(RunReport& report);
    std::string resolve_binary(const std::string& name) const;

    ScenarioSpec spec_;
    RunOptions opt_;
    apps::Supervisor supervisor_;
    std::unique_ptr<cosim::World> world_;
    netsim::NetworkSimulator* netsim_ = nullptr;  // owned by the world
    grid::GridSimulator* grid_ = nullptr;         // owned by the world
    std::vector<AppProc> apps_;
    std::vector<io::UdpSocket> tunnel_keep_;  // alive until the vifs own them
    std::vector<std::string> vifsim_names_;
    std::vector<std::pair<std::string, Json>> pending_gos_;
    std::map<std::string, Json> setpoints_;
    bool lockstep_ = true;
};

/// One measurement job; stepped alongside the world.
class MeasurementDriver {
public:
    virtual ~MeasurementDriver() = default;
    virtual void pre_step(cosim::SimTime t) = 0;
    virtual void post_step(cosim::SimTime t) = 0;
    virtual bool done() const = 0;
    // Called once stepping ends (normally or at the duration limit);
    // unfinished attempts become failures.
    virtual void finish(cosim::SimTime t) = 0;
    virtual MeasurementReport take_report() = 0;
    virtual void add_checks(std::vector<SelfCheck>&) {}
};

}  // namespace gridloop::bench
