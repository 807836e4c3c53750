// Scenario runner: assembles the co-simulation world from a scenario file,
// runs it with the software-in-the-loop pipeline, and writes report.csv,
// report.json, rtt.svg and throughput.svg.

#include <cstdio>

#include <CLI11.hpp>

#include "gridloop/bench/runner.hpp"

using namespace gridloop;

namespace {

int validate_only(const std::string& path) {
    std::vector<std::string> errors;
    bench::ScenarioSpec::load(path, errors);
    if (errors.empty()) {
        std::printf("ok: %s\n", path.c_str());
        return 0;
    }
    for (const auto& e : errors) std::fprintf(stderr, "error: %s\n", e.c_str());
    std::fprintf(stderr, "%zu validation error(s)\n", errors.size());
    return 1;
}

int run(const std::string& path, bench::RunOptions opt) {
    std::vector<std::string> errors;
    auto spec = bench::ScenarioSpec::load(path, errors);
    if (!errors.empty()) {
        for (const auto& e : errors) std::fprintf(stderr, "error: %s\n", e.c_str());
        return 1;
    }
    try {
        bench::ScenarioRuntime runtime(std::move(spec), std::move(opt));
        bench::RunReport report = runtime.run();
        for (const auto& m : report.measurements) {
            for (const auto& a : m.per_count)
                std::printf("%s nodes=%d n=%zu mean=%s %s sd=%s\n", m.name.c_str(), a.node_count,
                            a.n, bench::format_double(a.mean).c_str(), m.unit.c_str(),
                            bench::format_double(a.sd).c_str());
        }
        bool ok = true;
        for (const auto& c : report.checks) {
            std::printf("check %-28s %s  (%s)\n", c.name.c_str(), c.passed ? "pass" : "FAIL",
                        c.detail.c_str());
            ok = ok && c.passed;
        }
        std::printf("steps=%llu exchanges=%llu wall_ms=%.1f wall_ms_per_sim_ms=%.4f\n",
                    (unsigned long long)report.kernel.steps,
                    (unsigned long long)report.kernel.exchanges, report.wall_ms,
                    report.wall_ms_per_sim_ms);
        return ok ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"gridloop: software-in-the-loop co-simulation test bed"};
    cli.require_subcommand(1);

    std::string scenario, out_dir = "out", kernel_listen;
    uint64_t seed = 0;
    bool have_seed = false, mux = false, real_tun = false;

    auto* run_cmd = cli.add_subcommand("run", "run a scenario and write reports");
    run_cmd->add_option("scenario", scenario, "scenario file (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) {
        have_seed = true;
    });
    run_cmd->add_flag("--mux", mux, "one multiplexed vif-sim process for all containers");
    run_cmd->add_option("--kernel-listen", kernel_listen,
                        "TCP listener for external simulators (addr:port)");
    run_cmd->add_flag("--real-tun", real_tun, "use the kernel tun device (needs privileges)");

    auto* validate_cmd = cli.add_subcommand("validate", "check a scenario file");
    validate_cmd->add_option("scenario", scenario, "scenario file (JSON)")->required();

    CLI11_PARSE(cli, argc, argv);

    if (validate_cmd->parsed()) return validate_only(scenario);

    bench::RunOptions opt;
    opt.out_dir = out_dir;
    if (!kernel_listen.empty()) opt.kernel_listen = io::Endpoint::parse(kernel_listen);
    if (have_seed) opt.seed_override = seed;
    opt.force_mux = mux;
    opt.real_tun = real_tun;
    return run(scenario, std::move(opt));
}
