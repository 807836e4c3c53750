// Simulation-side adapter: one process per container by default, or one
// multiplexed process serving many containers (--mode mux).

#include <cstdio>

#include <CLI11.hpp>

#include "gridloop/vif/vifsim_daemon.hpp"

using namespace gridloop;

int main(int argc, char** argv) {
    CLI::App cli{"vif-sim: announces containers, reassembles tunnel streams "
                 "into IP packets, speaks the co-simulation protocol"};
    std::string kernel, listen = "127.0.0.1:0", mode = "per-container";
    int listen_fd = -1;
    vif::VifSimConfig cfg;

    cli.add_option("--kernel", kernel, "co-simulation kernel endpoint")->required();
    cli.add_option("--listen", listen, "tunnel listen address");
    cli.add_option("--listen-fd", listen_fd, "pre-bound tunnel socket fd");
    cli.add_option("--mode", mode)->check(CLI::IsMember({"per-container", "mux"}));
    cli.add_option("--recv-buffer", cfg.recv_buffer_bytes);
    CLI11_PARSE(cli, argc, argv);

    cfg.kernel = io::Endpoint::parse(kernel);
    cfg.listen = io::Endpoint::parse(listen);
    if (listen_fd >= 0) cfg.listen_fd = listen_fd;
    cfg.mode = mode == "mux" ? vif::VifSimConfig::Mode::Mux
                             : vif::VifSimConfig::Mode::PerContainer;

    try {
        vif::VifSimDaemon daemon(std::move(cfg));
        return daemon.run_process();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vif-sim: %s\n", e.what());
        return 1;
    }
}
