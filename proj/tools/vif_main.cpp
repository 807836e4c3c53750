// The userspace bridge running beside one application: captures all of its
// traffic via a tun device (or the loopback test transport) and tunnels it
// to the vif-sim over datagrams. Never opens a stream toward the vif-sim.

#include <cstdio>

#include <CLI11.hpp>

#include "gridloop/vif/vif_daemon.hpp"

using namespace gridloop;

int main(int argc, char** argv) {
    CLI::App cli{"vif: tunnels application traffic between a virtual network "
                 "device and its vif-sim"};
    vif::VifConfig cfg;
    std::string peer, transport = "loopback", device_bind = "127.0.0.1:0";
    int tunnel_fd = -1, device_fd = -1;

    cli.add_option("--peer", peer, "vif-sim endpoint, addr:port")->required();
    cli.add_option("--transport", transport)->check(CLI::IsMember({"tun", "loopback"}));
    cli.add_option("--buffer-limit", cfg.buffer_limit_bytes,
                   "bytes buffered while the peer is not yet alive");
    cli.add_option("--hello-count", cfg.hello_count);
    cli.add_option("--hello-interval-ms", cfg.hello_interval_ms);
    cli.add_option("--hello-retry-ms", cfg.hello_retry_ms);
    cli.add_option("--tunnel-fd", tunnel_fd, "pre-bound tunnel socket fd");
    cli.add_option("--device-fd", device_fd, "pre-bound loopback device socket fd");
    cli.add_option("--device-bind", device_bind, "loopback device bind address");
    cli.add_option("--tun-name", cfg.tun_name);
    cli.add_option("--tun-addr", cfg.tun_addr_cidr, "address/prefix for the tun device");
    cli.add_flag("--tun-default-route", cfg.tun_default_route);
    cli.add_option("--tun-exclude-route", cfg.tun_exclude_route,
                   "route keeping the simulator path off the tun device");
    CLI11_PARSE(cli, argc, argv);

    cfg.transport = transport == "tun" ? vif::VifConfig::Transport::Tun
                                       : vif::VifConfig::Transport::Loopback;
    cfg.peer = io::Endpoint::parse(peer);
    if (tunnel_fd >= 0) cfg.tunnel_fd = tunnel_fd;
    if (device_fd >= 0) cfg.device_fd = device_fd;
    cfg.device_bind = io::Endpoint::parse(device_bind);

    try {
        vif::VifDaemon daemon(std::move(cfg));
        daemon.run();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vif: %s\n", e.what());
        return 1;
    }
    return 0;
}
