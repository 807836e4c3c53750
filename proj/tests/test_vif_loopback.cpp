#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridloop/io/net.hpp"
#include "gridloop/netsim/craft.hpp"
#include "gridloop/netsim/packet.hpp"
#include "gridloop/vif/base64.hpp"
#include "gridloop/vif/reassembly.hpp"
#include "gridloop/vif/vif_daemon.hpp"
#include "gridloop/vif/vifsim_daemon.hpp"

using namespace gridloop;
using namespace gridloop::vif;
namespace craft = netsim::craft;

namespace {

// Stands in for the simulation side: reassembles the tunnel stream and
// reflects ICMP echo requests, like the real path would end to end.
struct FakePeer {
    io::UdpSocket socket = io::UdpSocket::bind(io::Endpoint::loopback(0), "test-peer");
    FrameBuffer buffer;
    std::optional<io::Endpoint> vif_addr;
    std::vector<std::vector<uint8_t>> packets;
    bool ack_hellos = true;

    io::Endpoint endpoint() const { return socket.local_endpoint(); }

    void pump() {
        while (auto dgram = socket.recv()) {
            if (dgram->data.empty()) {
                vif_addr = dgram->from;
                if (ack_hellos) socket.send_to({}, dgram->from);
                continue;
            }
            vif_addr = dgram->from;
            for (auto& p : buffer.feed(dgram->data)) packets.push_back(std::move(p));
        }
    }

    void reflect_echoes() {
        for (auto& p : packets) {
            auto info = netsim::parse_packet(p);
            if (!info || info->protocol != 1) continue;
            std::span<const uint8_t> payload(p.data() + 28, p.size() - 28);
            auto reply = craft::ipv4_icmp_echo(false, info->dst_ip, info->src_ip, info->ident, 1,
                                               info->ident, payload);
            socket.send_to(reply, *vif_addr);
        }
        packets.clear();
    }
};

struct FakeApp {
    io::UdpSocket socket = io::UdpSocket::bind(io::Endpoint::loopback(0), "test-app");
    std::vector<std::vector<uint8_t>> received;

    void attach(io::Endpoint device) {
        socket.connect(device);
        socket.send({});  // announce
    }
    void send_ping(uint16_t seq) {
        std::vector<uint8_t> payload(56, uint8_t(seq));
        socket.send(craft::ipv4_icmp_echo(true, 0x0a400002, 0x0a400102, seq, 1, seq, payload));
    }
    void pump() {
        while (auto dgram = socket.recv())
            if (!dgram->data.empty()) received.push_back(std::move(dgram->data));
    }
};

VifConfig test_config(io::Endpoint peer) {
    VifConfig cfg;
    cfg.peer = peer;
    cfg.control_stdio = false;
    cfg.hello_interval_ms = 10;
    cfg.hello_retry_ms = 50;
    return cfg;
}

void spin(VifDaemon& vif, int iterations = 5) {
    for (int i = 0; i < iterations; ++i) vif.poll_once(1);
}

}  // namespace

TEST_CASE("pings sent before the peer answers are buffered, then all delivered") {
    FakePeer peer;
    peer.ack_hellos = false;  // "vif-sim not yet launched": nothing comes back

    VifDaemon vif(test_config(peer.endpoint()));
    FakeApp app;
    app.attach(vif.device_endpoint());

    for (uint16_t seq = 1; seq <= 3; ++seq) app.send_ping(seq);
    auto hold_until = io::Clock::now() + std::chrono::milliseconds(300);
    while (io::Clock::now() < hold_until) {
        vif.poll_once(5);
        while (auto d = peer.socket.recv()) CHECK(d->data.empty());  // hellos only, dropped
    }
    CHECK(vif.stats().peer_live == false);
    CHECK(vif.stats().buffered_now > 0);
    CHECK(vif.stats().hello_bursts >= 1);  // burst exhausted and retried

    peer.ack_hellos = true;  // the vif-sim "starts"
    for (int i = 0; i < 200 && app.received.size() < 3; ++i) {
        vif.poll_once(5);
        peer.pump();
        peer.reflect_echoes();
        app.pump();
    }
    REQUIRE(app.received.size() == 3);
    for (uint16_t seq = 1; seq <= 3; ++seq) {
        auto info = netsim::parse_packet(app.received[seq - 1]);
        REQUIRE(info.has_value());
        CHECK(info->ident == seq);
    }
    CHECK(vif.stats().buffer_dropped == 0);
}

TEST_CASE("a full buffer drops the oldest packets and counts them") {
    FakePeer peer;
    peer.ack_hellos = false;
    auto cfg = test_config(peer.endpoint());
    cfg.buffer_limit_bytes = 300;  // fits ~3 ping packets
    VifDaemon vif(cfg);
    FakeApp app;
    app.attach(vif.device_endpoint());
    for (uint16_t seq = 1; seq <= 10; ++seq) app.send_ping(seq);
    spin(vif, 20);
    CHECK(vif.stats().buffer_dropped == 7);
    CHECK(vif.stats().buffered_now <= 300);

    peer.ack_hellos = true;
    for (int i = 0; i < 100 && peer.packets.size() < 3; ++i) {
        vif.poll_once(5);
        peer.pump();
    }
    REQUIRE(peer.packets.size() == 3);  // oldest dropped, newest three survive
    CHECK(netsim::parse_packet(peer.packets[0])->ident == 8);
}

TEST_CASE("a data datagram also announces the container (no hello needed)") {
    VifSimConfig cfg;
    cfg.kernel = io::Endpoint::loopback(1);  // unused in-process
    VifSimDaemon vifsim(cfg);
    vifsim.init("vifsim-0", {});
    vifsim.create(1, "vif", cosim::Json::object());

    io::UdpSocket sender = io::UdpSocket::bind(io::Endpoint::loopback(0), "test-sender");
    std::vector<uint8_t> payload(16, 9);
    auto pkt = craft::ipv4_udp(0x0a400002, 0x0a400103, 4, 10, 20, payload);
    sender.send_to(pkt, vifsim.listen_endpoint());
    io::wait_readable(vifsim.tunnel_fd(), io::deadline_in(2000));
    vifsim.drain_udp();

    auto data = vifsim.get_data(cosim::Json{{"vif-0", {"tx"}}});
    REQUIRE(data["vif-0"]["tx"].size() == 1);
    // and the adoption was acked so the vif goes live
    auto ack = sender.recv();
    REQUIRE(ack.has_value());
    CHECK(ack->data.empty());
}

TEST_CASE("unknown source with unparsable data is dropped and counted") {
    VifSimConfig cfg;
    cfg.kernel = io::Endpoint::loopback(1);
    cfg.mode = VifSimConfig::Mode::Mux;
    VifSimDaemon vifsim(cfg);
    vifsim.init("vifsim-mux", {});
    vifsim.create(1, "vif", cosim::Json{{"peers", {"127.0.0.1:65000"}}});  // pinned elsewhere

    io::UdpSocket stranger = io::UdpSocket::bind(io::Endpoint::loopback(0), "test-stranger");
    std::vector<uint8_t> junk = {0x00, 0x13, 0x37};
    stranger.send_to(junk, vifsim.listen_endpoint());
    io::wait_readable(vifsim.tunnel_fd(), io::deadline_in(2000));
    vifsim.drain_udp();
    CHECK(vifsim.stats().unknown_dropped == 1);
    CHECK(vifsim.stats().packets_assembled == 0);
}

TEST_CASE("per-container vif-sim returns assembled packets per poll") {
    VifSimConfig cfg;
    cfg.kernel = io::Endpoint::loopback(1);
    VifSimDaemon vifsim(cfg);
    vifsim.init("vifsim-0", {});
    vifsim.create(1, "vif", cosim::Json::object());

    io::UdpSocket tun = io::UdpSocket::bind(io::Endpoint::loopback(0), "test-tunnel");
    tun.send_to({}, vifsim.listen_endpoint());  // hello
    std::vector<uint8_t> payload(32, 1);
    auto pkt = craft::ipv4_udp(0x0a400002, 0x0a400103, 7, 10, 20, payload);
    // stream bytes split across two datagrams: reassembly on the vif-sim side
    std::vector<uint8_t> first(pkt.begin(), pkt.begin() + 13);
    std::vector<uint8_t> second(pkt.begin() + 13, pkt.end());
    tun.send_to(first, vifsim.listen_endpoint());
    tun.send_to(second, vifsim.listen_endpoint());
    io::wait_readable(vifsim.tunnel_fd(), io::deadline_in(2000));
    vifsim.drain_udp();

    auto data = vifsim.get_data(cosim::Json{{"vif-0", {"tx"}}});
    REQUIRE(data["vif-0"]["tx"].size() == 1);
    auto b64 = data["vif-0"]["tx"][0].get<std::string>();
    CHECK(*base64_decode(b64) == pkt);

    // next poll returns nothing new
    auto again = vifsim.get_data(cosim::Json{{"vif-0", {"tx"}}});
    CHECK(again["vif-0"]["tx"].empty());
}

TEST_CASE("mux vif-sim attributes traffic to containers by source address") {
    VifSimConfig cfg;
    cfg.kernel = io::Endpoint::loopback(1);
    cfg.mode = VifSimConfig::Mode::Mux;
    VifSimDaemon vifsim(cfg);
    vifsim.init("vifsim-mux", {});

    io::UdpSocket tun_a = io::UdpSocket::bind(io::Endpoint::loopback(0), "test-tunnel-a");
    io::UdpSocket tun_b = io::UdpSocket::bind(io::Endpoint::loopback(0), "test-tunnel-b");
    vifsim.create(2, "vif",
                  cosim::Json{{"peers", {tun_a.local_endpoint().to_string(),
                                         tun_b.local_endpoint().to_string()}}});

    std::vector<uint8_t> pa(8, 0xaa), pb(8, 0xbb);
    auto pkt_a = craft::ipv4_udp(0x0a400002, 0x0a400103, 1, 10, 20, pa);
    auto pkt_b = craft::ipv4_udp(0x0a400003, 0x0a400104, 2, 10, 20, pb);
    tun_a.send_to(pkt_a, vifsim.listen_endpoint());
    tun_b.send_to(pkt_b, vifsim.listen_endpoint());
    io::wait_readable(vifsim.tunnel_fd(), io::deadline_in(2000));
    vifsim.drain_udp();

    auto data = vifsim.get_data(cosim::Json{{"vif-0", {"tx"}}, {"vif-1", {"tx"}}});
    REQUIRE(data["vif-0"]["tx"].size() == 1);
    REQUIRE(data["vif-1"]["tx"].size() == 1);
    CHECK(*base64_decode(data["vif-0"]["tx"][0].get<std::string>()) == pkt_a);
    CHECK(*base64_decode(data["vif-1"]["tx"][0].get<std::string>()) == pkt_b);

    // rx goes back out to the right container
    cosim::Json inputs;
    inputs["vif-1"]["rx"]["ict.gw"] = cosim::Json::array({base64_encode(pkt_a)});
    vifsim.step(0, inputs);
    auto got = tun_b.recv();
    REQUIRE(got.has_value());
    CHECK(got->data == pkt_a);
    CHECK(!tun_a.recv().has_value());
}

TEST_CASE("the tunnel path opens datagram sockets only") {
    // Everything the vif and vif-sim create for the tunnel/device path in
    // this process must be datagram; streams may exist only toward the
    // kernel (none are opened in this test).
    size_t streams_before = io::SocketInventory::count(io::SocketKind::Stream, "vif");
    FakePeer peer;
    VifDaemon vif(test_config(peer.endpoint()));
    VifSimConfig cfg;
    cfg.kernel = io::Endpoint::loopback(1);
    VifSimDaemon vifsim(cfg);
    CHECK(io::SocketInventory::count(io::SocketKind::Stream, "vif") == streams_before);
    CHECK(io::SocketInventory::count(io::SocketKind::Datagram, "vif-tunnel") >= 1);
    CHECK(io::SocketInventory::count(io::SocketKind::Datagram, "vifsim-tunnel") >= 1);
}
