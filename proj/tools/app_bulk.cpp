// Deterministic bulk-transfer pair standing in for iPerf: the sender pushes
// windows of UDP chunks, the receiver returns a cumulative ack per window.
// Chunk headers are self-describing, so the receiver needs no setup. No
// retransmission: a lost chunk stalls the transfer, which the measurement
// harness records as a failed run.

#include <CLI11.hpp>

#include "app_shell.hpp"
#include "gridloop/netsim/craft.hpp"
#include "gridloop/netsim/packet.hpp"

using namespace gridloop;
namespace craft = netsim::craft;

namespace {

constexpr uint32_t kMagicData = 0x47424c44;  // "GBLD"
constexpr uint32_t kMagicAck = 0x47424c41;   // "GBLA"

void put32(std::vector<uint8_t>& v, size_t off, uint32_t x) {
    v[off] = uint8_t(x >> 24);
    v[off + 1] = uint8_t(x >> 16);
    v[off + 2] = uint8_t(x >> 8);
    v[off + 3] = uint8_t(x);
}
uint32_t get32(std::span<const uint8_t> v, size_t off) {
    return uint32_t(v[off]) << 24 | uint32_t(v[off + 1]) << 16 | uint32_t(v[off + 2]) << 8 |
           v[off + 3];
}

struct Transfer {
    uint32_t id = 0;
    uint32_t target = 0;
    uint32_t total = 0;
    uint32_t window = 0;
    uint32_t chunk_payload = 0;
    uint32_t next_to_send = 0;
    uint32_t acked = 0;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"bulk transfer test app (sender / receiver)"};
    std::string mode = "receiver";
    cli.add_option("--mode", mode)->check(CLI::IsMember({"sender", "receiver"}));
    CLI11_PARSE(cli, argc, argv);

    apps_sil::AppShell shell;
    Transfer tx;                                   // sender state
    std::map<uint32_t, uint32_t> rx_prefix;        // receiver: transfer -> chunks received
    std::map<uint32_t, uint32_t> rx_last_acked;

    auto send_chunk = [&](uint32_t seq) {
        // 20-byte header + fill; self-describing.
        std::vector<uint8_t> payload(tx.chunk_payload);
        put32(payload, 0, kMagicData);
        put32(payload, 4, tx.id);
        put32(payload, 8, seq);
        put32(payload, 12, tx.total);
        put32(payload, 16, tx.window);
        for (size_t i = 20; i < payload.size(); ++i) payload[i] = uint8_t(seq + i);
        shell.send_packet(craft::ipv4_udp(shell.my_ip(), tx.target, uint16_t(seq), 33000, 33001,
                                          payload));
    };

    shell.on_go = [&](const apps_sil::Json& go) {
        if (mode != "sender" || !go.is_object()) return;
        tx.id = go.at("transfer").get<uint32_t>();
        tx.target = *io::parse_ipv4(go.at("target").get<std::string>());
        uint32_t bytes_total = go.at("bytes").get<uint32_t>();
        tx.chunk_payload = go.value("chunk", 1400u);
        if (tx.chunk_payload < 20) tx.chunk_payload = 20;
        tx.window = go.value("window", 32u);
        tx.total = (bytes_total + tx.chunk_payload - 1) / tx.chunk_payload;
        tx.next_to_send = 0;
        tx.acked = 0;
        while (tx.next_to_send < std::min(tx.total, tx.window)) send_chunk(tx.next_to_send++);
    };

    shell.on_packet = [&](std::vector<uint8_t> bytes) {
        auto info = netsim::parse_packet(bytes);
        if (!info || info->version != 4 || info->protocol != 17 || bytes.size() < 28 + 12) return;
        std::span<const uint8_t> payload(bytes.data() + 28, bytes.size() - 28);
        uint32_t magic = get32(payload, 0);

        if (mode == "receiver" && magic == kMagicData && payload.size() >= 20) {
            uint32_t transfer = get32(payload, 4);
            uint32_t seq = get32(payload, 8);
            uint32_t total = get32(payload, 12);
            uint32_t window = get32(payload, 16);
            uint32_t& prefix = rx_prefix[transfer];
            if (seq == prefix) ++prefix;  // in-order path; anything else stalls
            bool boundary = prefix == total || (window > 0 && prefix % window == 0);
            if (boundary && prefix != rx_last_acked[transfer]) {
                rx_last_acked[transfer] = prefix;
                std::vector<uint8_t> ack(12);
                put32(ack, 0, kMagicAck);
                put32(ack, 4, transfer);
                put32(ack, 8, prefix);
                shell.send_packet(craft::ipv4_udp(shell.my_ip(), info->src_ip,
                                                  uint16_t(0x8000 | prefix), 33001, 33000, ack));
                if (prefix == total)
                    shell.say("report {\"kind\":\"transfer-complete\",\"transfer\":" +
                              std::to_string(transfer) + ",\"chunks\":" + std::to_string(total) +
                              "}");
            }
        } else if (mode == "sender" && magic == kMagicAck) {
            uint32_t transfer = get32(payload, 4);
            uint32_t acked = get32(payload, 8);
            if (transfer != tx.id || acked <= tx.acked) return;
            tx.acked = acked;
            while (tx.next_to_send < std::min(tx.total, tx.acked + tx.window))
                send_chunk(tx.next_to_send++);
            if (tx.acked == tx.total)
                shell.say("report {\"kind\":\"transfer-done\",\"transfer\":" +
                          std::to_string(transfer) + "}");
        }
    };

    return shell.run();
}
