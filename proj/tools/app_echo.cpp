// Deterministic stand-in for ping: the pinger crafts ICMP echo requests on
// "go", the responder reflects them byte for byte. Payload patterns are
// derived from the sequence number so the pinger can verify replies.

#include <signal.h>

#include <map>

#include <CLI11.hpp>

#include "app_shell.hpp"
#include "gridloop/netsim/craft.hpp"
#include "gridloop/netsim/packet.hpp"

using namespace gridloop;
namespace craft = netsim::craft;

namespace {

std::vector<uint8_t> pattern(uint16_t seq, size_t len) {
    std::vector<uint8_t> out(len);
    for (size_t i = 0; i < len; ++i) out[i] = uint8_t(seq * 131 + i * 31 + 7);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"echo test app (pinger / responder)"};
    std::string mode = "responder";
    bool ignore_sigterm = false;
    cli.add_option("--mode", mode)->check(CLI::IsMember({"pinger", "responder"}));
    cli.add_flag("--ignore-sigterm", ignore_sigterm);
    CLI11_PARSE(cli, argc, argv);

    apps_sil::AppShell shell;
    if (ignore_sigterm) ::signal(SIGTERM, SIG_IGN);  // after the shell installs its handler
    std::map<uint16_t, std::vector<uint8_t>> outstanding;

    shell.on_go = [&](const apps_sil::Json& go) {
        if (mode != "pinger" || !go.is_object()) return;
        uint32_t target = *io::parse_ipv4(go.at("target").get<std::string>());
        uint16_t seq = go.at("seq").get<uint16_t>();
        size_t len = go.value("payload", 56);
        auto payload = pattern(seq, len);
        outstanding[seq] = payload;
        shell.send_packet(craft::ipv4_icmp_echo(true, shell.my_ip(), target, seq, 1, seq, payload));
    };

    shell.on_packet = [&](std::vector<uint8_t> bytes) {
        auto info = netsim::parse_packet(bytes);
        if (!info || info->version != 4 || info->protocol != 1 || bytes.size() < 28) return;
        uint8_t icmp_type = bytes[20];
        uint16_t icmp_seq = uint16_t(bytes[26]) << 8 | bytes[27];
        std::span<const uint8_t> payload(bytes.data() + 28, bytes.size() - 28);

        if (mode == "responder" && icmp_type == 8) {
            shell.send_packet(craft::ipv4_icmp_echo(false, info->dst_ip, info->src_ip, info->ident,
                                                    1, icmp_seq, payload));
        } else if (mode == "pinger" && icmp_type == 0) {
            auto it = outstanding.find(icmp_seq);
            bool match = it != outstanding.end() &&
                         std::equal(payload.begin(), payload.end(), it->second.begin(),
                                    it->second.end());
            if (it != outstanding.end()) outstanding.erase(it);
            shell.say("report {\"kind\":\"echo-reply\",\"seq\":" + std::to_string(icmp_seq) +
                      ",\"match\":" + (match ? "true" : "false") +
                      ",\"bytes\":" + std::to_string(bytes.size()) + "}");
        }
    };

    return shell.run();
}
