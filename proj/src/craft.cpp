#include "gridloop/netsim/craft.hpp"

namespace gridloop::netsim::craft {

namespace {
void put16(std::vector<uint8_t>& v, size_t off, uint16_t x) {
    v[off] = uint8_t(x >> 8);
    v[off + 1] = uint8_t(x);
}
void put32(std::vector<uint8_t>& v, size_t off, uint32_t x) {
    v[off] = uint8_t(x >> 24);
    v[off + 1] = uint8_t(x >> 16);
    v[off + 2] = uint8_t(x >> 8);
    v[off + 3] = uint8_t(x);
}
}  // namespace

uint16_t internet_checksum(std::span<const uint8_t> data) {
    uint32_t sum = 0;
    for (size_t i = 0; i + 1 < data.size(); i += 2) sum += (uint32_t(data[i]) << 8) | data[i + 1];
    if (data.size() % 2) sum += uint32_t(data.back()) << 8;
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return uint16_t(~sum);
}

std::vector<uint8_t> ipv4(uint8_t protocol, uint16_t ident, uint32_t src_ip, uint32_t dst_ip,
                          std::span<const uint8_t> payload) {
    std::vector<uint8_t> pkt(20 + payload.size());
    pkt[0] = 0x45;
    put16(pkt, 2, uint16_t(pkt.size()));
    put16(pkt, 4, ident);
    pkt[8] = 64;  // ttl
    pkt[9] = protocol;
    put32(pkt, 12, src_ip);
    put32(pkt, 16, dst_ip);
    put16(pkt, 10, internet_checksum({pkt.data(), 20}));
    std::copy(payload.begin(), payload.end(), pkt.begin() + 20);
    return pkt;
}

std::vector<uint8_t> ipv4_icmp_echo(bool request, uint32_t src_ip, uint32_t dst_ip, uint16_t ident,
                                    uint16_t icmp_id, uint16_t icmp_seq,
                                    std::span<const uint8_t> payload) {
    std::vector<uint8_t> icmp(8 + payload.size());
    icmp[0] = request ? 8 : 0;
    put16(icmp, 4, icmp_id);
    put16(icmp, 6, icmp_seq);
    std::copy(payload.begin(), payload.end(), icmp.begin() + 8);
    put16(icmp, 2, internet_checksum(icmp));
    return ipv4(1, ident, src_ip, dst_ip, icmp);
}

std::vector<uint8_t> ipv4_udp(uint32_t src_ip, uint32_t dst_ip, uint16_t ident, uint16_t src_port,
                              uint16_t dst_port, std::span<const uint8_t> payload) {
    std::vector<uint8_t> udp(8 + payload.size());
    put16(udp, 0, src_port);
    put16(udp, 2, dst_port);
    put16(udp, 4, uint16_t(udp.size()));
    // checksum 0 = unused, legal for UDP over IPv4
    std::copy(payload.begin(), payload.end(), udp.begin() + 8);
    return ipv4(17, ident, src_ip, dst_ip, udp);
}

std::vector<uint8_t> ipv6_udp(uint16_t src_port, uint16_t dst_port,
                              std::span<const uint8_t> payload) {
    std::vector<uint8_t> pkt(40 + 8 + payload.size());
    pkt[0] = 0x60;
    put16(pkt, 4, uint16_t(8 + payload.size()));
    pkt[6] = 17;  // next header: UDP
    pkt[7] = 64;  // hop limit
    pkt[23] = 1;  // src ::1
    pkt[39] = 2;  // dst ::2
    put16(pkt, 40, src_port);
    put16(pkt, 42, dst_port);
    put16(pkt, 44, uint16_t(8 + payload.size()));
    std::copy(payload.begin(), payload.end(), pkt.begin() + 48);
    return pkt;
}

}  // namespace gridloop::netsim::craft
