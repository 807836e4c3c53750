#include "gridloop/netsim/packet.hpp"

namespace gridloop::netsim {

namespace {
uint16_t be16(const uint8_t* p) { return static_cast<uint16_t>((p[0] << 8) | p[1]); }
uint32_t be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}
}  // namespace

std::optional<PacketInfo> parse_packet(std::span<const uint8_t> bytes) {
    if (bytes.empty()) return std::nullopt;
    PacketInfo info;
    info.version = bytes[0] >> 4;
    if (info.version == 4) {
        if (bytes.size() < 20) return std::nullopt;
        uint8_t ihl = bytes[0] & 0x0f;
        if (ihl < 5) return std::nullopt;
        uint16_t total = be16(&bytes[2]);
        if (total < ihl * 4u || total != bytes.size()) return std::nullopt;
        info.total_length = total;
        info.ident = be16(&bytes[4]);
        info.protocol = bytes[9];
        info.src_ip = be32(&bytes[12]);
        info.dst_ip = be32(&bytes[16]);
        return info;
    }
    if (info.version == 6) {
        if (bytes.size() < 40) return std::nullopt;
        uint32_t total = 40u + be16(&bytes[4]);
        if (total > 65535 || total != bytes.size()) return std::nullopt;
        info.total_length = static_cast<uint16_t>(total);
        info.protocol = bytes[6];  // next header
        return info;
    }
    return std::nullopt;
}

}  // namespace gridloop::netsim
