#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gridloop::netsim {

/// Header fields pulled from a raw IP packet. IPv4 packets carry routable
/// addresses; IPv6 parses (version + declared length) but the modeled
/// topology is IPv4-addressed, so v6 src/dst stay zero.
struct PacketInfo {
    int version = 0;
    uint16_t total_length = 0;
    uint32_t src_ip = 0;
    uint32_t dst_ip = 0;
    uint8_t protocol = 0;
    uint16_t ident = 0;  // IPv4 identification field; flow tagging in tests
};

/// Parses and validates a whole packet: the buffer must match the
/// header-declared total length exactly. Returns nullopt for anything
/// malformed (callers count the drop; parsing never throws).
std::optional<PacketInfo> parse_packet(std::span<const uint8_t> bytes);

struct Packet {
    std::vector<uint8_t> bytes;
    PacketInfo info;
    int64_t ingress_ms = 0;
};

}  // namespace gridloop::netsim
