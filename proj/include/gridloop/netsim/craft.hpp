#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gridloop::netsim::craft {

uint16_t internet_checksum(std::span<const uint8_t> data);

std::vector<uint8_t> ipv4(uint8_t protocol, uint16_t ident, uint32_t src_ip, uint32_t dst_ip,
                          std::span<const uint8_t> payload);

// type 8 = echo request, 0 = echo reply; wrapped in an IPv4 header.
std::vector<uint8_t> ipv4_icmp_echo(bool request, uint32_t src_ip, uint32_t dst_ip, uint16_t ident,
                                    uint16_t icmp_id, uint16_t icmp_seq,
                                    std::span<const uint8_t> payload);

std::vector<uint8_t> ipv4_udp(uint32_t src_ip, uint32_t dst_ip, uint16_t ident, uint16_t src_port,
                              uint16_t dst_port, std::span<const uint8_t> payload);

// Minimal IPv6+UDP packet (no extension headers); the netsim does not route
// v6, but the tunnel and reassembly paths must carry it.
std::vector<uint8_t> ipv6_udp(uint16_t src_port, uint16_t dst_port,
                              std::span<const uint8_t> payload);

}  // namespace gridloop::netsim::craft
