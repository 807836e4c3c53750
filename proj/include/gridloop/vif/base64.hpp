#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridloop::vif {

struct Base64Error : std::runtime_error {
    Base64Error(size_t idx, const std::string& why)
        : std::runtime_error("bad Base64 at index " + std::to_string(idx) + ": " + why),
          index(idx) {}
    size_t index;  // offending position in the string list
};

// Standard alphabet, padded.
std::string base64_encode(std::span<const uint8_t> data);
std::optional<std::vector<uint8_t>> base64_decode(std::string_view text);

std::vector<std::string> encode_packets_b64(const std::vector<std::vector<uint8_t>>& packets);
// Throws Base64Error naming the offending list index.
std::vector<std::vector<uint8_t>> decode_packets_b64(const std::vector<std::string>& strings);

}  // namespace gridloop::vif
