#include "gridloop/vif/base64.hpp"

#include <array>

namespace gridloop::vif {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int8_t, 256> build_reverse() {
    std::array<int8_t, 256> rev{};
    for (auto& v : rev) v = -1;
    for (int i = 0; i < 64; ++i) rev[static_cast<uint8_t>(kAlphabet[i])] = static_cast<int8_t>(i);
    return rev;
}

constexpr auto kReverse = build_reverse();

}  // namespace

std::string base64_encode(std::span<const uint8_t> data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back(kAlphabet[v & 63]);
    }
    if (size_t rest = data.size() - i; rest == 1) {
        uint32_t v = data[i] << 16;
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::optional<std::vector<uint8_t>> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) return std::nullopt;
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        uint32_t v = 0;
        for (size_t k = 0; k < 4; ++k) {
            char c = text[i + k];
            if (c == '=') {
                // Padding only in the last group, only in the final two slots.
                if (i + 4 != text.size() || k < 2) return std::nullopt;
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0) return std::nullopt;  // data after '='
            int8_t bits = kReverse[static_cast<uint8_t>(c)];
            if (bits < 0) return std::nullopt;
            v = (v << 6) | static_cast<uint32_t>(bits);
        }
        out.push_back(static_cast<uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<uint8_t>(v));
    }
    return out;
}

std::vector<std::string> encode_packets_b64(const std::vector<std::vector<uint8_t>>& packets) {
    std::vector<std::string> out;
    out.reserve(packets.size());
    for (const auto& p : packets) out.push_back(base64_encode(p));
    return out;
}

std::vector<std::vector<uint8_t>> decode_packets_b64(const std::vector<std::string>& strings) {
    std::vector<std::vector<uint8_t>> out;
    out.reserve(strings.size());
    for (size_t i = 0; i < strings.size(); ++i) {
        auto decoded = base64_decode(strings[i]);
        if (!decoded) throw Base64Error(i, "illegal character or padding");
        out.push_back(std::move(*decoded));
    }
    return out;
}

}  // namespace gridloop::vif
