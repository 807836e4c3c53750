#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridloop::cosim {

using Json = nlohmann::json;

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class WireKind : int { Request = 0, Success = 1, Error = 2 };

/// One message of the framed request/reply protocol spoken between the
/// kernel and out-of-process simulators. On the wire it is a 4-byte
/// big-endian length prefix followed by the UTF-8 JSON body
/// [kind, request_id, payload].
///
/// Payload conventions:
///   Request -> [method, args, kwargs]
///   Success -> result value
///   Error   -> message string
struct WireMessage {
    WireKind kind = WireKind::Request;
    uint64_t request_id = 0;
    Json payload;

    bool operator==(const WireMessage& o) const {
        return kind == o.kind && request_id == o.request_id && payload == o.payload;
    }

    static WireMessage request(uint64_t id, const std::string& method, Json args,
                               Json kwargs = Json::object());
    static WireMessage success(uint64_t id, Json result);
    static WireMessage error(uint64_t id, const std::string& message);
};

inline constexpr size_t kMaxFrameBytes = 16u * 1024u * 1024u;

std::vector<uint8_t> encode_message(const WireMessage& msg);

/// Incremental decoder for a byte stream of frames. Partial frames are
/// retained until completed; pipelined frames come out in order.
class StreamDecoder {
public:
    // Appends bytes and returns every message completed by them.
    std::vector<WireMessage> feed(std::span<const uint8_t> bytes);

    size_t pending_bytes() const { return buffer_.size(); }

private:
    std::vector<uint8_t> buffer_;
};

// Decodes exactly one complete frame (prefix + body). Test convenience.
WireMessage decode_message(std::span<const uint8_t> frame);

}  // namespace gridloop::cosim
