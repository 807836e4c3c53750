#include "gridloop/cosim/wire.hpp"

namespace gridloop::cosim {

WireMessage WireMessage::request(uint64_t id, const std::string& method, Json args, Json kwargs) {
    return WireMessage{WireKind::Request, id, Json::array({method, std::move(args), std::move(kwargs)})};
}

WireMessage WireMessage::success(uint64_t id, Json result) {
    return WireMessage{WireKind::Success, id, std::move(result)};
}

WireMessage WireMessage::error(uint64_t id, const std::string& message) {
    return WireMessage{WireKind::Error, id, message};
}

std::vector<uint8_t> encode_message(const WireMessage& msg) {
    Json body = Json::array({static_cast<int>(msg.kind), msg.request_id, msg.payload});
    std::string text = body.dump();
    if (text.size() > kMaxFrameBytes)
        throw ProtocolError("frame body exceeds 16 MiB (" + std::to_string(text.size()) + " bytes)");
    std::vector<uint8_t> out;
    out.reserve(4 + text.size());
    uint32_t len = static_cast<uint32_t>(text.size());
    out.push_back(static_cast<uint8_t>(len >> 24));
    out.push_back(static_cast<uint8_t>(len >> 16));
    out.push_back(static_cast<uint8_t>(len >> 8));
    out.push_back(static_cast<uint8_t>(len));
    out.insert(out.end(), text.begin(), text.end());
    return out;
}

namespace {

WireMessage parse_body(std::span<const uint8_t> body) {
    Json parsed = Json::parse(body.begin(), body.end(), nullptr, false);
    if (parsed.is_discarded()) throw ProtocolError("frame body is not valid JSON");
    if (!parsed.is_array() || parsed.size() != 3)
        throw ProtocolError("frame body is not a 3-element array");
    if (!parsed[0].is_number_integer())
        throw ProtocolError("frame kind is not an integer");
    int kind = parsed[0].get<int>();
    if (kind < 0 || kind > 2) throw ProtocolError("frame kind out of range: " + std::to_string(kind));
    if (!parsed[1].is_number_unsigned())
        throw ProtocolError("frame request_id is not an unsigned integer");
    WireMessage msg;
    msg.kind = static_cast<WireKind>(kind);
    msg.request_id = parsed[1].get<uint64_t>();
    msg.payload = std::move(parsed[2]);
    if (msg.kind == WireKind::Request) {
        const Json& p = msg.payload;
        if (!p.is_array() || p.size() != 3 || !p[0].is_string() || !p[1].is_array() ||
            !p[2].is_object())
            throw ProtocolError("request payload is not [method, args, kwargs]");
    } else if (msg.kind == WireKind::Error && !msg.payload.is_string()) {
        throw ProtocolError("error payload is not a string");
    }
    return msg;
}

}  // namespace

std::vector<WireMessage> StreamDecoder::feed(std::span<const uint8_t> bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    std::vector<WireMessage> out;
    size_t off = 0;
    while (buffer_.size() - off >= 4) {
        uint32_t len = (uint32_t(buffer_[off]) << 24) | (uint32_t(buffer_[off + 1]) << 16) |
                       (uint32_t(buffer_[off + 2]) << 8) | uint32_t(buffer_[off + 3]);
        if (len > kMaxFrameBytes) {
            buffer_.clear();
            throw ProtocolError("frame length exceeds 16 MiB (" + std::to_string(len) + ")");
        }
        if (buffer_.size() - off - 4 < len) break;  // needs more bytes
        out.push_back(parse_body({buffer_.data() + off + 4, len}));
        off += 4 + len;
    }
    buffer_.erase(buffer_.begin(), buffer_.begin() + off);
    return out;
}

WireMessage decode_message(std::span<const uint8_t> frame) {
    StreamDecoder dec;
    auto msgs = dec.feed(frame);
    if (msgs.size() != 1 || dec.pending_bytes() != 0)
        throw ProtocolError("expected exactly one complete frame");
    return msgs.front();
}

}  // namespace gridloop::cosim
