#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gridloop::vif {

/// What the head of a byte stream says about the packet starting there.
struct HeaderProbe {
    enum class Kind { NeedMore, Length, BadVersion };
    Kind kind = Kind::NeedMore;
    size_t value = 0;  // NeedMore: total prefix bytes required; Length: whole-packet bytes
};

/// Reads the declared packet length from the leading IP header bytes.
/// IPv4 needs a 4-byte prefix (total length at offset 2), IPv6 a 6-byte
/// prefix (40 + payload length at offset 4). Any other version nibble is
/// a desynchronized stream.
HeaderProbe packet_len_from_header(std::span<const uint8_t> prefix);

/// Turns the tunnel's unaligned chunk stream back into whole IP packets.
/// The tunnel carries no framing of its own; boundaries come solely from
/// the IP headers. On a bad version nibble at a packet boundary the buffer
/// is dropped and the stream is scanned forward to the next plausible
/// header (desyncs are counted, not repaired).
class FrameBuffer {
public:
    static constexpr size_t kPendingLimit = 128 * 1024;

    // Returns every packet completed by this chunk, bit-identical to the
    // original stream content.
    std::vector<std::vector<uint8_t>> feed(std::span<const uint8_t> chunk);

    size_t pending_bytes() const { return pending_.size(); }
    uint64_t desync_count() const { return desyncs_; }

private:
    bool resync();

    std::vector<uint8_t> pending_;
    uint64_t desyncs_ = 0;
};

}  // namespace gridloop::vif
