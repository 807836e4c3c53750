#include "gridloop/vif/reassembly.hpp"

namespace gridloop::vif {

namespace {
constexpr size_t kMinIpv4 = 20;
constexpr size_t kMinIpv6 = 40;
constexpr size_t kMaxPacket = 65535;

bool plausible(const HeaderProbe& probe, int version) {
    if (probe.kind != HeaderProbe::Kind::Length) return false;
    size_t min = version == 4 ? kMinIpv4 : kMinIpv6;
    return probe.value >= min && probe.value <= kMaxPacket;
}
}  // namespace

HeaderProbe packet_len_from_header(std::span<const uint8_t> prefix) {
    if (prefix.empty()) return {HeaderProbe::Kind::NeedMore, 1};
    int version = prefix[0] >> 4;
    if (version == 4) {
        if (prefix.size() < 4) return {HeaderProbe::Kind::NeedMore, 4};
        return {HeaderProbe::Kind::Length, size_t(prefix[2]) << 8 | prefix[3]};
    }
    if (version == 6) {
        if (prefix.size() < 6) return {HeaderProbe::Kind::NeedMore, 6};
        return {HeaderProbe::Kind::Length, 40u + (size_t(prefix[4]) << 8 | prefix[5])};
    }
    return {HeaderProbe::Kind::BadVersion, 0};
}

bool FrameBuffer::resync() {
    ++desyncs_;
    // Scan forward for the next offset that looks like a sane packet start.
    for (size_t off = 1; off < pending_.size(); ++off) {
        int version = pending_[off] >> 4;
        if (version != 4 && version != 6) continue;
        auto probe = packet_len_from_header({pending_.data() + off, pending_.size() - off});
        if (probe.kind == HeaderProbe::Kind::NeedMore || plausible(probe, version)) {
            pending_.erase(pending_.begin(), pending_.begin() + off);
            return true;
        }
    }
    pending_.clear();
    return false;
}

std::vector<std::vector<uint8_t>> FrameBuffer::feed(std::span<const uint8_t> chunk) {
    pending_.insert(pending_.end(), chunk.begin(), chunk.end());
    std::vector<std::vector<uint8_t>> out;
    while (!pending_.empty()) {
        auto probe = packet_len_from_header(pending_);
        if (probe.kind == HeaderProbe::Kind::NeedMore) break;
        if (probe.kind == HeaderProbe::Kind::BadVersion ||
            !plausible(probe, pending_[0] >> 4)) {
            if (!resync()) break;
            continue;
        }
        if (pending_.size() < probe.value) break;
        out.emplace_back(pending_.begin(), pending_.begin() + probe.value);
        pending_.erase(pending_.begin(), pending_.begin() + probe.value);
    }
    if (pending_.size() > kPendingLimit) {
        pending_.clear();
        ++desyncs_;
    }
    return out;
}

}  // namespace gridloop::vif
