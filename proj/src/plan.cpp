#include "gridloop/addressing/plan.hpp"

#include <charconv>

#include "gridloop/io/net.hpp"

namespace gridloop::addr {

Cidr Cidr::make(uint32_t base, int prefix_len) {
    if (prefix_len < 0 || prefix_len > 32)
        throw AddressError("prefix length out of range: " + std::to_string(prefix_len));
    Cidr c{base, prefix_len};
    if ((base & ~c.mask()) != 0)
        throw AddressError("CIDR base has host bits set: " + c.to_string());
    return c;
}

Cidr Cidr::parse(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) throw AddressError("CIDR missing prefix: " + text);
    auto ip = io::parse_ipv4(text.substr(0, slash));
    if (!ip) throw AddressError("bad CIDR base address: " + text);
    int plen = 0;
    const std::string p = text.substr(slash + 1);
    auto [next, ec] = std::from_chars(p.data(), p.data() + p.size(), plen);
    if (ec != std::errc{} || next != p.data() + p.size())
        throw AddressError("bad CIDR prefix: " + text);
    return make(*ip, plen);
}

std::string Cidr::to_string() const {
    return io::format_ipv4(base) + "/" + std::to_string(prefix_len);
}

SubnetPlan::SubnetPlan() {
    root_ = Cidr::parse("10.64.0.0/10");
    areas_ = {
        {AreaKind::Dedicated, Cidr::parse("10.64.0.0/12")},
        {AreaKind::SharedLinks, Cidr::parse("10.80.0.0/12")},
        {AreaKind::HighImpairment, Cidr::parse("10.96.0.0/12")},
    };
    unallocated_ = Cidr::parse("10.112.0.0/12");
}

Cidr SubnetPlan::area_block(AreaKind area) const { return areas_.at(area); }

Cidr SubnetPlan::allocate_subnet(AreaKind area, uint32_t index) const {
    if (index >= kSubnetsPerArea)
        throw AddressError("subnet index " + std::to_string(index) + " out of range for area " +
                           area_name(area) + " (a /12 holds 4096 /24s)");
    Cidr block = area_block(area);
    return Cidr::make(block.base + (index << 8), 24);
}

HostRegistry::HostRegistry(Cidr subnet) : subnet_(subnet) {
    if (subnet.prefix_len != 24)
        throw AddressError("host allocation requires a /24, got " + subnet.to_string());
}

uint32_t HostRegistry::allocate(HostRole role) {
    if (role == HostRole::Router && host_seen_)
        throw AddressError("router requested after a host in " + subnet_.to_string() +
                           "; routers must be allocated first");
    if (next_ > kMaxHosts)
        throw AddressError("subnet " + subnet_.to_string() + " is full (254 hosts)");
    if (role == HostRole::Router)
        ++routers_;
    else
        host_seen_ = true;
    return subnet_.base + next_++;
}

}  // namespace gridloop::addr
