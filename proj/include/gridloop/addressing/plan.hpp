#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "gridloop/area.hpp"

namespace gridloop::addr {

struct AddressError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Cidr {
    uint32_t base = 0;  // host byte order, host bits all zero
    int prefix_len = 0;

    static Cidr make(uint32_t base, int prefix_len);  // throws if host bits set
    static Cidr parse(const std::string& text);       // "10.64.0.0/10"

    uint32_t mask() const {
        return prefix_len == 0 ? 0u : ~uint32_t(0) << (32 - prefix_len);
    }
    bool contains(uint32_t ip) const { return (ip & mask()) == base; }
    bool contains(const Cidr& other) const {
        return other.prefix_len >= prefix_len && contains(other.base);
    }
    uint32_t broadcast() const { return base | ~mask(); }
    std::string to_string() const;

    bool operator==(const Cidr&) const = default;
};

/// The fixed subnet plan: the /10 root split into four /12 area blocks,
/// /24-only subnets, router-first host numbering.
class SubnetPlan {
public:
    SubnetPlan();

    Cidr root() const { return root_; }
    Cidr area_block(AreaKind area) const;
    Cidr unallocated_block() const { return unallocated_; }

    // The index-th /24 inside the area block; index in [0, 4096).
    Cidr allocate_subnet(AreaKind area, uint32_t index) const;

    static constexpr uint32_t kSubnetsPerArea = 4096;  // 2^(24-12)

private:
    Cidr root_;
    std::map<AreaKind, Cidr> areas_;
    Cidr unallocated_;
};

enum class HostRole { Router, Host };

/// Hands out host addresses inside one /24. Routers take .1, .2, ... in
/// request order; hosts follow after the last router. Requesting a router
/// once a host exists is an ordering error; .0 and .255 are never given out.
class HostRegistry {
public:
    explicit HostRegistry(Cidr subnet);

    uint32_t allocate(HostRole role);
    uint32_t routers() const { return routers_; }
    uint32_t allocated() const { return next_ - 1; }

    static constexpr uint32_t kMaxHosts = 254;

private:
    Cidr subnet_;
    uint32_t next_ = 1;     // next free final octet
    uint32_t routers_ = 0;
    bool host_seen_ = false;
};

}  // namespace gridloop::addr
