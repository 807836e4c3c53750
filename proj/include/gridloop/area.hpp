#pragma once

#include <optional>
#include <string>

namespace gridloop {

/// The three QoS areas of the modeled autonomous system.
enum class AreaKind { Dedicated, SharedLinks, HighImpairment };

inline const char* area_name(AreaKind a) {
    switch (a) {
        case AreaKind::Dedicated: return "dedicated";
        case AreaKind::SharedLinks: return "shared_links";
        case AreaKind::HighImpairment: return "high_impairment";
    }
    return "?";
}

inline std::optional<AreaKind> area_from_name(const std::string& s) {
    if (s == "dedicated") return AreaKind::Dedicated;
    if (s == "shared_links") return AreaKind::SharedLinks;
    if (s == "high_impairment") return AreaKind::HighImpairment;
    return std::nullopt;
}

}  // namespace gridloop
