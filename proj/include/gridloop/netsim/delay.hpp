#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>

#include "gridloop/area.hpp"

namespace gridloop::netsim {

/// Deterministic RNG behind all stochastic delay draws. Distributions are
/// sampled by explicit inverse-CDF / Box-Muller so the draw sequence is
/// pinned by this code, not by the standard library's unspecified
/// distribution algorithms.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return (engine_() >> 11) * 0x1.0p-53; }

    double exponential() {  // rate 1
        double u = next_unit();
        return -std::log1p(-u);
    }

    double normal(double mean, double sd);

    uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

struct DedicatedParams {
    double base_ms = 10.0;
    double scale_ms = 50.0;
    double rate = 1.0;
};

struct SharedParams {
    double mean_ms = 250.0;
    double sd_ms = 20.0;
};

struct HighImpairmentParams {
    double min_ms = 100.0;
    double max_ms = 2000.0;
    double p_break = 0.05;
};

/// Per-area stochastic delay law. Dedicated: base + scale * Exp(rate).
/// Shared: Normal(mean, sd) clamped at zero. High-impairment: broken with
/// probability p_break, otherwise Uniform[min, max].
struct DelayModel {
    AreaKind kind = AreaKind::Dedicated;
    std::variant<DedicatedParams, SharedParams, HighImpairmentParams> params;

    static DelayModel defaults(AreaKind kind);
    void validate() const;  // throws std::invalid_argument
};

/// nullopt means the link is broken for this packet.
using DelaySample = std::optional<double>;

DelaySample sample_delay(const DelayModel& model, Rng& rng);

}  // namespace gridloop::netsim
