#include "gridloop/netsim/delay.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gridloop::netsim {

double Rng::normal(double mean, double sd) {
    if (spare_normal_) {
        double z = *spare_normal_;
        spare_normal_.reset();
        return mean + sd * z;
    }
    // Box-Muller; u1 shifted away from 0 so log() stays finite.
    double u1 = 1.0 - next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(theta);
    return mean + sd * (r * std::cos(theta));
}

DelayModel DelayModel::defaults(AreaKind kind) {
    DelayModel m;
    m.kind = kind;
    switch (kind) {
        case AreaKind::Dedicated: m.params = DedicatedParams{}; break;
        case AreaKind::SharedLinks: m.params = SharedParams{}; break;
        case AreaKind::HighImpairment: m.params = HighImpairmentParams{}; break;
    }
    return m;
}

void DelayModel::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
    };
    if (kind == AreaKind::Dedicated) {
        const auto& p = std::get<DedicatedParams>(params);
        positive(p.base_ms, "base_ms");
        positive(p.scale_ms, "scale_ms");
        positive(p.rate, "rate");
    } else if (kind == AreaKind::SharedLinks) {
        const auto& p = std::get<SharedParams>(params);
        positive(p.mean_ms, "mean_ms");
        positive(p.sd_ms, "sd_ms");
    } else {
        const auto& p = std::get<HighImpairmentParams>(params);
        positive(p.min_ms, "min_ms");
        positive(p.max_ms, "max_ms");
        if (p.max_ms < p.min_ms) throw std::invalid_argument("max_ms must be >= min_ms");
        if (p.p_break < 0.0 || p.p_break >= 1.0)
            throw std::invalid_argument("p_break must be in [0, 1)");
    }
}

DelaySample sample_delay(const DelayModel& model, Rng& rng) {
    switch (model.kind) {
        case AreaKind::Dedicated: {
            const auto& p = std::get<DedicatedParams>(model.params);
            return p.base_ms + p.scale_ms * (rng.exponential() / p.rate);
        }
        case AreaKind::SharedLinks: {
            const auto& p = std::get<SharedParams>(model.params);
            double d = rng.normal(p.mean_ms, p.sd_ms);
            return d < 0.0 ? 0.0 : d;
        }
        case AreaKind::HighImpairment: {
            const auto& p = std::get<HighImpairmentParams>(model.params);
            if (p.p_break > 0.0 && rng.next_unit() < p.p_break) return std::nullopt;
            return p.min_ms + (p.max_ms - p.min_ms) * rng.next_unit();
        }
    }
    return std::nullopt;
}

}  // namespace gridloop::netsim
