#include "dualrail/rng.hpp"

#include <cmath>

namespace dualrail {

double Rng::next_gauss() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Box-Muller; u1 in (0,1] to keep the log finite
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t Rng::derive(std::uint64_t master, std::string_view stage,
                          std::uint64_t index, std::uint64_t index2) {
    std::uint64_t h = fnv1a64(stage.data(), stage.size());
    h = fnv1a64(&index, sizeof index, h);
    h = fnv1a64(&index2, sizeof index2, h);
    // run the combined value through a few splitmix steps for dispersion
    Rng mixer(master ^ h);
    mixer.next_u64();
    return mixer.next_u64();
}

} // namespace dualrail
