#pragma once

#include <cstdint>
#include <string_view>

namespace dualrail {

// Deterministic splitmix64 stream. One master seed per run; substreams are
// derived by hashing (stage name, indices) so stages and per-basis workers
// are independently rerunnable and the output never depends on scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1), 53-bit resolution
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller (second value cached)
    double next_gauss();

    // substream seed from (master, stage, index, index2)
    static std::uint64_t derive(std::uint64_t master, std::string_view stage,
                                std::uint64_t index = 0, std::uint64_t index2 = 0);

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// FNV-1a 64-bit, used for substream derivation and manifest file hashes
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);

} // namespace dualrail
