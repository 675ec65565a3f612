#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace v2x {

// splitmix64-based stream. Small, seedable and stable across platforms, so a
// (config, seed) pair fully determines every draw of a run. std::mt19937 plus
// std:: distributions would tie outputs to the standard library version.
class RngStream {
public:
    RngStream() : state_(0) {}
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive bounds. Modulo bias over a 64-bit space is < 2^-50 for the
    // spans used here.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    // Box-Muller, cosine branch only: every draw costs exactly two uniforms,
    // which keeps keyed one-shot draws stateless.
    double gaussian() {
        double u1 = uniform01();
        const double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double gaussian(double sigma) { return sigma * gaussian(); }

    // Derived stream for a tagged subcomponent (per-vehicle, channel, ...).
    RngStream fork(std::uint64_t tag) const {
        RngStream mixer(state_ ^ (0xa0761d6478bd642full + tag * 0xe7037ed1a0b428dbull));
        mixer.next_u64();
        return RngStream(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull + b * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic draw keyed by a tuple, independent of call order. Used for
// per-(sender, receiver, subframe) shadowing so the link is symmetric and a
// rerun with the same seed reproduces it bit-exactly.
inline double keyed_gaussian(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2,
                             std::uint64_t k3) {
    RngStream s(mix_key(mix_key(mix_key(seed, k1), k2), k3));
    return s.gaussian();
}

} // namespace v2x
