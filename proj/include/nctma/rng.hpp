#pragma once

#include <cstdint>
#include <vector>

namespace nctma {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937_64 because
// the double conversion below is fully specified here, while
// std::uniform_real_distribution is implementation-defined. All dataset
// reproducibility rests on this generator; do not change the constants.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]: 53 significant bits, never exactly zero.
    double uniform01() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi] inclusive. Modulo bias is below 2^-53 for
    // the span sizes used here.
    std::uint64_t uniformInt(std::uint64_t lo, std::uint64_t hi) {
        return lo + next() % (hi - lo + 1);
    }

    bool coin() { return (next() & 1u) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniformInt(0, i - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Mixes a stream id into a master seed so that per-network (or per-flow)
// streams are independent and identical whether drawn serially or in
// parallel. Uses the SplitMix64 finalizer as the mixer.
inline std::uint64_t deriveStream(std::uint64_t masterSeed, std::uint64_t streamId) {
    std::uint64_t z = masterSeed + 0x9E3779B97F4A7C15ULL * (streamId + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t deriveStream(std::uint64_t masterSeed, std::uint64_t a, std::uint64_t b) {
    return deriveStream(deriveStream(masterSeed, a), b);
}

}  // namespace nctma
