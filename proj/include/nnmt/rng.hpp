#pragma once

#include <cstdint>
#include <vector>

namespace nnmt {

namespace detail {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Derives an independent stream key from (key, index). Used to hand every
/// permutation / replication its own stream so results do not depend on
/// scheduling or worker count.
inline std::uint64_t derive_stream_key(std::uint64_t key, std::uint64_t index) {
    return detail::mix64(key + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Counter-based pseudo-random stream (splitmix64). Cheap to construct,
/// no shared state, reproducible given its key.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : state_(detail::mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

    RngStream(std::uint64_t seed, std::uint64_t index) : RngStream(derive_stream_key(seed, index)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(state_);
    }

    /// Uniform integer in [0, bound). Unbiased (Lemire's multiply-shift with rejection).
    std::uint64_t next_below(std::uint64_t bound) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<__uint128_t>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace nnmt
