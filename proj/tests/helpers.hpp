#pragma once

#include <cstdint>
#include <vector>

#include "nnmt/core.hpp"
#include "nnmt/rng.hpp"

namespace testutil {

/// n uniform points in [0,1]^d, the first m flagged as group 1.
inline nnmt::PooledSample random_sample(std::size_t n, std::size_t m,
                                        std::size_t d, std::uint64_t seed) {
    nnmt::RngStream rng(seed, 0);
    std::vector<double> coords(n * d);
    for (double& c : coords) c = rng.next_unit();
    std::vector<std::uint8_t> flags(n, 2);
    for (std::size_t i = 0; i < m; ++i) flags[i] = 1;
    return nnmt::validate_sample(std::move(coords), d, std::move(flags));
}

inline std::vector<std::uint8_t> marks_from_subset(
    const std::vector<std::size_t>& subset, std::size_t n) {
    std::vector<std::uint8_t> marks(n, 0);
    for (std::size_t i : subset) marks[i] = 1;
    return marks;
}

}  // namespace testutil
