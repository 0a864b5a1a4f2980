#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nnmt/core.hpp"

namespace nnmt {

/// Full nearest-neighbor ordering of a pooled sample. Row j lists all n
/// point indices sorted by (Euclidean distance to point j, then index),
/// so i_0 = j and dist_0 = 0 and ties are broken deterministically.
struct NeighborOrder {
    std::size_t n = 0;
    std::vector<std::uint32_t> idx;  ///< n*n, row-major
    std::vector<double> dist;        ///< n*n, nondecreasing within each row

    const std::uint32_t* row_idx(std::size_t j) const { return idx.data() + j * n; }
    const double* row_dist(std::size_t j) const { return dist.data() + j * n; }
};

/// Brute-force O(n^2 log n) construction; rows may be computed in parallel.
/// The result is independent of the thread count.
NeighborOrder neighbor_order(const PooledSample& sample, unsigned threads = 1);

/// Internal entry point for point clouds without group flags.
NeighborOrder neighbor_order_points(const std::vector<double>& coords,
                                    std::size_t n, std::size_t d,
                                    unsigned threads = 1);

/// ||X_j - X_j^k||: the k-th smallest distance from point j (k >= 1).
/// Returns 0 when the k-th neighbor coincides with X_j (degenerate scale).
/// Throws domain_error when j or k is out of range.
double scale_radius(const NeighborOrder& order, std::size_t j, std::size_t k);

}  // namespace nnmt
