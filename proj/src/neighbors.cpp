#include "nnmt/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nnmt/parallel.hpp"

namespace nnmt {

NeighborOrder neighbor_order_points(const std::vector<double>& coords,
                                    std::size_t n, std::size_t d,
                                    unsigned threads) {
    NeighborOrder out;
    out.n = n;
    out.idx.resize(n * n);
    out.dist.resize(n * n);

    parallel_for(n, threads, [&](std::size_t j) {
        const double* pj = coords.data() + j * d;
        // Sort by squared distance (exact for ties), emit sqrt distances.
        std::vector<double> d2(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* pi = coords.data() + i * d;
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = pj[c] - pi[c];
                acc += diff * diff;
            }
            d2[i] = acc;
        }
        d2[j] = 0.0;  // exact zero for the center itself

        std::uint32_t* row_i = out.idx.data() + j * n;
        double* row_d = out.dist.data() + j * n;
        std::iota(row_i, row_i + n, 0u);
        std::sort(row_i, row_i + n, [&](std::uint32_t a, std::uint32_t b) {
            if (d2[a] != d2[b]) return d2[a] < d2[b];
            return a < b;
        });
        for (std::size_t t = 0; t < n; ++t) row_d[t] = std::sqrt(d2[row_i[t]]);
    });
    return out;
}

NeighborOrder neighbor_order(const PooledSample& sample, unsigned threads) {
    return neighbor_order_points(sample.coords, sample.n, sample.d, threads);
}

double scale_radius(const NeighborOrder& order, std::size_t j, std::size_t k) {
    if (j >= order.n)
        throw domain_error("scale_radius: center index out of range");
    if (k == 0 || k >= order.n)
        throw domain_error("scale_radius: scale must satisfy 1 <= k <= n-1");
    return order.dist[j * order.n + k];
}

}  // namespace nnmt
