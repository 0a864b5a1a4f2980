#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nnmt/permutation.hpp"

namespace nnmt {

/// One rank window (j, k]: 0 <= j < k <= n, acting on the order statistics
/// X_(j+1), ..., X_(k) of the pooled sample.
struct RankWindow {
    std::uint32_t j = 0;
    std::uint32_t k = 0;
    double u_stat = 0.0;
    double eta = 0.0;
};

/// w_i = psi((i-j)/(k-j)) for order-statistic index i = 1..n (entry i-1).
/// The rectangular family is the indicator of 0 < (i-j)/(k-j) <= 1; other
/// families evaluate psi on arguments in [0,1] and vanish outside.
std::vector<double> rank_weights(const KernelSpec& psi, std::size_t j,
                                 std::size_t k, std::size_t n);

/// U_jkn = (sqrt(lambda(1-lambda))/eta) n^{-1/2} sum_i w_i Lambda(X_(i))
/// with w = rank_weights and eta = local_std(w, n). ordered_labels must be
/// sorted by observation value. Throws on a degenerate window (eta = 0).
double rank_stat(const WeightedLabels& ordered_labels, std::size_t j,
                 std::size_t k, const KernelSpec& psi, std::size_t m,
                 std::size_t n);

/// All non-degenerate windows with k - j <= width_max (reference path).
std::vector<RankWindow> rank_windows(const WeightedLabels& ordered_labels,
                                     const KernelSpec& psi, std::size_t m,
                                     std::size_t n, std::size_t width_max);

/// Precomputed rank-window scan mirroring ScanDesign; weight patterns
/// depend only on the window width (and on whether j = 0), so they are
/// cached once and reused across permutations.
class RankScanDesign {
  public:
    struct Cell {
        std::uint32_t j = 0;
        std::uint32_t k = 0;
        std::uint32_t pattern = 0;  ///< index into the pattern table
        double eta = 0.0;
        double correction = 0.0;
        double coef_mark = 0.0;
        double coef_base = 0.0;
    };

    static RankScanDesign build(std::size_t n, std::size_t m,
                                const KernelSpec& psi, std::size_t width_max);

    void evaluate_all(const std::vector<std::uint8_t>& marks,
                      std::vector<double>& t_out) const;
    double evaluate_sup(const std::vector<std::uint8_t>& marks,
                        bool one_sided) const;
    double sup_of(const std::vector<double>& t_cells, bool one_sided) const;

    /// Records translated to data intervals [X_(j+1), X_(k)] given the
    /// sorted observation values.
    std::vector<ScaleRecord> make_records(
        const std::vector<double>& t_cells,
        const std::vector<double>& sorted_values) const;

    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t n() const { return n_; }

  private:
    struct Pattern {
        std::uint32_t t0 = 0;     ///< first offset (1 when j = 0, else 0)
        std::uint32_t width = 0;  ///< k - j
        std::vector<double> w;    ///< weights for offsets t0..width
    };

    template <class Visit>
    void scan(const std::vector<std::uint8_t>& marks, Visit&& visit) const;

    std::size_t n_ = 0;
    bool rect_ = true;
    std::vector<Pattern> patterns_;
    std::vector<Cell> cells_;  ///< sorted by (j, k)
};

/// Rank-based d = 1 pipeline: same permutation machinery as run_test with
/// U_jkn in place of T_jkn and windows in place of balls. Reported regions
/// carry the interval [X_(j+1), X_(k)] as center and radius.
TestReport univariate_test(const PooledSample& sample,
                           const PermutationConfig& config);

}  // namespace nnmt
