#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nnmt/calibration.hpp"
#include "nnmt/core.hpp"
#include "nnmt/neighbors.hpp"

namespace nnmt {

/// One (j,k) pair: local statistic, standardization and correction, plus
/// the geometry of the ball it reports on. Only non-degenerate pairs
/// (radius > 0, gamma > 0) are materialized.
struct ScaleRecord {
    std::uint32_t j = 0;  ///< center index (multivariate) or left window end (d = 1)
    std::uint32_t k = 0;  ///< scale (neighbor rank) or right window end (d = 1)
    std::vector<double> center;
    double radius = 0.0;
    double t_stat = 0.0;
    double gamma = 0.0;
    double correction = 0.0;
    int sign = 0;
};

struct MultiscaleResult {
    std::vector<ScaleRecord> records;
    double t_n = 0.0;  ///< sup over records; -infinity when every pair is degenerate
    bool one_sided = false;
};

/// Default scale cap: min(n-1, ceil(n/2)).
std::size_t default_k_max(std::size_t n);

/// w_i = psi(dist(X_j, X_i) / dist(X_j, X_j^k)) for every point i (indexed by
/// point, not by neighbor rank). Throws domain_error when the scale radius
/// is zero.
std::vector<double> kernel_weights(const KernelSpec& psi,
                                   const NeighborOrder& order, std::size_t j,
                                   std::size_t k);

/// gamma_jkn = sqrt((1/(n-1)) sum_i (w_i - mean(w))^2) over all n weights.
double local_std(const std::vector<double>& weights, std::size_t n);

/// T_jkn = (sqrt(lambda(1-lambda)) / gamma) n^{-1/2} sum_i w_i Lambda_i.
double local_stat(const std::vector<double>& weights,
                  const WeightedLabels& labels, double gamma, std::size_t m,
                  std::size_t n);

namespace detail {
struct CellMaker;
}

/// Precomputed scan over all (j,k) pairs: geometry, standardizations and
/// corrections are label-independent, so one design serves the observed
/// labels and every permutation through a single summation code path
/// (t = coef_mark * S + coef_base with S the weight mass on marked points).
class ScanDesign {
  public:
    struct Cell {
        std::uint32_t j = 0;
        std::uint32_t k = 0;
        std::uint32_t prefix = 0;  ///< neighbors with dist <= radius (incl. ties)
        double radius = 0.0;
        double gamma = 0.0;
        double correction = 0.0;
        double coef_mark = 0.0;
        double coef_base = 0.0;
    };

    /// Two-sample design: marks are group-1 indicators.
    static ScanDesign two_sample(const PooledSample& sample,
                                 const KernelSpec& psi, std::size_t k_max,
                                 unsigned threads = 1);

    /// Classification design: marks are the binary outcomes y; the statistic
    /// is (1/(sigma_lambda gamma sqrt(n))) sum w_i (y_i - lambda) and the
    /// correction uses the independent-Bernoulli constants (delta = 1).
    static ScanDesign classify(const std::vector<double>& coords, std::size_t n,
                               std::size_t d, double lambda,
                               const KernelSpec& psi, std::size_t k_max,
                               unsigned threads = 1);

    /// Per-cell statistics for one mark vector, in cell order.
    void evaluate_all(const std::vector<std::uint8_t>& marks,
                      std::vector<double>& t_out) const;

    /// sup over cells of |t| - C (or t - C when one_sided); -infinity when
    /// there are no cells.
    double evaluate_sup(const std::vector<std::uint8_t>& marks,
                        bool one_sided) const;

    /// Same reduction as evaluate_sup but over precomputed cell statistics.
    double sup_of(const std::vector<double>& t_cells, bool one_sided) const;

    std::vector<ScaleRecord> make_records(const std::vector<double>& t_cells) const;

    const std::vector<Cell>& cells() const { return cells_; }
    const NeighborOrder& order() const { return order_; }
    std::size_t n() const { return n_; }
    std::size_t d() const { return d_; }

  private:
    static ScanDesign build(std::vector<double> coords, std::size_t n,
                            std::size_t d, const KernelSpec& psi,
                            std::size_t k_max, unsigned threads,
                            const detail::CellMaker& maker);

    template <class Visit>
    void scan(const std::vector<std::uint8_t>& marks, Visit&& visit) const;

    std::size_t n_ = 0;
    std::size_t d_ = 0;
    bool rect_ = true;
    KernelSpec kernel_;
    NeighborOrder order_;
    std::vector<double> coords_;            ///< copy for record centers
    std::vector<Cell> cells_;               ///< sorted by (j, k)
    std::vector<std::size_t> cell_end_;     ///< cells of center j: [cell_end_[j], cell_end_[j+1])
    std::vector<std::uint32_t> max_prefix_; ///< per center, largest cell prefix
};

/// Evaluate the full multiscale statistic T_n = sup_{j,k} {|T_jkn| - C_jkn}
/// over 1 <= k <= k_max (0 selects the default cap).
MultiscaleResult multiscale_stat(const PooledSample& sample,
                                 const WeightedLabels& labels,
                                 const KernelSpec& psi, std::size_t k_max,
                                 bool one_sided = false, unsigned threads = 1);

/// Records with |t_stat| > correction + kappa (signed rule when one_sided).
std::vector<ScaleRecord> significant_regions(const MultiscaleResult& result,
                                             double kappa);

}  // namespace nnmt
