#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "nnmt/multiscale.hpp"
#include "nnmt/parallel.hpp"
#include "nnmt/rng.hpp"

namespace nnmt {

struct PermutationConfig {
    std::size_t B = 999;          ///< Monte Carlo permutations, >= 1
    double alpha = 0.05;          ///< significance level in (0,1)
    std::uint64_t seed = 0;       ///< master seed; stream b derives from (seed, b)
    KernelSpec kernel;
    std::size_t k_max = 0;        ///< scale cap; 0 selects the default
    bool one_sided = false;       ///< signed rule T > C + kappa instead of |T|
    unsigned threads = 1;
    bool keep_perm_stats = false;

    void validate() const {
        if (B == 0) throw domain_error("config: need at least one permutation");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw domain_error("config: alpha must lie in (0,1)");
        kernel.validate();
    }
};

struct TestReport {
    std::size_t n = 0, m = 0, d = 0;
    double t_n = 0.0;
    double kappa_alpha = 0.0;
    double p_value = 1.0;
    bool reject = false;
    std::vector<ScaleRecord> regions;
    std::vector<double> perm_stats;  ///< kept only when requested
    PermutationConfig config;
    double lambda = std::numeric_limits<double>::quiet_NaN();  ///< classify only
    std::string variant = "test";   ///< "test" | "test1d" | "classify"
    struct Timings {
        double design_ms = 0.0;
        double perm_ms = 0.0;
        double total_ms = 0.0;
    } timings;
};

/// Fisher-Yates shuffle of a 0/1 mark vector under a dedicated stream.
std::vector<std::uint8_t> shuffle_marks(const std::vector<std::uint8_t>& base,
                                        RngStream& stream);

/// Uniformly random label assignment with exactly m group-1 flags.
WeightedLabels permute_labels(const PooledSample& sample, RngStream& stream);

/// (1 + #{b : perm_stat_b >= t_obs}) / (B + 1).
double p_value(double t_obs, const std::vector<double>& perm_stats);

/// Add-one Monte Carlo quantile: the ceil((B+1)(1-alpha))-th smallest of the
/// B permuted statistics pooled with the observed one.
double add_one_quantile(double t_obs, const std::vector<double>& perm_stats,
                        double alpha);

/// Rerandomization quantile kappa_alpha plus the B permuted statistics.
std::pair<double, std::vector<double>> permutation_quantile(
    const PooledSample& sample, const PermutationConfig& config);

/// Full conditional test: observed statistic, quantile, p-value, regions.
TestReport run_test(const PooledSample& sample, const PermutationConfig& config);

namespace detail {

struct PermCore {
    std::vector<double> t_cells;   ///< observed per-cell statistics
    double t_obs = 0.0;
    std::vector<double> perm_stats;
    double kappa = 0.0;
    double p = 1.0;
    bool reject = false;
};

/// Shared Monte Carlo driver. Design needs evaluate_all / evaluate_sup /
/// sup_of; marks_obs is the observed 0/1 vector and perm_base the vector
/// shuffled for each permutation (stream b derives from (seed, b)).
template <class Design>
PermCore run_perm_core(const Design& design,
                       const std::vector<std::uint8_t>& marks_obs,
                       const std::vector<std::uint8_t>& perm_base,
                       const PermutationConfig& cfg) {
    PermCore out;
    design.evaluate_all(marks_obs, out.t_cells);
    out.t_obs = design.sup_of(out.t_cells, cfg.one_sided);

    out.perm_stats.resize(cfg.B);
    parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
        RngStream stream(cfg.seed, b);
        const std::vector<std::uint8_t> marks = shuffle_marks(perm_base, stream);
        out.perm_stats[b] = design.evaluate_sup(marks, cfg.one_sided);
    });

    out.kappa = add_one_quantile(out.t_obs, out.perm_stats, cfg.alpha);
    out.p = p_value(out.t_obs, out.perm_stats);
    out.reject = out.p <= cfg.alpha;
    return out;
}

}  // namespace detail

}  // namespace nnmt
