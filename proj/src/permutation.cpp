#include "nnmt/permutation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace nnmt {

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0)
        .count();
}

}  // namespace

std::vector<std::uint8_t> shuffle_marks(const std::vector<std::uint8_t>& base,
                                        RngStream& stream) {
    std::vector<std::uint8_t> marks = base;
    stream.shuffle(marks);
    return marks;
}

WeightedLabels permute_labels(const PooledSample& sample, RngStream& stream) {
    std::vector<std::uint8_t> base(sample.n, 0);
    std::fill(base.begin(), base.begin() + sample.m, std::uint8_t{1});
    const std::vector<std::uint8_t> marks = shuffle_marks(base, stream);
    return labels_from_marks(marks, sample.m, sample.n);
}

double p_value(double t_obs, const std::vector<double>& perm_stats) {
    if (perm_stats.empty())
        throw domain_error("p_value: no permuted statistics");
    std::size_t count = 0;
    for (double s : perm_stats) count += (s >= t_obs);
    return static_cast<double>(1 + count) /
           static_cast<double>(perm_stats.size() + 1);
}

double add_one_quantile(double t_obs, const std::vector<double>& perm_stats,
                        double alpha) {
    if (perm_stats.empty())
        throw domain_error("add_one_quantile: no permuted statistics");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw domain_error("add_one_quantile: alpha must lie in (0,1)");
    std::vector<double> pooled = perm_stats;
    pooled.push_back(t_obs);
    const std::size_t total = pooled.size();  // B + 1
    // rank = total - floor(alpha * total) makes T_obs > kappa equivalent to
    // p <= alpha, ties included.
    std::size_t drop = static_cast<std::size_t>(
        std::floor(alpha * static_cast<double>(total)));
    if (drop >= total) drop = total - 1;
    const std::size_t rank = total - drop;  // in [1, total]
    std::nth_element(pooled.begin(), pooled.begin() + (rank - 1), pooled.end());
    return pooled[rank - 1];
}

namespace {

TestReport assemble_report(const ScanDesign& design, detail::PermCore&& core,
                           const PermutationConfig& config,
                           clock_type::time_point t0, double design_ms,
                           double perm_ms) {
    TestReport rep;
    rep.config = config;
    rep.t_n = core.t_obs;
    rep.kappa_alpha = core.kappa;
    rep.p_value = core.p;
    rep.reject = core.reject;

    MultiscaleResult obs;
    obs.one_sided = config.one_sided;
    obs.records = design.make_records(core.t_cells);
    obs.t_n = core.t_obs;
    rep.regions = significant_regions(obs, core.kappa);
    if (config.keep_perm_stats) rep.perm_stats = std::move(core.perm_stats);

    rep.timings.design_ms = design_ms;
    rep.timings.perm_ms = perm_ms;
    rep.timings.total_ms = ms_since(t0);
    return rep;
}

}  // namespace

TestReport run_test(const PooledSample& sample, const PermutationConfig& config) {
    config.validate();
    const auto t0 = clock_type::now();

    const ScanDesign design =
        ScanDesign::two_sample(sample, config.kernel, config.k_max,
                               config.threads);
    const double design_ms = ms_since(t0);

    const std::vector<std::uint8_t> marks_obs = marks_of(labels_for(sample));
    std::vector<std::uint8_t> base(sample.n, 0);
    std::fill(base.begin(), base.begin() + sample.m, std::uint8_t{1});

    const auto t1 = clock_type::now();
    detail::PermCore core = detail::run_perm_core(design, marks_obs, base, config);
    const double perm_ms = ms_since(t1);

    TestReport rep = assemble_report(design, std::move(core), config, t0,
                                     design_ms, perm_ms);
    rep.n = sample.n;
    rep.m = sample.m;
    rep.d = sample.d;
    rep.variant = "test";
    // Echo the scale cap actually used so a report can be replayed verbatim.
    rep.config.k_max = config.k_max == 0 ? default_k_max(sample.n)
                                         : std::min(config.k_max, sample.n - 1);
    return rep;
}

std::pair<double, std::vector<double>> permutation_quantile(
    const PooledSample& sample, const PermutationConfig& config) {
    PermutationConfig cfg = config;
    cfg.keep_perm_stats = true;
    TestReport rep = run_test(sample, cfg);
    return {rep.kappa_alpha, std::move(rep.perm_stats)};
}

}  // namespace nnmt
