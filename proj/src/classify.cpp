#include "nnmt/classify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "nnmt/calibration.hpp"

namespace nnmt {

LabeledPoints validate_labeled(const std::vector<std::vector<double>>& points,
                               const std::vector<int>& y, double lambda) {
    if (points.empty()) throw data_error("labeled data: no points");
    if (points.size() != y.size())
        throw data_error("labeled data: points and outcomes differ in length");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw data_error("labeled data: lambda must lie in (0,1)");
    LabeledPoints out;
    out.n = points.size();
    out.d = points.front().size();
    if (out.d == 0) throw data_error("labeled data: dimension must be at least 1");
    out.lambda = lambda;
    out.coords.reserve(out.n * out.d);
    for (const auto& p : points) {
        if (p.size() != out.d)
            throw data_error("labeled data: mixed point dimensions");
        for (double c : p) {
            if (!std::isfinite(c))
                throw data_error("labeled data: non-finite coordinate");
            out.coords.push_back(c);
        }
    }
    out.y.resize(out.n);
    for (std::size_t i = 0; i < out.n; ++i) {
        if (y[i] != 0 && y[i] != 1)
            throw data_error("labeled data: outcomes must be 0 or 1");
        out.y[i] = static_cast<std::uint8_t>(y[i]);
    }
    return out;
}

double classify_stat(const std::vector<double>& weights,
                     const std::vector<std::uint8_t>& y, double lambda,
                     double gamma, std::size_t n) {
    if (!(gamma > 0.0))
        throw domain_error("classify_stat: degenerate statistic (gamma 0)");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw domain_error("classify_stat: lambda must lie in (0,1)");
    if (weights.size() != n || y.size() != n)
        throw domain_error("classify_stat: length mismatch");
    const double sigma = std::sqrt(lambda * (1.0 - lambda));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += weights[i] * (static_cast<double>(y[i]) - lambda);
    return sum / (sigma * gamma * std::sqrt(static_cast<double>(n)));
}

double classify_correction(double gamma, double lambda, std::size_t n) {
    if (!(gamma > 0.0))
        throw domain_error("classify_correction: gamma must be positive");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw domain_error("classify_correction: lambda must lie in (0,1)");
    if (n < 1) throw domain_error("classify_correction: n must be positive");
    const double big_gamma = gamma_log(gamma * gamma);
    const double sigma = std::sqrt(lambda * (1.0 - lambda));
    const double r_cls = std::max(lambda, 1.0 - lambda) /
                         (3.0 * sigma * std::sqrt(static_cast<double>(n)));
    return 3.0 * r_cls / gamma * big_gamma + std::sqrt(2.0 * big_gamma);
}

TestReport classify_test(const LabeledPoints& data,
                         const PermutationConfig& config) {
    config.validate();
    using clock_type = std::chrono::steady_clock;
    const auto t0 = clock_type::now();
    auto ms_since = [](clock_type::time_point t) {
        return std::chrono::duration<double, std::milli>(clock_type::now() - t)
            .count();
    };

    const ScanDesign design =
        ScanDesign::classify(data.coords, data.n, data.d, data.lambda,
                             config.kernel, config.k_max, config.threads);
    const double design_ms = ms_since(t0);

    // Rerandomization of y conditional on M = sum y_i: shuffle the observed
    // outcome vector itself.
    const auto t1 = clock_type::now();
    detail::PermCore core = detail::run_perm_core(design, data.y, data.y, config);
    const double perm_ms = ms_since(t1);

    TestReport rep;
    rep.config = config;
    rep.n = data.n;
    std::size_t ones = 0;
    for (std::uint8_t v : data.y) ones += v;
    rep.m = ones;  // observed M
    rep.d = data.d;
    rep.lambda = data.lambda;
    rep.variant = "classify";
    rep.config.k_max = config.k_max == 0 ? default_k_max(data.n)
                                         : std::min(config.k_max, data.n - 1);
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

}  // namespace nnmt
