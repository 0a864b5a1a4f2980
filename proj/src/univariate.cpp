#include "nnmt/univariate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace nnmt {

std::vector<double> rank_weights(const KernelSpec& psi, std::size_t j,
                                 std::size_t k, std::size_t n) {
    psi.validate();
    if (!(j < k && k <= n)) throw domain_error("rank_weights: invalid window");
    std::vector<double> w(n, 0.0);
    const double width = static_cast<double>(k - j);
    if (psi.is_rectangular()) {
        for (std::size_t i = j + 1; i <= k; ++i) w[i - 1] = 1.0;
        return w;
    }
    const std::size_t lo = std::max<std::size_t>(j, 1);
    for (std::size_t i = lo; i <= k; ++i) {
        const double arg = static_cast<double>(i - j) / width;
        w[i - 1] = psi.evaluate(arg);
    }
    return w;
}

double rank_stat(const WeightedLabels& ordered_labels, std::size_t j,
                 std::size_t k, const KernelSpec& psi, std::size_t m,
                 std::size_t n) {
    const std::vector<double> w = rank_weights(psi, j, k, n);
    const double eta = local_std(w, n);
    if (!(eta > 0.0)) throw domain_error("rank_stat: degenerate window (eta 0)");
    return local_stat(w, ordered_labels, eta, m, n);
}

std::vector<RankWindow> rank_windows(const WeightedLabels& ordered_labels,
                                     const KernelSpec& psi, std::size_t m,
                                     std::size_t n, std::size_t width_max) {
    std::vector<RankWindow> out;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k_hi = std::min(n, j + width_max);
        for (std::size_t k = j + 1; k <= k_hi; ++k) {
            const std::vector<double> w = rank_weights(psi, j, k, n);
            const double eta = local_std(w, n);
            if (!(eta > 0.0)) continue;
            RankWindow rw;
            rw.j = static_cast<std::uint32_t>(j);
            rw.k = static_cast<std::uint32_t>(k);
            rw.eta = eta;
            rw.u_stat = local_stat(w, ordered_labels, eta, m, n);
            out.push_back(rw);
        }
    }
    return out;
}

RankScanDesign RankScanDesign::build(std::size_t n, std::size_t m,
                                     const KernelSpec& psi,
                                     std::size_t width_max) {
    psi.validate();
    if (n < 2) throw domain_error("rank design: need at least two points");
    if (m == 0 || m >= n) throw domain_error("rank design: need 0 < m < n");
    if (width_max == 0) width_max = default_k_max(n);
    width_max = std::min(width_max, n);

    RankScanDesign sd;
    sd.n_ = n;
    sd.rect_ = psi.is_rectangular();

    const CalibrationConstants consts = make_constants(m, n, psi.psi_sup());
    const double lambda = static_cast<double>(m) / static_cast<double>(n);
    const double pref = std::sqrt(lambda * (1.0 - lambda));
    const double lab1 = weighted_label(1, m, n);
    const double lab2 = weighted_label(2, m, n);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

    // Pattern table: one entry per (width, left-edge) pair that occurs.
    // Interior windows (j >= 1) include offset 0 with weight psi(0); the
    // left-edge variant (j = 0) starts at offset 1. For the rectangular
    // family offset 0 carries weight 0, so a single pattern suffices.
    auto pattern_for = [&](std::uint32_t width, bool edge) -> Pattern {
        Pattern p;
        p.width = width;
        p.t0 = (edge || sd.rect_) ? 1 : 0;
        p.w.reserve(width + 1 - p.t0);
        for (std::uint32_t t = p.t0; t <= width; ++t) {
            const double arg = static_cast<double>(t) / static_cast<double>(width);
            p.w.push_back(sd.rect_ ? (arg <= 1.0 ? 1.0 : 0.0) : psi.evaluate(arg));
        }
        return p;
    };

    // eta and coefficient cache per (width, edge).
    struct Derived {
        std::uint32_t pattern = 0;
        double eta = 0.0;
        double correction = 0.0;
        double coef_mark = 0.0;
        double base_times_lab2 = 0.0;  // coef_base = this * wsum
        double wsum = 0.0;
        bool degenerate = true;
    };
    auto derive = [&](std::uint32_t width, bool edge) -> Derived {
        Derived dv;
        Pattern pat = pattern_for(width, edge);
        double wsum = 0.0, wsq = 0.0;
        for (double w : pat.w) {
            wsum += w;
            wsq += w * w;
        }
        const double gsq = (wsq - wsum * wsum / static_cast<double>(n)) /
                           static_cast<double>(n - 1);
        if (!(gsq > 0.0)) return dv;
        dv.eta = std::sqrt(gsq);
        dv.correction = correction(dv.eta, consts);
        const double base = pref / dv.eta * inv_sqrt_n;
        dv.coef_mark = base * (lab1 - lab2);
        dv.base_times_lab2 = base * lab2;
        dv.wsum = wsum;
        dv.degenerate = false;
        dv.pattern = static_cast<std::uint32_t>(sd.patterns_.size());
        sd.patterns_.push_back(std::move(pat));
        return dv;
    };

    std::vector<Derived> interior(width_max + 1), edge(width_max + 1);
    for (std::uint32_t w = 1; w <= width_max; ++w) {
        interior[w] = derive(w, false);
        edge[w] = sd.rect_ ? interior[w] : derive(w, true);
    }

    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k_hi = std::min(n, j + width_max);
        for (std::size_t k = j + 1; k <= k_hi; ++k) {
            const Derived& dv =
                (j == 0) ? edge[k - j] : interior[k - j];
            if (dv.degenerate) continue;
            Cell c;
            c.j = static_cast<std::uint32_t>(j);
            c.k = static_cast<std::uint32_t>(k);
            c.pattern = dv.pattern;
            c.eta = dv.eta;
            c.correction = dv.correction;
            c.coef_mark = dv.coef_mark;
            c.coef_base = dv.base_times_lab2 * dv.wsum;
            sd.cells_.push_back(c);
        }
    }
    return sd;
}

template <class Visit>
void RankScanDesign::scan(const std::vector<std::uint8_t>& marks,
                          Visit&& visit) const {
    if (rect_) {
        std::vector<double> prefix(n_ + 1, 0.0);
        double run = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            run += static_cast<double>(marks[i]);
            prefix[i + 1] = run;
        }
        for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
            const Cell& c = cells_[ci];
            const double s = prefix[c.k] - prefix[c.j];
            visit(ci, c.coef_mark * s + c.coef_base);
        }
        return;
    }
    for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
        const Cell& c = cells_[ci];
        const Pattern& p = patterns_[c.pattern];
        double s = 0.0;
        // offset t corresponds to order statistic j + t, array position j+t-1
        std::size_t pos = c.j + p.t0 - 1;
        for (double w : p.w) {
            if (marks[pos]) s += w;
            ++pos;
        }
        visit(ci, c.coef_mark * s + c.coef_base);
    }
}

void RankScanDesign::evaluate_all(const std::vector<std::uint8_t>& marks,
                                  std::vector<double>& t_out) const {
    if (marks.size() != n_)
        throw domain_error("rank design: mark vector has wrong length");
    t_out.resize(cells_.size());
    scan(marks, [&](std::size_t ci, double t) { t_out[ci] = t; });
}

double RankScanDesign::evaluate_sup(const std::vector<std::uint8_t>& marks,
                                    bool one_sided) const {
    if (marks.size() != n_)
        throw domain_error("rank design: mark vector has wrong length");
    double sup = -std::numeric_limits<double>::infinity();
    scan(marks, [&](std::size_t ci, double t) {
        const double v = (one_sided ? t : std::fabs(t)) - cells_[ci].correction;
        if (v > sup) sup = v;
    });
    return sup;
}

double RankScanDesign::sup_of(const std::vector<double>& t_cells,
                              bool one_sided) const {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < t_cells.size(); ++ci) {
        const double t = t_cells[ci];
        const double v = (one_sided ? t : std::fabs(t)) - cells_[ci].correction;
        if (v > sup) sup = v;
    }
    return sup;
}

std::vector<ScaleRecord> RankScanDesign::make_records(
    const std::vector<double>& t_cells,
    const std::vector<double>& sorted_values) const {
    std::vector<ScaleRecord> records;
    records.reserve(cells_.size());
    for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
        const Cell& c = cells_[ci];
        const double lo = sorted_values[c.j];      // X_(j+1)
        const double hi = sorted_values[c.k - 1];  // X_(k)
        ScaleRecord r;
        r.j = c.j;
        r.k = c.k;
        r.center.assign(1, 0.5 * (lo + hi));
        r.radius = 0.5 * (hi - lo);
        r.t_stat = t_cells[ci];
        r.gamma = c.eta;
        r.correction = c.correction;
        r.sign = (r.t_stat > 0.0) - (r.t_stat < 0.0);
        records.push_back(std::move(r));
    }
    return records;
}

TestReport univariate_test(const PooledSample& sample,
                           const PermutationConfig& config) {
    config.validate();
    if (sample.d != 1)
        throw domain_error("univariate_test: sample must be one-dimensional");
    using clock_type = std::chrono::steady_clock;
    const auto t0 = clock_type::now();
    auto ms_since = [](clock_type::time_point t) {
        return std::chrono::duration<double, std::milli>(clock_type::now() - t)
            .count();
    };

    // Sort observations (stable tie-break by original index).
    std::vector<std::uint32_t> perm(sample.n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (sample.coords[a] != sample.coords[b])
            return sample.coords[a] < sample.coords[b];
        return a < b;
    });
    std::vector<double> sorted_values(sample.n);
    std::vector<std::uint8_t> marks_obs(sample.n);
    for (std::size_t i = 0; i < sample.n; ++i) {
        sorted_values[i] = sample.coords[perm[i]];
        marks_obs[i] = sample.group[perm[i]] == 1 ? 1 : 0;
    }

    const RankScanDesign design =
        RankScanDesign::build(sample.n, sample.m, config.kernel, config.k_max);
    const double design_ms = ms_since(t0);

    std::vector<std::uint8_t> base(sample.n, 0);
    std::fill(base.begin(), base.begin() + sample.m, std::uint8_t{1});

    const auto t1 = clock_type::now();
    detail::PermCore core = detail::run_perm_core(design, marks_obs, base, config);
    const double perm_ms = ms_since(t1);

    TestReport rep;
    rep.config = config;
    rep.config.k_max = config.k_max == 0 ? default_k_max(sample.n)
                                         : std::min(config.k_max, sample.n);
    rep.n = sample.n;
    rep.m = sample.m;
    rep.d = 1;
    rep.variant = "test1d";
    rep.t_n = core.t_obs;
    rep.kappa_alpha = core.kappa;
    rep.p_value = core.p;
    rep.reject = core.reject;

    const std::vector<ScaleRecord> records =
        design.make_records(core.t_cells, sorted_values);
    for (const auto& r : records) {
        const double t = config.one_sided ? r.t_stat : std::fabs(r.t_stat);
        if (t > r.correction + core.kappa) rep.regions.push_back(r);
    }
    if (config.keep_perm_stats) rep.perm_stats = std::move(core.perm_stats);

    rep.timings.design_ms = design_ms;
    rep.timings.perm_ms = perm_ms;
    rep.timings.total_ms = ms_since(t0);
    return rep;
}

}  // namespace nnmt
