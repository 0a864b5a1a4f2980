#include "nnmt/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nnmt/classify.hpp"
#include "nnmt/parallel.hpp"

namespace nnmt {

std::size_t default_k_max(std::size_t n) {
    if (n < 2) return 1;
    return std::min(n - 1, (n + 1) / 2);
}

std::vector<double> kernel_weights(const KernelSpec& psi,
                                   const NeighborOrder& order, std::size_t j,
                                   std::size_t k) {
    psi.validate();
    const double r = scale_radius(order, j, k);
    if (!(r > 0.0))
        throw domain_error("kernel_weights: degenerate scale (radius 0)");
    const std::size_t n = order.n;
    const std::uint32_t* row = order.row_idx(j);
    const double* dist = order.row_dist(j);
    std::vector<double> w(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) w[row[t]] = psi.evaluate(dist[t] / r);
    return w;
}

double local_std(const std::vector<double>& weights, std::size_t n) {
    if (n < 2) throw domain_error("local_std: need n >= 2");
    if (weights.size() != n)
        throw domain_error("local_std: weight vector has wrong length");
    double mean = 0.0;
    for (double w : weights) mean += w;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double w : weights) {
        const double dev = w - mean;
        ss += dev * dev;
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double local_stat(const std::vector<double>& weights,
                  const WeightedLabels& labels, double gamma, std::size_t m,
                  std::size_t n) {
    if (!(gamma > 0.0))
        throw domain_error("local_stat: degenerate statistic (gamma 0)");
    if (weights.size() != n || labels.size() != n)
        throw domain_error("local_stat: length mismatch");
    const double lambda = static_cast<double>(m) / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += weights[i] * labels.values[i];
    return std::sqrt(lambda * (1.0 - lambda)) / gamma * sum /
           std::sqrt(static_cast<double>(n));
}

namespace detail {

/// Label-independent cell assembly shared by the two-sample and
/// classification designs; only coefficients and corrections differ.
struct CellMaker {
    bool classify = false;
    std::size_t n = 0;
    double inv_sqrt_n = 0.0;
    // two-sample
    CalibrationConstants consts;
    double pref = 0.0;  // sqrt(lambda(1-lambda)) with lambda = m/n
    double lab1 = 0.0;
    double lab2 = 0.0;
    // classification
    double lambda = 0.0;

    ScanDesign::Cell make(std::uint32_t j, std::uint32_t k, std::uint32_t a,
                          double radius, double gamma, double wsum) const {
        ScanDesign::Cell c;
        c.j = j;
        c.k = k;
        c.prefix = a;
        c.radius = radius;
        c.gamma = gamma;
        if (!classify) {
            const double base = pref / gamma * inv_sqrt_n;
            c.coef_mark = base * (lab1 - lab2);
            c.coef_base = base * lab2 * wsum;
            c.correction = correction(gamma, consts);
        } else {
            const double sigma = std::sqrt(lambda * (1.0 - lambda));
            const double base = 1.0 / (sigma * gamma) * inv_sqrt_n;
            c.coef_mark = base;
            c.coef_base = -base * lambda * wsum;
            c.correction = classify_correction(gamma, lambda, n);
        }
        return c;
    }
};

}  // namespace detail

ScanDesign ScanDesign::build(std::vector<double> coords, std::size_t n,
                             std::size_t d, const KernelSpec& psi,
                             std::size_t k_max, unsigned threads,
                             const detail::CellMaker& maker) {
    psi.validate();
    if (n < 2) throw domain_error("scan design: need at least two points");
    ScanDesign sd;
    sd.coords_ = std::move(coords);
    sd.n_ = n;
    sd.d_ = d;
    sd.kernel_ = psi;
    sd.rect_ = psi.is_rectangular();
    sd.order_ = neighbor_order_points(sd.coords_, n, d, threads);
    if (k_max == 0) k_max = default_k_max(n);
    k_max = std::min(k_max, n - 1);

    std::vector<std::vector<ScanDesign::Cell>> per_center(n);
    parallel_for(n, threads, [&](std::size_t j) {
        const double* dist = sd.order_.row_dist(j);
        auto& out = per_center[j];
        for (std::size_t k = 1; k <= k_max; ++k) {
            const double r = dist[k];
            if (!(r > 0.0)) continue;  // coincident points: degenerate scale
            const std::size_t a =
                static_cast<std::size_t>(std::upper_bound(dist, dist + n, r) - dist);
            double wsum, wsq;
            if (sd.rect_) {
                wsum = static_cast<double>(a);
                wsq = wsum;
            } else {
                wsum = 0.0;
                wsq = 0.0;
                for (std::size_t t = 0; t < a; ++t) {
                    const double w = psi.evaluate(dist[t] / r);
                    wsum += w;
                    wsq += w * w;
                }
            }
            const double gsq = (wsq - wsum * wsum / static_cast<double>(n)) /
                               static_cast<double>(n - 1);
            if (!(gsq > 0.0)) continue;  // constant weights: degenerate gamma
            out.push_back(maker.make(static_cast<std::uint32_t>(j),
                                     static_cast<std::uint32_t>(k),
                                     static_cast<std::uint32_t>(a), r,
                                     std::sqrt(gsq), wsum));
        }
    });

    sd.cell_end_.assign(n + 1, 0);
    std::size_t total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        total += per_center[j].size();
        sd.cell_end_[j + 1] = total;
    }
    sd.cells_.reserve(total);
    sd.max_prefix_.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (const auto& c : per_center[j])
            sd.max_prefix_[j] = std::max(sd.max_prefix_[j], c.prefix);
        sd.cells_.insert(sd.cells_.end(), per_center[j].begin(),
                         per_center[j].end());
    }
    return sd;
}

ScanDesign ScanDesign::two_sample(const PooledSample& sample,
                                  const KernelSpec& psi, std::size_t k_max,
                                  unsigned threads) {
    detail::CellMaker maker;
    maker.classify = false;
    maker.n = sample.n;
    maker.inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(sample.n));
    maker.consts = make_constants(sample.m, sample.n, psi.psi_sup());
    const double lambda =
        static_cast<double>(sample.m) / static_cast<double>(sample.n);
    maker.pref = std::sqrt(lambda * (1.0 - lambda));
    maker.lab1 = weighted_label(1, sample.m, sample.n);
    maker.lab2 = weighted_label(2, sample.m, sample.n);
    return build(sample.coords, sample.n, sample.d, psi, k_max, threads, maker);
}

ScanDesign ScanDesign::classify(const std::vector<double>& coords,
                                std::size_t n, std::size_t d, double lambda,
                                const KernelSpec& psi, std::size_t k_max,
                                unsigned threads) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw domain_error("classify design: lambda must lie in (0,1)");
    detail::CellMaker maker;
    maker.classify = true;
    maker.n = n;
    maker.inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    maker.lambda = lambda;
    return build(coords, n, d, psi, k_max, threads, maker);
}

template <class Visit>
void ScanDesign::scan(const std::vector<std::uint8_t>& marks,
                      Visit&& visit) const {
    std::vector<double> prefix;
    if (rect_) {
        std::uint32_t need = 0;
        for (std::uint32_t p : max_prefix_) need = std::max(need, p);
        prefix.resize(static_cast<std::size_t>(need) + 1);
    }
    std::size_t ci = 0;
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t ce = cell_end_[j + 1];
        if (ci == ce) continue;
        const std::uint32_t* row = order_.row_idx(j);
        if (rect_) {
            const std::size_t need = max_prefix_[j];
            double run = 0.0;
            prefix[0] = 0.0;
            for (std::size_t t = 0; t < need; ++t) {
                run += static_cast<double>(marks[row[t]]);
                prefix[t + 1] = run;
            }
            for (; ci < ce; ++ci) {
                const Cell& c = cells_[ci];
                visit(ci, c.coef_mark * prefix[c.prefix] + c.coef_base);
            }
        } else {
            const double* dist = order_.row_dist(j);
            for (; ci < ce; ++ci) {
                const Cell& c = cells_[ci];
                double s = 0.0;
                for (std::size_t t = 0; t < c.prefix; ++t)
                    if (marks[row[t]]) s += kernel_.evaluate(dist[t] / c.radius);
                visit(ci, c.coef_mark * s + c.coef_base);
            }
        }
    }
}

void ScanDesign::evaluate_all(const std::vector<std::uint8_t>& marks,
                              std::vector<double>& t_out) const {
    if (marks.size() != n_)
        throw domain_error("scan design: mark vector has wrong length");
    t_out.resize(cells_.size());
    scan(marks, [&](std::size_t ci, double t) { t_out[ci] = t; });
}

double ScanDesign::evaluate_sup(const std::vector<std::uint8_t>& marks,
                                bool one_sided) const {
    if (marks.size() != n_)
        throw domain_error("scan design: mark vector has wrong length");
    double sup = -std::numeric_limits<double>::infinity();
    scan(marks, [&](std::size_t ci, double t) {
        const double v = (one_sided ? t : std::fabs(t)) - cells_[ci].correction;
        if (v > sup) sup = v;
    });
    return sup;
}

double ScanDesign::sup_of(const std::vector<double>& t_cells,
                          bool one_sided) const {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < t_cells.size(); ++ci) {
        const double t = t_cells[ci];
        const double v = (one_sided ? t : std::fabs(t)) - cells_[ci].correction;
        if (v > sup) sup = v;
    }
    return sup;
}

std::vector<ScaleRecord> ScanDesign::make_records(
    const std::vector<double>& t_cells) const {
    std::vector<ScaleRecord> records;
    records.reserve(cells_.size());
    for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
        const Cell& c = cells_[ci];
        ScaleRecord r;
        r.j = c.j;
        r.k = c.k;
        r.center.assign(coords_.begin() + c.j * d_,
                        coords_.begin() + (c.j + 1) * d_);
        r.radius = c.radius;
        r.t_stat = t_cells[ci];
        r.gamma = c.gamma;
        r.correction = c.correction;
        r.sign = (r.t_stat > 0.0) - (r.t_stat < 0.0);
        records.push_back(std::move(r));
    }
    return records;
}

MultiscaleResult multiscale_stat(const PooledSample& sample,
                                 const WeightedLabels& labels,
                                 const KernelSpec& psi, std::size_t k_max,
                                 bool one_sided, unsigned threads) {
    const ScanDesign design = ScanDesign::two_sample(sample, psi, k_max, threads);
    const std::vector<std::uint8_t> marks = marks_of(labels);
    std::vector<double> t_cells;
    design.evaluate_all(marks, t_cells);
    MultiscaleResult out;
    out.one_sided = one_sided;
    out.records = design.make_records(t_cells);
    out.t_n = design.sup_of(t_cells, one_sided);
    return out;
}

std::vector<ScaleRecord> significant_regions(const MultiscaleResult& result,
                                             double kappa) {
    std::vector<ScaleRecord> out;
    for (const auto& r : result.records) {
        const double t = result.one_sided ? r.t_stat : std::fabs(r.t_stat);
        if (t > r.correction + kappa) out.push_back(r);
    }
    return out;
}

}  // namespace nnmt
