#include "nnmt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "nnmt/calibration.hpp"

namespace nnmt {

namespace {

constexpr std::size_t kEnumCap = 20;

void check_enum_size(std::size_t n, std::size_t m) {
    if (n == 0 || m == 0 || m >= n)
        throw domain_error("verify: need 0 < m < n");
    if (n > kEnumCap)
        throw domain_error("verify: exact enumeration capped at n = 20");
}

}  // namespace

double binomial_coefficient(std::size_t n, std::size_t m) {
    if (m > n) return 0.0;
    m = std::min(m, n - m);
    double c = 1.0;
    for (std::size_t i = 0; i < m; ++i)
        c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return std::round(c);
}

double hypergeom_std(const std::vector<double>& weights, std::size_t m) {
    const std::size_t n = weights.size();
    check_enum_size(n, m);
    double mean = 0.0;
    for (double w : weights) mean += w;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double w : weights) {
        const double dev = w - mean;
        ss += dev * dev;
    }
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    return std::sqrt(md * (nd - md) / (nd * (nd - 1.0)) * ss);
}

double hypergeom_tail_exact(const std::vector<double>& weights, std::size_t m,
                            double threshold) {
    const std::size_t n = weights.size();
    check_enum_size(n, m);
    const double gamma = hypergeom_std(weights, m);
    if (!(gamma > 0.0))
        throw domain_error("hypergeom_tail_exact: degenerate variance");

    double total = 0.0;
    for (double w : weights) total += w;
    const double lambda = static_cast<double>(m) / static_cast<double>(n);
    const double centered_shift = lambda * total;  // sum psi_i * m/n

    std::size_t hits = 0, count = 0;
    for_each_subset(n, m, [&](const std::vector<std::size_t>& subset) {
        double s = 0.0;
        for (std::size_t i : subset) s += weights[i];
        const double standardized = std::fabs(s - centered_shift) / gamma;
        if (standardized > threshold) ++hits;
        ++count;
    });
    return static_cast<double>(hits) / static_cast<double>(count);
}

InequalityReport check_coupling_bound(const std::vector<double>& weights,
                                      std::size_t m,
                                      const std::vector<double>& eta_grid) {
    const std::size_t n = weights.size();
    check_enum_size(n, m);
    const double gamma = hypergeom_std(weights, m);
    if (!(gamma > 0.0))
        throw domain_error("check_coupling_bound: degenerate variance");

    double mean = 0.0;
    for (double w : weights) mean += w;
    mean /= static_cast<double>(n);
    double max_dev = 0.0;
    for (double w : weights) max_dev = std::max(max_dev, std::fabs(w - mean));

    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    const double lambda = md / nd;
    const double r_const = max_dev / (3.0 * gamma) * std::max(lambda, 1.0 - lambda);
    const double c_const = std::max(md, nd - md) / std::sqrt(md * (nd - md));
    const double delta = delta_mn(m, n);

    InequalityReport rep;
    rep.check = "coupling";
    rep.method = "exact-enumeration";
    rep.n = n;
    rep.m = m;
    rep.weights = weights;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (double eta : eta_grid) {
        InequalityRow row;
        row.param = eta;
        row.lhs = hypergeom_tail_exact(weights, m, delta * eta);
        row.rhs = 2.0 * std::exp(-(eta * eta / 2.0) / (1.0 + eta * r_const));
        row.rhs2 = 2.0 * std::exp(-3.0 * eta / (2.0 * c_const) +
                                  9.0 / (2.0 * c_const * c_const));
        row.margin = std::min(row.rhs - row.lhs, row.rhs2 - row.lhs);
        rep.min_margin = std::min(rep.min_margin, row.margin);
        rep.rows.push_back(row);
    }
    rep.ok = rep.min_margin >= -1e-12;
    return rep;
}

double binomial_expectation_enum(const std::vector<double>& a, double p,
                                 const std::function<double(double)>& psi) {
    const std::size_t n = a.size();
    if (n > 16)
        throw domain_error("binomial_expectation_enum: capped at n = 16");
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("binomial_expectation_enum: p must lie in (0,1)");
    double acc = 0.0;
    const std::size_t total = std::size_t{1} << n;
    for (std::size_t mask = 0; mask < total; ++mask) {
        double s = 0.0;
        double prob = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                s += a[i];
                prob *= p;
            } else {
                prob *= 1.0 - p;
            }
        }
        acc += prob * psi(s);
    }
    return acc;
}

double binomial_expectation_conv(const std::vector<double>& a, double p,
                                 const std::function<double(double)>& psi) {
    const std::size_t n = a.size();
    if (n > kEnumCap)
        throw domain_error("binomial_expectation_conv: capped at n = 20");
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("binomial_expectation_conv: p must lie in (0,1)");
    // Atoms of the distribution of sum a_i Z_i, merged when exactly equal.
    std::vector<std::pair<double, double>> dist{{0.0, 1.0}};
    std::vector<std::pair<double, double>> next;
    for (std::size_t i = 0; i < n; ++i) {
        next.clear();
        next.reserve(dist.size() * 2);
        for (const auto& [v, q] : dist) {
            next.emplace_back(v, q * (1.0 - p));
            next.emplace_back(v + a[i], q * p);
        }
        std::sort(next.begin(), next.end());
        dist.clear();
        for (const auto& atom : next) {
            if (!dist.empty() && dist.back().first == atom.first)
                dist.back().second += atom.second;
            else
                dist.push_back(atom);
        }
    }
    double acc = 0.0;
    for (const auto& [v, q] : dist) acc += q * psi(v);
    return acc;
}

InequalityReport check_decoupling(const std::vector<double>& a, std::size_t m,
                                  PsiFamily family,
                                  const std::vector<double>& params) {
    const std::size_t n = a.size();
    check_enum_size(n, m);
    double total = 0.0;
    for (double v : a) total += v;
    if (std::fabs(total) > 1e-12)
        throw domain_error("check_decoupling: weights must sum to zero");

    const double p = static_cast<double>(m) / static_cast<double>(n);
    const double delta = delta_mn(m, n);
    const double n_subsets = binomial_coefficient(n, m);

    InequalityReport rep;
    rep.check = "decoupling";
    rep.method = "exact-enumeration";
    rep.psi_family = family == PsiFamily::exp_t ? "exp" : "abs-pow";
    rep.n = n;
    rep.m = m;
    rep.weights = a;
    rep.min_margin = std::numeric_limits<double>::infinity();

    for (double param : params) {
        std::function<double(double)> psi;
        if (family == PsiFamily::exp_t) {
            const double t = param;
            psi = [t](double x) { return std::exp(t * x); };
        } else {
            if (!(param >= 1.0))
                throw domain_error("check_decoupling: |x|^p requires p >= 1");
            const double pw = param;
            psi = [pw](double x) { return std::pow(std::fabs(x), pw); };
        }

        double lhs = 0.0;
        for_each_subset(n, m, [&](const std::vector<std::size_t>& subset) {
            double s = 0.0;
            for (std::size_t i : subset) s += a[i];
            lhs += psi(s);
        });
        lhs /= n_subsets;

        std::vector<double> scaled(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) scaled[i] = delta * a[i];
        const double rhs = binomial_expectation_conv(scaled, p, psi);

        InequalityRow row;
        row.param = param;
        row.lhs = lhs;
        row.rhs = rhs;
        row.rhs2 = std::numeric_limits<double>::quiet_NaN();
        row.margin = rhs - lhs;
        rep.min_margin = std::min(rep.min_margin, row.margin);
        rep.rows.push_back(row);
    }
    rep.ok = rep.min_margin >= -1e-12;
    return rep;
}

}  // namespace nnmt
