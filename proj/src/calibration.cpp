#include "nnmt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nnmt {

double delta_mn(std::size_t m, std::size_t n) {
    if (m == 0 || m >= n) throw domain_error("delta_mn: need 0 < m < n");
    // delta(m,n) = delta(n-m,n); canonicalize so equal pairs are bit-identical.
    if (m > n - m) m = n - m;

    // E min(S/m, (n-S)/(n-m)) with S ~ Bin(n, m/n), via the pmf recurrence
    // p(s+1) = p(s) * ((n-s)/(s+1)) * (m/(n-m)) seeded at the mode with
    // value 1; the common scale cancels in the normalized ratio.
    const long double p = static_cast<long double>(m) / static_cast<long double>(n);
    const long double odds = p / (1.0L - p);
    const long double md = static_cast<long double>(m);
    const long double nmd = static_cast<long double>(n - m);

    const std::size_t mode = static_cast<std::size_t>(
        std::min<long double>(static_cast<long double>(n),
                              std::floor((static_cast<long double>(n) + 1.0L) * p)));

    auto term = [&](std::size_t s, long double w, long double& wsum,
                    long double& vsum) {
        const long double a = static_cast<long double>(s) / md;
        const long double b = static_cast<long double>(n - s) / nmd;
        wsum += w;
        vsum += w * (a < b ? a : b);
    };

    long double wsum = 0.0L, vsum = 0.0L;
    // Downward sweep from the mode (inclusive).
    long double w = 1.0L;
    for (std::size_t s = mode;; --s) {
        term(s, w, wsum, vsum);
        if (s == 0) break;
        // p(s-1) = p(s) * (s / (n-s+1)) / odds
        w *= static_cast<long double>(s) /
             (static_cast<long double>(n - s + 1) * odds);
        if (w == 0.0L) break;
    }
    // Upward sweep from mode+1.
    w = 1.0L;
    for (std::size_t s = mode; s < n;) {
        w *= (static_cast<long double>(n - s) / static_cast<long double>(s + 1)) *
             odds;
        ++s;
        if (w == 0.0L) break;
        term(s, w, wsum, vsum);
    }

    const long double mean_min = vsum / wsum;
    return static_cast<double>(1.0L / mean_min);
}

double r_psi(std::size_t m, std::size_t n, double psi_sup) {
    if (m == 0 || m >= n) throw domain_error("r_psi: need 0 < m < n");
    if (!(psi_sup > 0.0)) throw domain_error("r_psi: psi_sup must be positive");
    const double mm = static_cast<double>(m);
    const double nm = static_cast<double>(n - m);
    return (2.0 * psi_sup / 3.0) * std::max(mm, nm) / std::sqrt(mm * nm);
}

double gamma_log(double gamma_sq) {
    if (!(gamma_sq > 0.0))
        throw domain_error("gamma_log: gamma_sq must be positive");
    const double g = std::log(1.0 / gamma_sq);
    return g > 0.0 ? g : 0.0;
}

CalibrationConstants make_constants(std::size_t m, std::size_t n,
                                    double psi_sup) {
    CalibrationConstants c;
    c.m = m;
    c.n = n;
    c.psi_sup = psi_sup;
    c.delta = delta_mn(m, n);
    c.r_psi = r_psi(m, n, psi_sup);
    c.r_n = c.r_psi / std::sqrt(static_cast<double>(n));
    return c;
}

double correction(double gamma, const CalibrationConstants& consts) {
    if (!(gamma > 0.0)) throw domain_error("correction: gamma must be positive");
    const double big_gamma = gamma_log(gamma * gamma);
    return 3.0 * consts.r_n / gamma * consts.delta * big_gamma +
           consts.delta * std::sqrt(2.0 * big_gamma);
}

double bernstein_quantile(double eta, double gamma,
                          const CalibrationConstants& consts, double lambda) {
    if (!(eta >= 0.0))
        throw domain_error("bernstein_quantile: eta must be nonnegative");
    if (!(gamma > 0.0))
        throw domain_error("bernstein_quantile: gamma must be positive");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw domain_error("bernstein_quantile: lambda must lie in (0,1)");
    const double rt = consts.delta * 2.0 * consts.psi_sup *
                      std::sqrt(lambda * (1.0 - lambda)) /
                      (3.0 * std::min(lambda, 1.0 - lambda) *
                       std::sqrt(static_cast<double>(consts.n)) * gamma);
    const double a = rt * eta;
    return a + std::sqrt(a * a + 2.0 * consts.delta * consts.delta * eta);
}

}  // namespace nnmt
