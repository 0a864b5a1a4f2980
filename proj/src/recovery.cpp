#include "nnmt/recovery.hpp"

#include <cmath>

#include "nnmt/core.hpp"

namespace nnmt {

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0)) throw domain_error("recovery: beta must be positive");
    if (beta > 1.0)
        throw domain_error(
            "recovery: closed-form kernel unavailable for beta > 1");
}

// Adaptive Simpson quadrature with absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double eps) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

}  // namespace

double unit_ball_volume(std::size_t d) {
    if (d == 0) throw domain_error("unit_ball_volume: dimension must be >= 1");
    const double half_d = 0.5 * static_cast<double>(d);
    return std::pow(M_PI, half_d) / std::tgamma(half_d + 1.0);
}

double psi_beta(double r, double beta) {
    check_beta(beta);
    if (!(r >= 0.0)) throw domain_error("psi_beta: r must be nonnegative");
    return detail::psi_recovery(r, beta);
}

double recovery_norm(double beta, std::size_t d) {
    check_beta(beta);
    if (d == 0) throw domain_error("recovery_norm: dimension must be >= 1");
    const double dd = static_cast<double>(d);
    return dd * unit_ball_volume(d) *
           (1.0 / dd - 2.0 / (dd + beta) + 1.0 / (dd + 2.0 * beta));
}

double recovery_norm_quadrature(double beta, std::size_t d) {
    check_beta(beta);
    if (d == 0) throw domain_error("recovery_norm: dimension must be >= 1");
    const double dd = static_cast<double>(d);
    const double shell = dd * unit_ball_volume(d);
    auto f = [&](double r) {
        const double v = detail::psi_recovery(r, beta);
        return v * v * std::pow(r, dd - 1.0) * shell;
    };
    return integrate(f, 0.0, 1.0, 1e-13);
}

double separation_constant(double beta, double L, std::size_t d) {
    check_beta(beta);
    if (!(L > 0.0)) throw domain_error("separation_constant: L must be positive");
    if (d == 0)
        throw domain_error("separation_constant: dimension must be >= 1");
    const double dd = static_cast<double>(d);
    const double norm_sq = recovery_norm(beta, d);
    const double base =
        2.0 * dd * std::pow(L, dd / beta) / ((2.0 * beta + dd) * norm_sq);
    return std::pow(base, beta / (2.0 * beta + dd));
}

double critical_rate(std::size_t m, std::size_t n, double beta, std::size_t d) {
    if (m == 0 || m >= n) throw domain_error("critical_rate: need 0 < m < n");
    if (n < 2) throw domain_error("critical_rate: need n >= 2");
    if (!(beta > 0.0)) throw domain_error("critical_rate: beta must be positive");
    if (d == 0) throw domain_error("critical_rate: dimension must be >= 1");
    const double nn = static_cast<double>(n);
    const double arg = nn * std::log(nn) /
                       (static_cast<double>(m) * static_cast<double>(n - m));
    return std::pow(arg, beta / (2.0 * beta + static_cast<double>(d)));
}

RecoveryConstants recovery_constants(double beta, double L, std::size_t d,
                                     std::size_t m, std::size_t n) {
    RecoveryConstants rc;
    rc.beta = beta;
    rc.L = L;
    rc.d = d;
    rc.norm_sq = recovery_norm(beta, d);
    rc.c = separation_constant(beta, L, d);
    rc.rho = critical_rate(m, n, beta, d);
    return rc;
}

}  // namespace nnmt
