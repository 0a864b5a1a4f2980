#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nnmt/errors.hpp"

namespace nnmt {

/// Convex test functions used on the binomial side of the decoupling check.
enum class PsiFamily {
    exp_t,    ///< Psi(x) = exp(t x), parameter t
    abs_pow,  ///< Psi(x) = |x|^p, parameter p >= 1
};

/// One grid point of an inequality check. rhs2 is NaN when the check has a
/// single bound (decoupling).
struct InequalityRow {
    double param = 0.0;  ///< eta (coupling) or t / p (decoupling)
    double lhs = 0.0;
    double rhs = 0.0;    ///< Bernstein-form bound (coupling) or binomial side
    double rhs2 = 0.0;   ///< linearized bound (coupling only)
    double margin = 0.0; ///< min over applicable bounds of (bound - lhs)
};

struct InequalityReport {
    std::string check;        ///< "coupling" | "decoupling"
    std::string method;       ///< "exact-enumeration"
    std::string psi_family;   ///< decoupling: "exp" | "abs-pow"
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> weights;
    std::vector<InequalityRow> rows;
    double min_margin = 0.0;
    bool ok = false;          ///< min_margin >= -1e-12
};

/// Visit every m-subset of {0..n-1} (as sorted index vectors).
template <class F>
void for_each_subset(std::size_t n, std::size_t m, F&& fn) {
    if (m > n) throw domain_error("for_each_subset: m exceeds n");
    std::vector<std::size_t> c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = i;
    while (true) {
        fn(static_cast<const std::vector<std::size_t>&>(c));
        if (m == 0) return;
        // advance to the next combination in lexicographic order
        std::size_t i = m;
        while (i > 0 && c[i - 1] == n - m + (i - 1)) --i;
        if (i == 0) return;
        ++c[i - 1];
        for (std::size_t t = i; t < m; ++t) c[t] = c[t - 1] + 1;
    }
}

/// Number of m-subsets of an n-set (exact for n <= 20).
double binomial_coefficient(std::size_t n, std::size_t m);

/// Exact P(|sum_i psi_i (Z_i - m/n)| / gamma_{m,n} > threshold | sum Z = m)
/// by enumerating all C(n,m) subsets; n <= 20. gamma_{m,n}^2 is the
/// conditional variance (m(n-m)/(n(n-1))) sum (psi_i - mean)^2.
double hypergeom_tail_exact(const std::vector<double>& weights, std::size_t m,
                            double threshold);

/// gamma_{m,n} of a weight vector (exposed for tests and reports).
double hypergeom_std(const std::vector<double>& weights, std::size_t m);

/// Exact verification of both coupling exponential bounds on an eta grid.
InequalityReport check_coupling_bound(const std::vector<double>& weights,
                                      std::size_t m,
                                      const std::vector<double>& eta_grid);

/// Exact verification of the decoupling inequality
/// E(Psi(sum a_i Z_i) | sum Z = m) <= E Psi(delta(m,n) sum a_i Z_i)
/// for centered a (sum a_i = 0), on a parameter grid of the Psi family.
InequalityReport check_decoupling(const std::vector<double>& a, std::size_t m,
                                  PsiFamily family,
                                  const std::vector<double>& params);

/// E Psi(sum a_i Z_i) with Z_i iid Bernoulli(p), by 2^n enumeration (n <= 16).
double binomial_expectation_enum(const std::vector<double>& a, double p,
                                 const std::function<double(double)>& psi);

/// Same expectation via the exact distribution of sum a_i Z_i built by
/// convolution (merging exactly equal atoms); n <= 20.
double binomial_expectation_conv(const std::vector<double>& a, double p,
                                 const std::function<double(double)>& psi);

}  // namespace nnmt
