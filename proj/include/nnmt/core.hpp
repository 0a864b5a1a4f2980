#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nnmt/errors.hpp"

namespace nnmt {

/// Pooled two-sample data: n points in R^d with group flags (1 or 2).
/// Immutable after construction through validate_sample().
struct PooledSample {
    std::size_t n = 0;  ///< total number of points
    std::size_t m = 0;  ///< number of group-1 points (0 < m < n)
    std::size_t d = 0;  ///< dimension
    std::vector<double> coords;        ///< n*d, row-major
    std::vector<std::uint8_t> group;   ///< n flags, each 1 or 2
    bool has_duplicates = false;       ///< at least two coincident points

    const double* point(std::size_t i) const { return coords.data() + i * d; }
};

/// Weighted labels Lambda: n/m for group 1, -n/(n-m) for group 2.
/// Invariant: sum of reciprocals is exactly zero (m positive entries).
struct WeightedLabels {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// Kernel families usable as psi in the local statistics. All built-in
/// kernels satisfy psi(0) = 1, sup |psi| = 1 and psi(x) = 0 for x > 1.
enum class KernelFamily {
    rectangular,
    recovery,            ///< (1 - x^beta)_+, closed form requires beta <= 1
    truncated_recovery,  ///< recovery with explicit truncation parameter K
};

namespace detail {

/// Raw recovery kernel (1 - r^beta)_+ for r >= 0. Callers validate beta.
inline double psi_recovery(double r, double beta) {
    if (r >= 1.0) return 0.0;
    if (r <= 0.0) return 1.0;
    const double v = 1.0 - std::pow(r, beta);
    return v > 0.0 ? v : 0.0;
}

}  // namespace detail

struct KernelSpec {
    KernelFamily family = KernelFamily::rectangular;
    double beta = 1.0;   ///< smoothness parameter (recovery families)
    double trunc = 1.0;  ///< K > 0 (truncated_recovery only)

    static KernelSpec rect() { return KernelSpec{}; }
    static KernelSpec recovery(double beta) {
        return KernelSpec{KernelFamily::recovery, beta, 1.0};
    }
    static KernelSpec truncated(double beta, double K) {
        return KernelSpec{KernelFamily::truncated_recovery, beta, K};
    }

    bool is_rectangular() const { return family == KernelFamily::rectangular; }

    /// Throws domain_error for invalid parameters (beta <= 0, beta > 1, K <= 0).
    void validate() const;

    /// Evaluate psi(x) for x >= 0 (after rescaling the support to [0,1]).
    double evaluate(double x) const {
        if (family == KernelFamily::rectangular) return x <= 1.0 ? 1.0 : 0.0;
        return detail::psi_recovery(x, beta);
    }

    /// sup over [0, infinity) of |psi|; 1 for every built-in family.
    double psi_sup() const { return 1.0; }

    std::string name() const;
};

/// Lambda(X_i) = n/m if flag = 1, -n/(n-m) if flag = 2.
double weighted_label(int flag, std::size_t m, std::size_t n);

/// Construct a validated PooledSample from raw rows and flags.
/// Throws data_error on dimension mismatch, non-finite coordinates, or a
/// degenerate group split (m = 0 or m = n). Duplicate points are allowed
/// and only flagged (has_duplicates).
PooledSample validate_sample(const std::vector<std::vector<double>>& points,
                             const std::vector<int>& flags);

/// Flat overload: coords is n*d row-major.
PooledSample validate_sample(std::vector<double> coords, std::size_t d,
                             std::vector<std::uint8_t> flags);

/// Observed weighted labels of a sample.
WeightedLabels labels_for(const PooledSample& sample);

/// Labels from a 0/1 mark vector (1 = group 1); exactly m marks required.
WeightedLabels labels_from_marks(const std::vector<std::uint8_t>& marks,
                                 std::size_t m, std::size_t n);

/// Group-1 indicator vector of a label set (values[i] > 0).
std::vector<std::uint8_t> marks_of(const WeightedLabels& labels);

}  // namespace nnmt
