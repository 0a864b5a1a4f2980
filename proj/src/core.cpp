#include "nnmt/core.hpp"

#include <algorithm>
#include <numeric>

namespace nnmt {

void KernelSpec::validate() const {
    switch (family) {
        case KernelFamily::rectangular:
            return;
        case KernelFamily::recovery:
        case KernelFamily::truncated_recovery:
            if (!(beta > 0.0))
                throw domain_error("kernel: beta must be positive");
            if (beta > 1.0)
                throw domain_error(
                    "kernel: recovery family has no closed form for beta > 1");
            if (family == KernelFamily::truncated_recovery && !(trunc > 0.0))
                throw domain_error("kernel: truncation K must be positive");
            return;
    }
    throw domain_error("kernel: unknown family");
}

std::string KernelSpec::name() const {
    switch (family) {
        case KernelFamily::rectangular:
            return "rect";
        case KernelFamily::recovery:
            return "recovery";
        case KernelFamily::truncated_recovery:
            return "truncated-recovery";
    }
    return "unknown";
}

double weighted_label(int flag, std::size_t m, std::size_t n) {
    if (m == 0 || m >= n)
        throw domain_error("weighted_label: need 0 < m < n");
    if (flag != 1 && flag != 2)
        throw domain_error("weighted_label: group flag must be 1 or 2");
    const double nn = static_cast<double>(n);
    if (flag == 1) return nn / static_cast<double>(m);
    return -nn / static_cast<double>(n - m);
}

namespace {

PooledSample finish_sample(std::vector<double> coords, std::size_t d,
                           std::vector<std::uint8_t> flags) {
    PooledSample s;
    s.n = flags.size();
    s.d = d;
    s.coords = std::move(coords);
    s.group = std::move(flags);

    for (double c : s.coords)
        if (!std::isfinite(c))
            throw data_error("sample: non-finite coordinate");

    std::size_t m = 0;
    for (std::uint8_t g : s.group) {
        if (g != 1 && g != 2) throw data_error("sample: group flag must be 1 or 2");
        if (g == 1) ++m;
    }
    if (m == 0 || m == s.n)
        throw data_error("sample: both groups must be nonempty (0 < m < n)");
    s.m = m;

    // Duplicate detection by lexicographic sort of the rows.
    std::vector<std::uint32_t> perm(s.n);
    std::iota(perm.begin(), perm.end(), 0u);
    const double* base = s.coords.data();
    std::sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::lexicographical_compare(base + a * d, base + (a + 1) * d,
                                            base + b * d, base + (b + 1) * d);
    });
    for (std::size_t i = 0; i + 1 < s.n; ++i) {
        const double* a = base + perm[i] * d;
        const double* b = base + perm[i + 1] * d;
        if (std::equal(a, a + d, b)) {
            s.has_duplicates = true;
            break;
        }
    }
    return s;
}

}  // namespace

PooledSample validate_sample(const std::vector<std::vector<double>>& points,
                             const std::vector<int>& flags) {
    if (points.empty()) throw data_error("sample: no points");
    if (points.size() != flags.size())
        throw data_error("sample: points and flags differ in length");
    const std::size_t d = points.front().size();
    if (d == 0) throw data_error("sample: dimension must be at least 1");
    std::vector<double> coords;
    coords.reserve(points.size() * d);
    for (const auto& p : points) {
        if (p.size() != d)
            throw data_error("sample: mixed point dimensions");
        coords.insert(coords.end(), p.begin(), p.end());
    }
    std::vector<std::uint8_t> f(flags.size());
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i] != 1 && flags[i] != 2)
            throw data_error("sample: group flag must be 1 or 2");
        f[i] = static_cast<std::uint8_t>(flags[i]);
    }
    return finish_sample(std::move(coords), d, std::move(f));
}

PooledSample validate_sample(std::vector<double> coords, std::size_t d,
                             std::vector<std::uint8_t> flags) {
    if (d == 0) throw data_error("sample: dimension must be at least 1");
    if (flags.empty()) throw data_error("sample: no points");
    if (coords.size() != flags.size() * d)
        throw data_error("sample: coordinate buffer size mismatch");
    return finish_sample(std::move(coords), d, std::move(flags));
}

WeightedLabels labels_for(const PooledSample& sample) {
    WeightedLabels out;
    out.values.resize(sample.n);
    const double pos = weighted_label(1, sample.m, sample.n);
    const double neg = weighted_label(2, sample.m, sample.n);
    for (std::size_t i = 0; i < sample.n; ++i)
        out.values[i] = sample.group[i] == 1 ? pos : neg;
    return out;
}

WeightedLabels labels_from_marks(const std::vector<std::uint8_t>& marks,
                                 std::size_t m, std::size_t n) {
    if (marks.size() != n)
        throw domain_error("labels_from_marks: mark vector has wrong length");
    std::size_t ones = 0;
    for (std::uint8_t z : marks) ones += (z != 0);
    if (ones != m)
        throw domain_error("labels_from_marks: mark count differs from m");
    WeightedLabels out;
    out.values.resize(n);
    const double pos = weighted_label(1, m, n);
    const double neg = weighted_label(2, m, n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = marks[i] ? pos : neg;
    return out;
}

std::vector<std::uint8_t> marks_of(const WeightedLabels& labels) {
    std::vector<std::uint8_t> z(labels.values.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = labels.values[i] > 0.0 ? 1 : 0;
    return z;
}

}  // namespace nnmt
