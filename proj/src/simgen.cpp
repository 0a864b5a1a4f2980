#include "nnmt/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "nnmt/parallel.hpp"
#include "nnmt/recovery.hpp"

namespace nnmt {

using json = nlohmann::ordered_json;

namespace {

std::size_t cell_count(const GridDensity& h) {
    std::size_t c = 1;
    for (std::size_t r : h.resolution) c *= r;
    return c;
}

std::size_t cell_index(const GridDensity& h, const double* x, std::size_t d) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < d; ++a) {
        const std::size_t res = h.resolution[a];
        double pos = x[a] * static_cast<double>(res);
        long cell = static_cast<long>(std::floor(pos));
        if (cell < 0) cell = 0;
        if (cell >= static_cast<long>(res)) cell = static_cast<long>(res) - 1;
        idx = idx * res + static_cast<std::size_t>(cell);
    }
    return idx;
}

double squared_dist(const double* x, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t a = 0; a < c.size(); ++a) {
        const double diff = x[a] - c[a];
        s += diff * diff;
    }
    return s;
}

}  // namespace

double density_h(const Scenario& s, const double* x) {
    return s.h.value[cell_index(s.h, x, s.d)];
}

double phi_value(const Scenario& s, const double* x) {
    if (s.phi.type == PhiType::zero) return 0.0;
    const double r2 = squared_dist(x, s.phi.center);
    const double delta = s.phi.delta;
    const double outer = s.phi.kappa * delta;
    if (r2 > outer * outer) return 0.0;
    if (r2 <= delta * delta) {
        if (s.phi.type == PhiType::plateau) return s.amp_pos;
        const double r = std::sqrt(r2);
        return s.amp_pos * detail::psi_recovery(r / delta, s.phi.beta);
    }
    return -s.amp_neg;
}

double density_p(const Scenario& s, const double* x) {
    const double h = density_h(s, x);
    const double lambda = static_cast<double>(s.m) / static_cast<double>(s.n);
    return h + (1.0 - lambda) * phi_value(s, x) * std::sqrt(h);
}

double density_q(const Scenario& s, const double* x) {
    const double h = density_h(s, x);
    const double lambda = static_cast<double>(s.m) / static_cast<double>(s.n);
    return h - lambda * phi_value(s, x) * std::sqrt(h);
}

double sup_density_p(const Scenario& s) {
    double sup = *std::max_element(s.h.value.begin(), s.h.value.end());
    if (s.phi.type != PhiType::zero) {
        const double lambda = static_cast<double>(s.m) / static_cast<double>(s.n);
        sup = std::max(sup, s.h_focal + (1.0 - lambda) * s.amp_pos *
                                            std::sqrt(s.h_focal));
    }
    return sup;
}

double sup_density_q(const Scenario& s) {
    double sup = *std::max_element(s.h.value.begin(), s.h.value.end());
    if (s.phi.type != PhiType::zero) {
        const double lambda = static_cast<double>(s.m) / static_cast<double>(s.n);
        sup = std::max(sup,
                       s.h_focal + lambda * s.amp_neg * std::sqrt(s.h_focal));
    }
    return sup;
}

void validate_scenario(Scenario& s) {
    if (s.d == 0) throw data_error("scenario: dimension must be at least 1");
    if (s.n < 2 || s.m == 0 || s.m >= s.n)
        throw data_error("scenario: need 0 < m < n and n >= 2");
    if (s.replications == 0)
        throw data_error("scenario: replications must be positive");

    // Mixed density h.
    if (s.h.resolution.empty())
        s.h.resolution.assign(s.d, 1);  // uniform default
    if (s.h.resolution.size() != s.d)
        throw data_error("scenario: h resolution must have one entry per axis");
    for (std::size_t r : s.h.resolution)
        if (r == 0) throw data_error("scenario: h resolution entries must be >= 1");
    const std::size_t cells = cell_count(s.h);
    if (s.h.value.empty()) s.h.value.assign(cells, 1.0);
    if (s.h.value.size() != cells)
        throw data_error("scenario: h needs one mass per grid cell");
    double mass = 0.0;
    for (double v : s.h.value) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw data_error("scenario: h masses must be finite and nonnegative");
        mass += v;
    }
    if (!(mass > 0.0)) throw data_error("scenario: h must have positive mass");
    // Convert cell masses to density levels (each cell has volume 1/#cells).
    const double cell_volume = 1.0 / static_cast<double>(cells);
    for (double& v : s.h.value) v = v / (mass * cell_volume);

    if (s.phi.type == PhiType::zero) {
        s.amp_pos = s.amp_neg = 0.0;
        s.h_focal = s.h.value[0];
        return;
    }

    // Deviation geometry.
    if (s.phi.center.size() != s.d)
        throw data_error("scenario: phi center must have d coordinates");
    if (!(s.phi.delta > 0.0))
        throw data_error("scenario: phi delta must be positive");
    if (s.phi.kappa == 0.0)
        s.phi.kappa = std::pow(2.0, 1.0 / static_cast<double>(s.d));
    if (!(s.phi.kappa > 1.0))
        throw data_error("scenario: phi kappa must exceed 1");
    const double outer = s.phi.kappa * s.phi.delta;
    for (std::size_t a = 0; a < s.d; ++a) {
        if (s.phi.center[a] - outer < 0.0 || s.phi.center[a] + outer > 1.0)
            throw data_error(
                "scenario: deviation support must lie inside the unit cube");
    }
    // The support ball must sit inside one constant-h cell so that
    // int phi sqrt(h) = sqrt(h_focal) int phi = 0 stays exact.
    const std::size_t focal = cell_index(s.h, s.phi.center.data(), s.d);
    {
        std::size_t idx = focal;
        std::vector<std::size_t> coord(s.d);
        for (std::size_t a = s.d; a-- > 0;) {
            coord[a] = idx % s.h.resolution[a];
            idx /= s.h.resolution[a];
        }
        for (std::size_t a = 0; a < s.d; ++a) {
            const double res = static_cast<double>(s.h.resolution[a]);
            const double lo = static_cast<double>(coord[a]) / res;
            const double hi = static_cast<double>(coord[a] + 1) / res;
            if (s.phi.center[a] - outer < lo || s.phi.center[a] + outer > hi)
                throw data_error(
                    "scenario: deviation support must lie inside a single "
                    "constant-h cell");
        }
    }
    s.h_focal = s.h.value[focal];
    if (!(s.h_focal > 0.0))
        throw data_error("scenario: deviation placed on a zero-density cell");

    // Amplitudes: positive part and the equal-integral negative annulus.
    const double dd = static_cast<double>(s.d);
    const double kd = std::pow(s.phi.kappa, dd);
    if (s.phi.type == PhiType::plateau) {
        if (!(s.phi.c >= 0.0))
            throw data_error("scenario: plateau signal c must be nonnegative");
        s.amp_pos = s.phi.c / std::sqrt(static_cast<double>(s.n) *
                                        std::pow(s.phi.delta, dd));
        s.amp_neg = s.amp_pos / (kd - 1.0);
    } else {
        if (!(s.phi.beta > 0.0) || s.phi.beta > 1.0)
            throw data_error("scenario: holder bump requires beta in (0,1]");
        if (!(s.phi.L > 0.0))
            throw data_error("scenario: holder bump requires L > 0");
        s.amp_pos = s.phi.L * std::pow(s.phi.delta, s.phi.beta);
        // integral of the positive bump = amp * V_d delta^d * beta/(d+beta)
        s.amp_neg = s.amp_pos * s.phi.beta / ((dd + s.phi.beta) * (kd - 1.0));
    }

    // Nonnegativity of p and q (exact on the two closed-form regions).
    const double lambda = static_cast<double>(s.m) / static_cast<double>(s.n);
    const double sqrt_hf = std::sqrt(s.h_focal);
    if (s.h_focal - lambda * s.amp_pos * sqrt_hf < -1e-12)
        throw data_error("scenario: q becomes negative on the deviation ball");
    if (s.h_focal - (1.0 - lambda) * s.amp_neg * sqrt_hf < -1e-12)
        throw data_error("scenario: p becomes negative on the annulus");

    // Belt-and-braces grid sweep for low dimensions.
    if (s.d <= 3) {
        const std::size_t g = s.d == 3 ? 17 : 41;
        std::vector<double> x(s.d, 0.0);
        std::vector<std::size_t> ix(s.d, 0);
        while (true) {
            for (std::size_t a = 0; a < s.d; ++a)
                x[a] = (static_cast<double>(ix[a]) + 0.5) / static_cast<double>(g);
            if (density_p(s, x.data()) < -1e-9 || density_q(s, x.data()) < -1e-9)
                throw data_error("scenario: negative density on the check grid");
            std::size_t a = 0;
            while (a < s.d && ++ix[a] == g) {
                ix[a] = 0;
                ++a;
            }
            if (a == s.d) break;
        }
    }
}

namespace {

PhiSpec phi_from_json(const json& j) {
    PhiSpec phi;
    const std::string type = j.at("type").get<std::string>();
    if (type == "zero") {
        phi.type = PhiType::zero;
        return phi;
    }
    if (type == "plateau") {
        phi.type = PhiType::plateau;
        phi.c = j.at("c").get<double>();
    } else if (type == "holder") {
        phi.type = PhiType::holder_bump;
        phi.beta = j.at("beta").get<double>();
        phi.L = j.at("L").get<double>();
    } else {
        throw data_error("scenario: unknown phi type '" + type + "'");
    }
    phi.center = j.at("center").get<std::vector<double>>();
    phi.delta = j.at("delta").get<double>();
    if (j.contains("kappa")) phi.kappa = j.at("kappa").get<double>();
    return phi;
}

GridDensity h_from_json(const json& j, std::size_t d) {
    GridDensity h;
    const std::string type = j.at("type").get<std::string>();
    if (type == "uniform") {
        h.resolution.assign(d, 1);
        h.value.assign(1, 1.0);
        return h;
    }
    if (type != "grid")
        throw data_error("scenario: unknown h type '" + type + "'");
    h.resolution = j.at("resolution").get<std::vector<std::size_t>>();
    h.value = j.at("masses").get<std::vector<double>>();
    return h;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string("scenario: JSON parse failure: ") + e.what());
    }
    Scenario s;
    try {
        s.d = j.at("d").get<std::size_t>();
        s.n = j.at("n").get<std::size_t>();
        s.m = j.at("m").get<std::size_t>();
        if (j.contains("replications"))
            s.replications = j.at("replications").get<std::size_t>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("h")) s.h = h_from_json(j.at("h"), s.d);
        if (j.contains("phi")) s.phi = phi_from_json(j.at("phi"));
    } catch (const json::exception& e) {
        throw data_error(std::string("scenario: bad field: ") + e.what());
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("scenario: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

PooledSample sample_scenario(const Scenario& s, RngStream& stream,
                             SampleStats* stats) {
    const double sup_p = sup_density_p(s);
    const double sup_q = sup_density_q(s);
    std::vector<double> coords(s.n * s.d);
    std::vector<std::uint8_t> flags(s.n);
    std::vector<double> x(s.d);

    auto draw = [&](double sup, auto&& dens, double* out, SampleStats* st,
                    bool first) {
        while (true) {
            for (std::size_t a = 0; a < s.d; ++a) x[a] = stream.next_unit();
            const double u = stream.next_unit();
            if (st) {
                if (first)
                    ++st->proposals_p;
                else
                    ++st->proposals_q;
            }
            if (u * sup <= dens(s, x.data())) {
                std::copy(x.begin(), x.end(), out);
                return;
            }
        }
    };

    for (std::size_t i = 0; i < s.m; ++i) {
        draw(sup_p, density_p, coords.data() + i * s.d, stats, true);
        flags[i] = 1;
    }
    for (std::size_t i = s.m; i < s.n; ++i) {
        draw(sup_q, density_q, coords.data() + i * s.d, stats, false);
        flags[i] = 2;
    }
    return validate_sample(std::move(coords), s.d, std::move(flags));
}

namespace {

double log_binom_pmf(std::size_t j, std::size_t n, double p) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(j) + 1.0) -
           std::lgamma(static_cast<double>(n - j) + 1.0) +
           static_cast<double>(j) * std::log(p) +
           static_cast<double>(n - j) * std::log1p(-p);
}

double binom_cdf(std::size_t k, std::size_t n, double p) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j) acc += std::exp(log_binom_pmf(j, n, p));
    return std::min(acc, 1.0);
}

}  // namespace

std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n,
                                          double confidence) {
    if (n == 0 || k > n)
        throw domain_error("clopper_pearson: need 0 <= k <= n, n > 0");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw domain_error("clopper_pearson: confidence must lie in (0,1)");
    const double half_alpha = 0.5 * (1.0 - confidence);

    double low = 0.0;
    if (k > 0) {
        // smallest p with P(X >= k | p) >= half_alpha
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double tail_ge = 1.0 - binom_cdf(k - 1, n, mid);
            if (tail_ge < half_alpha)
                lo = mid;
            else
                hi = mid;
        }
        low = 0.5 * (lo + hi);
    }
    double high = 1.0;
    if (k < n) {
        // largest p with P(X <= k | p) >= half_alpha
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double tail_le = binom_cdf(k, n, mid);
            if (tail_le < half_alpha)
                hi = mid;
            else
                lo = mid;
        }
        high = 0.5 * (lo + hi);
    }
    return {low, high};
}

double ball_jaccard(const std::vector<double>& c1, double r1,
                    const std::vector<double>& c2, double r2) {
    if (c1.size() != c2.size())
        throw domain_error("ball_jaccard: dimension mismatch");
    const std::size_t d = c1.size();
    if (d == 0) throw domain_error("ball_jaccard: dimension must be >= 1");
    if (!(r1 >= 0.0) || !(r2 >= 0.0))
        throw domain_error("ball_jaccard: radii must be nonnegative");
    if (r1 == 0.0 && r2 == 0.0) return 0.0;

    const double t = std::sqrt(squared_dist(c1.data(), c2));
    const double dd = static_cast<double>(d);
    const double vol1 = unit_ball_volume(d) * std::pow(r1, dd);
    const double vol2 = unit_ball_volume(d) * std::pow(r2, dd);

    double inter = 0.0;
    if (t >= r1 + r2 || r1 == 0.0 || r2 == 0.0) {
        inter = 0.0;
    } else if (t + std::min(r1, r2) <= std::max(r1, r2)) {
        inter = std::min(vol1, vol2);
    } else {
        // slice the lens along the center line: at coordinate x (from c1)
        // the cross-section is a (d-1)-ball of radius min(rho1, rho2)
        const double a = std::max(-r1, t - r2);
        const double b = std::min(r1, t + r2);
        const double slice_const = d > 1 ? unit_ball_volume(d - 1) : 1.0;
        auto f = [&](double x) {
            const double s1 = std::max(r1 * r1 - x * x, 0.0);
            const double s2 = std::max(r2 * r2 - (x - t) * (x - t), 0.0);
            const double rho = std::sqrt(std::min(s1, s2));
            return slice_const * std::pow(rho, dd - 1.0);
        };
        const int panels = 4096;
        const double hstep = (b - a) / panels;
        double acc = f(a) + f(b);
        for (int i = 1; i < panels; ++i)
            acc += f(a + hstep * i) * (i % 2 ? 4.0 : 2.0);
        inter = acc * hstep / 3.0;
    }
    const double uni = vol1 + vol2 - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

PowerSummary power_study(const Scenario& s, const PermutationConfig& config) {
    config.validate();
    const std::size_t reps = s.replications;
    std::vector<std::uint8_t> rejected(reps, 0);
    std::vector<double> overlap(reps, 0.0);

    parallel_for(reps, config.threads, [&](std::size_t r) {
        RngStream stream(s.seed, 2 * r);
        const PooledSample sample = sample_scenario(s, stream);
        PermutationConfig cfg = config;
        cfg.threads = 1;
        cfg.keep_perm_stats = false;
        cfg.seed = derive_stream_key(s.seed, 2 * r + 1);
        const TestReport rep = run_test(sample, cfg);
        rejected[r] = rep.reject ? 1 : 0;
        if (rep.reject && s.phi.type != PhiType::zero && !rep.regions.empty()) {
            const ScaleRecord* best = &rep.regions.front();
            double best_v = -std::numeric_limits<double>::infinity();
            for (const auto& reg : rep.regions) {
                const double v = std::fabs(reg.t_stat) - reg.correction;
                if (v > best_v) {
                    best_v = v;
                    best = &reg;
                }
            }
            overlap[r] = ball_jaccard(best->center, best->radius, s.phi.center,
                                      s.phi.delta);
        }
    });

    PowerSummary out;
    out.reps = reps;
    for (std::size_t r = 0; r < reps; ++r) {
        if (rejected[r]) {
            ++out.rejections;
            out.mean_jaccard += overlap[r];
            if (overlap[r] > 0.0) ++out.covered;
        }
    }
    out.rate = static_cast<double>(out.rejections) / static_cast<double>(reps);
    const auto ci = clopper_pearson(out.rejections, reps, 0.95);
    out.ci_low = ci.first;
    out.ci_high = ci.second;
    out.mean_jaccard =
        out.rejections ? out.mean_jaccard / static_cast<double>(out.rejections)
                       : 0.0;
    return out;
}

}  // namespace nnmt
