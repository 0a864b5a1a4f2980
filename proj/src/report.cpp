#include "nnmt/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

namespace nnmt {

using json = nlohmann::ordered_json;

namespace {

void append_indent(std::string& out, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

void append_value(const json& v, std::string& out, int depth) {
    switch (v.type()) {
        case json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case json::value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            break;
        case json::value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            break;
        case json::value_t::number_float: {
            const double x = v.get<double>();
            if (!std::isfinite(x)) {
                out += "null";
                break;
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out += buf;
            break;
        }
        case json::value_t::string:
            out += json(v.get<std::string>()).dump();
            break;
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ",\n";
                first = false;
                append_indent(out, depth + 1);
                append_value(item, out, depth + 1);
            }
            out += '\n';
            append_indent(out, depth);
            out += ']';
            break;
        }
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                append_indent(out, depth + 1);
                out += json(it.key()).dump();
                out += ": ";
                append_value(it.value(), out, depth + 1);
            }
            out += '\n';
            append_indent(out, depth);
            out += '}';
            break;
        }
        default:
            out += "null";
            break;
    }
}

}  // namespace

std::string dump_json(const json& value) {
    std::string out;
    append_value(value, out, 0);
    out += '\n';
    return out;
}

json kernel_to_json(const KernelSpec& kernel) {
    json j;
    j["family"] = kernel.name();
    if (kernel.family != KernelFamily::rectangular) j["beta"] = kernel.beta;
    if (kernel.family == KernelFamily::truncated_recovery)
        j["trunc"] = kernel.trunc;
    return j;
}

namespace {

json config_to_json(const PermutationConfig& c, double lambda,
                    bool include_seed) {
    json j;
    j["kernel"] = kernel_to_json(c.kernel);
    j["k_max"] = c.k_max;
    j["perms"] = c.B;
    j["alpha"] = c.alpha;
    if (include_seed) j["seed"] = c.seed;
    j["one_sided"] = c.one_sided;
    if (std::isfinite(lambda)) j["lambda"] = lambda;
    return j;
}

json timings_to_json(const TestReport::Timings& t) {
    json j;
    j["design_ms"] = t.design_ms;
    j["perm_ms"] = t.perm_ms;
    j["total_ms"] = t.total_ms;
    return j;
}

}  // namespace

json report_to_json(const TestReport& report) {
    json j;
    j["schema_version"] = 1;
    j["command"] = report.variant;
    j["config"] = config_to_json(report.config, report.lambda, true);

    json sample;
    sample["n"] = report.n;
    sample["m"] = report.m;
    sample["d"] = report.d;
    j["sample"] = sample;

    j["t_n"] = report.t_n;
    j["kappa_alpha"] = report.kappa_alpha;
    j["p_value"] = report.p_value;
    j["reject"] = report.reject;

    json regions = json::array();
    for (const ScaleRecord& r : report.regions) {
        json jr;
        jr["center"] = r.center;
        jr["radius"] = r.radius;
        jr["j"] = r.j;
        jr["k"] = r.k;
        jr["t_stat"] = r.t_stat;
        jr["correction"] = r.correction;
        jr["sign"] = r.sign;
        regions.push_back(std::move(jr));
    }
    j["regions"] = std::move(regions);

    if (!report.perm_stats.empty()) j["perm_stats"] = report.perm_stats;
    j["timings"] = timings_to_json(report.timings);
    return j;
}

json inequality_to_json(const InequalityReport& report) {
    json j;
    j["check"] = report.check;
    j["method"] = report.method;
    if (!report.psi_family.empty()) j["psi_family"] = report.psi_family;
    j["n"] = report.n;
    j["m"] = report.m;
    j["weights"] = report.weights;

    json rows = json::array();
    for (const InequalityRow& r : report.rows) {
        json jr;
        jr["param"] = r.param;
        jr["lhs"] = r.lhs;
        jr["rhs"] = r.rhs;
        if (std::isfinite(r.rhs2)) jr["rhs2"] = r.rhs2;
        jr["margin"] = r.margin;
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    j["min_margin"] = report.min_margin;
    j["ok"] = report.ok;
    return j;
}

json power_to_json(const Scenario& scenario, const PermutationConfig& config,
                   const PowerSummary& summary) {
    json j;
    j["schema_version"] = 1;
    j["command"] = "simulate";

    json sc;
    sc["d"] = scenario.d;
    sc["n"] = scenario.n;
    sc["m"] = scenario.m;
    sc["replications"] = scenario.replications;
    sc["seed"] = scenario.seed;
    json phi;
    switch (scenario.phi.type) {
        case PhiType::zero:
            phi["type"] = "zero";
            break;
        case PhiType::plateau:
            phi["type"] = "plateau";
            phi["c"] = scenario.phi.c;
            break;
        case PhiType::holder_bump:
            phi["type"] = "holder";
            phi["beta"] = scenario.phi.beta;
            phi["L"] = scenario.phi.L;
            break;
    }
    if (scenario.phi.type != PhiType::zero) {
        phi["center"] = scenario.phi.center;
        phi["delta"] = scenario.phi.delta;
        phi["kappa"] = scenario.phi.kappa;
        phi["amp_pos"] = scenario.amp_pos;
        phi["amp_neg"] = scenario.amp_neg;
    }
    sc["phi"] = std::move(phi);
    j["scenario"] = std::move(sc);

    // Per-replication test seeds derive from the scenario seed, so the
    // config echo carries no seed of its own.
    j["config"] = config_to_json(config, std::numeric_limits<double>::quiet_NaN(),
                                 false);

    json sm;
    sm["replications"] = summary.reps;
    sm["rejections"] = summary.rejections;
    sm["rate"] = summary.rate;
    sm["ci_low"] = summary.ci_low;
    sm["ci_high"] = summary.ci_high;
    sm["mean_jaccard"] = summary.mean_jaccard;
    sm["covered"] = summary.covered;
    j["summary"] = std::move(sm);
    return j;
}

}  // namespace nnmt
