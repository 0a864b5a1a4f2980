#include "nnmt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nnmt/report.hpp"
#include "nnmt/rng.hpp"
#include "nnmt/simgen.hpp"
#include "nnmt/univariate.hpp"
#include "nnmt/verify.hpp"

namespace nnmt {

namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- CSV input

struct Csv {
    std::vector<std::string> header;        ///< empty when the file has none
    std::vector<std::vector<double>> rows;  ///< numeric cells, row-major
    std::vector<std::size_t> lines;         ///< 1-based file line of each row
};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(cur);
    for (std::string& c : cells) {
        while (!c.empty() &&
               (c.back() == ' ' || c.back() == '\t' || c.back() == '\r'))
            c.pop_back();
        std::size_t b = 0;
        while (b < c.size() && (c[b] == ' ' || c[b] == '\t')) ++b;
        c.erase(0, b);
    }
    return cells;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size() && std::isfinite(out);
}

bool blank_line(const std::string& line) {
    for (char ch : line)
        if (ch != ' ' && ch != '\t' && ch != '\r') return false;
    return true;
}

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error(path + ": cannot open file");
    Csv csv;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool saw_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank_line(line)) continue;
        std::vector<std::string> cells = split_line(line);
        if (!saw_content) {
            saw_content = true;
            width = cells.size();
            bool numeric = true;
            double tmp;
            for (const std::string& c : cells)
                if (!parse_number(c, tmp)) {
                    numeric = false;
                    break;
                }
            if (!numeric) {
                csv.header = std::move(cells);
                continue;
            }
        }
        if (cells.size() != width)
            throw data_error(path + ": row " + std::to_string(line_no) +
                             " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(width));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_number(cells[c], row[c]))
                throw data_error(path + ": row " + std::to_string(line_no) +
                                 ", column " + std::to_string(c + 1) +
                                 ": cannot parse '" + cells[c] +
                                 "' as a number");
        }
        csv.rows.push_back(std::move(row));
        csv.lines.push_back(line_no);
    }
    if (csv.rows.empty()) throw data_error(path + ": no data rows");
    return csv;
}

std::size_t column_index(const Csv& csv, const std::string& path,
                         const std::string& name) {
    if (csv.header.empty())
        throw data_error(path + ": selecting column '" + name +
                         "' needs a header row");
    const auto it = std::find(csv.header.begin(), csv.header.end(), name);
    if (it == csv.header.end())
        throw data_error(path + ": no column named '" + name + "'");
    if (csv.header.size() < 2)
        throw data_error(path + ": need at least one coordinate column");
    return static_cast<std::size_t>(it - csv.header.begin());
}

}  // namespace

PooledSample ingest_two_files(const std::string& first_path,
                              const std::string& second_path) {
    const Csv a = read_csv(first_path);
    const Csv b = read_csv(second_path);
    const std::size_t d = a.rows.front().size();
    if (b.rows.front().size() != d)
        throw data_error("ingest: " + first_path + " has " +
                         std::to_string(d) + " columns but " + second_path +
                         " has " + std::to_string(b.rows.front().size()));
    std::vector<double> coords;
    coords.reserve((a.rows.size() + b.rows.size()) * d);
    std::vector<std::uint8_t> flags;
    flags.reserve(a.rows.size() + b.rows.size());
    for (const auto& row : a.rows) {
        coords.insert(coords.end(), row.begin(), row.end());
        flags.push_back(1);
    }
    for (const auto& row : b.rows) {
        coords.insert(coords.end(), row.begin(), row.end());
        flags.push_back(2);
    }
    return validate_sample(std::move(coords), d, std::move(flags));
}

PooledSample ingest_grouped(const std::string& data_path,
                            const std::string& group_col) {
    const Csv csv = read_csv(data_path);
    const std::size_t gcol = column_index(csv, data_path, group_col);
    const std::size_t width = csv.header.size();
    const std::size_t d = width - 1;
    std::vector<double> coords;
    coords.reserve(csv.rows.size() * d);
    std::vector<std::uint8_t> flags;
    flags.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::vector<double>& row = csv.rows[r];
        const double g = row[gcol];
        if (g != 1.0 && g != 2.0)
            throw data_error(data_path + ": row " +
                             std::to_string(csv.lines[r]) + ": group value " +
                             "must be 1 or 2");
        flags.push_back(g == 1.0 ? std::uint8_t{1} : std::uint8_t{2});
        for (std::size_t c = 0; c < width; ++c)
            if (c != gcol) coords.push_back(row[c]);
    }
    return validate_sample(std::move(coords), d, std::move(flags));
}

LabeledPoints ingest_labeled(const std::string& data_path,
                             const std::string& y_col, double lambda) {
    const Csv csv = read_csv(data_path);
    const std::size_t ycol = column_index(csv, data_path, y_col);
    const std::size_t width = csv.header.size();
    std::vector<std::vector<double>> points;
    points.reserve(csv.rows.size());
    std::vector<int> outcomes;
    outcomes.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::vector<double>& row = csv.rows[r];
        const double y = row[ycol];
        if (y != 0.0 && y != 1.0)
            throw data_error(data_path + ": row " +
                             std::to_string(csv.lines[r]) +
                             ": outcome must be 0 or 1");
        outcomes.push_back(y == 1.0 ? 1 : 0);
        std::vector<double> point;
        point.reserve(width - 1);
        for (std::size_t c = 0; c < width; ++c)
            if (c != ycol) point.push_back(row[c]);
        points.push_back(std::move(point));
    }
    return validate_labeled(points, outcomes, lambda);
}

namespace {

// ------------------------------------------------------------- subcommands

struct CommonOpts {
    double alpha = 0.05;
    std::string kernel = "rect";
    double beta = 1.0;
    std::size_t kmax = 0;
    std::size_t perms = 999;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;
    bool one_sided = false;
    bool emit_perm_stats = false;
};

void add_common(CLI::App* sub, CommonOpts& o, bool seed_required) {
    sub->add_option("--alpha", o.alpha, "significance level in (0,1)")
        ->capture_default_str();
    sub->add_option("--kernel", o.kernel, "kernel family")
        ->check(CLI::IsMember({"rect", "recovery"}))
        ->capture_default_str();
    sub->add_option("--beta", o.beta, "recovery smoothness, in (0,1]")
        ->capture_default_str();
    sub->add_option("--kmax", o.kmax, "largest neighbor scale (0 = default)")
        ->capture_default_str();
    sub->add_option("--perms", o.perms, "Monte Carlo permutations B")
        ->capture_default_str();
    auto* seed = sub->add_option("--seed", o.seed, "master RNG seed");
    if (seed_required) seed->required();
    sub->add_option("--threads", o.threads, "worker threads")
        ->capture_default_str();
    sub->add_option("--out", o.out, "report path (default: stdout)");
    sub->add_flag("--one-sided", o.one_sided,
                  "signed rule T > C + kappa instead of |T|");
    sub->add_flag("--emit-perm-stats", o.emit_perm_stats,
                  "embed the permuted statistics in the report");
}

PermutationConfig config_of(const CommonOpts& o) {
    PermutationConfig cfg;
    cfg.B = o.perms;
    cfg.alpha = o.alpha;
    cfg.seed = o.seed;
    cfg.kernel =
        o.kernel == "rect" ? KernelSpec::rect() : KernelSpec::recovery(o.beta);
    cfg.k_max = o.kmax;
    cfg.one_sided = o.one_sided;
    cfg.threads = o.threads;
    cfg.keep_perm_stats = o.emit_perm_stats;
    return cfg;
}

struct InputOpts {
    std::string first;
    std::string second;
    std::string data;
    std::string group_col = "g";
};

void add_input(CLI::App* sub, InputOpts& in) {
    auto* first =
        sub->add_option("--first", in.first, "CSV with the group-1 sample");
    auto* second =
        sub->add_option("--second", in.second, "CSV with the group-2 sample");
    auto* data = sub->add_option("--data", in.data,
                                 "single CSV with a group column");
    sub->add_option("--group-col", in.group_col, "group column name")
        ->capture_default_str();
    first->needs(second);
    second->needs(first);
    data->excludes(first);
    data->excludes(second);
}

PooledSample load_input(const InputOpts& in) {
    if (!in.data.empty()) return ingest_grouped(in.data, in.group_col);
    if (!in.first.empty()) return ingest_two_files(in.first, in.second);
    throw domain_error("provide either --first/--second or --data");
}

void write_output(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw data_error(out + ": cannot open for writing");
    f << text;
    f.flush();
    if (!f) throw data_error(out + ": write failure");
}

// ------------------------------------------------------------------ verify

struct VerifyOpts {
    std::string suite = "both";
    std::size_t nmax = 10;
    std::size_t sweeps = 100;
    std::uint64_t seed = 0;
    std::string out;
};

json run_verify(const VerifyOpts& v) {
    if (v.nmax < 4) throw domain_error("verify: --nmax must be at least 4");
    const std::size_t ncap = std::min<std::size_t>(v.nmax, 16);
    std::vector<double> eta_grid;
    for (int k = 1; k <= 16; ++k) eta_grid.push_back(0.25 * k);
    const std::vector<double> exp_params = {0.25, 0.5, 1.0, 2.0};
    const std::vector<double> pow_params = {1.0, 1.5, 2.0, 3.0};
    const bool coupling = v.suite == "coupling" || v.suite == "both";
    const bool decoupling = v.suite == "decoupling" || v.suite == "both";

    json reports = json::array();
    std::size_t violations = 0;
    auto push = [&](InequalityReport rep) {
        if (!rep.ok) ++violations;
        reports.push_back(inequality_to_json(rep));
    };

    for (std::size_t s = 0; s < v.sweeps; ++s) {
        RngStream stream(v.seed, s);
        const std::size_t n = 4 + stream.next_below(ncap - 3);
        const std::size_t m = 1 + stream.next_below(n - 1);
        std::vector<double> w(n);
        for (double& x : w) x = 2.0 * stream.next_unit() - 1.0;
        if (coupling) push(check_coupling_bound(w, m, eta_grid));
        if (decoupling) {
            std::vector<double> a = w;
            double mean = 0.0;
            for (double x : a) mean += x;
            mean /= static_cast<double>(n);
            for (double& x : a) x -= mean;
            push(check_decoupling(a, m, PsiFamily::exp_t, exp_params));
            push(check_decoupling(a, m, PsiFamily::abs_pow, pow_params));
        }
    }

    json out;
    out["schema_version"] = 1;
    out["command"] = "verify";
    out["suite"] = v.suite;
    out["nmax"] = v.nmax;
    out["sweeps"] = v.sweeps;
    out["seed"] = v.seed;
    out["violations"] = violations;
    out["all_ok"] = violations == 0;
    out["reports"] = std::move(reports);
    return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Multiscale nearest-neighbor two-sample testing"};
    app.require_subcommand(1);

    CommonOpts test_opts;
    InputOpts test_in;
    CLI::App* test_cmd = app.add_subcommand(
        "test", "multivariate two-sample test with local regions");
    add_common(test_cmd, test_opts, true);
    add_input(test_cmd, test_in);

    CommonOpts t1_opts;
    InputOpts t1_in;
    CLI::App* t1_cmd = app.add_subcommand(
        "test1d", "distribution-free rank variant for univariate data");
    add_common(t1_cmd, t1_opts, true);
    add_input(t1_cmd, t1_in);

    CommonOpts cls_opts;
    std::string cls_data, cls_ycol = "y";
    double cls_lambda = 0.5;
    CLI::App* cls_cmd = app.add_subcommand(
        "classify", "local classification boundary test for labeled points");
    add_common(cls_cmd, cls_opts, true);
    cls_cmd->add_option("--data", cls_data, "CSV with coordinates and outcomes")
        ->required();
    cls_cmd->add_option("--y-col", cls_ycol, "outcome column name")
        ->capture_default_str();
    cls_cmd->add_option("--lambda", cls_lambda,
                        "known positive-class rate in (0,1)")
        ->required();

    VerifyOpts ver;
    CLI::App* ver_cmd = app.add_subcommand(
        "verify", "exhaustively verify the exponential inequalities");
    ver_cmd->add_option("--suite", ver.suite, "coupling, decoupling, or both")
        ->check(CLI::IsMember({"coupling", "decoupling", "both"}))
        ->capture_default_str();
    ver_cmd->add_option("--nmax", ver.nmax, "largest sample size")
        ->capture_default_str();
    ver_cmd->add_option("--sweeps", ver.sweeps, "random weight vectors")
        ->capture_default_str();
    ver_cmd->add_option("--seed", ver.seed, "sweep RNG seed")
        ->capture_default_str();
    ver_cmd->add_option("--out", ver.out, "report path (default: stdout)");

    CommonOpts sim_opts;
    std::string sim_scenario;
    std::size_t sim_reps = 0;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "power study on a synthetic scenario");
    add_common(sim_cmd, sim_opts, false);
    sim_cmd->add_option("--scenario", sim_scenario, "scenario JSON path")
        ->required();
    sim_cmd->add_option("--reps", sim_reps,
                        "replications (0 = scenario default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(test_cmd)) {
            const PooledSample sample = load_input(test_in);
            const TestReport rep = run_test(sample, config_of(test_opts));
            write_output(test_opts.out, dump_json(report_to_json(rep)));
        } else if (app.got_subcommand(t1_cmd)) {
            const PooledSample sample = load_input(t1_in);
            const TestReport rep = univariate_test(sample, config_of(t1_opts));
            write_output(t1_opts.out, dump_json(report_to_json(rep)));
        } else if (app.got_subcommand(cls_cmd)) {
            const LabeledPoints data =
                ingest_labeled(cls_data, cls_ycol, cls_lambda);
            const TestReport rep = classify_test(data, config_of(cls_opts));
            write_output(cls_opts.out, dump_json(report_to_json(rep)));
        } else if (app.got_subcommand(ver_cmd)) {
            write_output(ver.out, dump_json(run_verify(ver)));
        } else if (app.got_subcommand(sim_cmd)) {
            Scenario scenario = load_scenario(sim_scenario);
            if (sim_cmd->count("--seed")) scenario.seed = sim_opts.seed;
            if (sim_reps) scenario.replications = sim_reps;
            const PermutationConfig cfg = config_of(sim_opts);
            const PowerSummary sum = power_study(scenario, cfg);
            write_output(sim_opts.out, dump_json(power_to_json(scenario, cfg, sum)));
        }
        return 0;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace nnmt
