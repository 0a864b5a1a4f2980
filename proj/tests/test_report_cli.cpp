#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "nnmt/cli.hpp"
#include "nnmt/report.hpp"
#include "nnmt/rng.hpp"

#include "helpers.hpp"

using namespace nnmt;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("nnmt_cli_test_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"nnmt"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string group_csv(std::size_t rows, std::uint64_t seed, std::size_t d,
                      bool header) {
    RngStream stream(seed, 0);
    std::string text;
    if (header) text = d == 1 ? "x\n" : "x,y\n";
    char buf[80];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", stream.next_unit());
            if (c) text += ',';
            text += buf;
        }
        text += '\n';
    }
    return text;
}

std::vector<std::string> object_keys(const json& j) {
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    return keys;
}

}  // namespace

TEST_CASE("dump_json renders deterministically") {
    json j;
    j["b"] = 0.1;
    j["a"] = 1;
    j["arr"] = json::array();
    j["obj"] = json::object();
    j["nan"] = std::numeric_limits<double>::quiet_NaN();
    j["inf"] = std::numeric_limits<double>::infinity();
    j["s"] = "a\"b";
    json nested;
    nested["x"] = json::array({1, 2});
    j["nested"] = nested;

    const std::string expected =
        "{\n"
        "  \"b\": 0.10000000000000001,\n"
        "  \"a\": 1,\n"
        "  \"arr\": [],\n"
        "  \"obj\": {},\n"
        "  \"nan\": null,\n"
        "  \"inf\": null,\n"
        "  \"s\": \"a\\\"b\",\n"
        "  \"nested\": {\n"
        "    \"x\": [\n"
        "      1,\n"
        "      2\n"
        "    ]\n"
        "  }\n"
        "}\n";
    CHECK(dump_json(j) == expected);
    CHECK(dump_json(j) == dump_json(j));
}

TEST_CASE("report_to_json key order, fields, and config round trip") {
    const PooledSample s = testutil::random_sample(16, 7, 2, 5);
    PermutationConfig cfg;
    cfg.B = 37;
    cfg.alpha = 0.2;
    cfg.seed = 3;
    cfg.kernel = KernelSpec::recovery(0.5);
    cfg.keep_perm_stats = true;
    cfg.one_sided = true;

    const TestReport rep = run_test(s, cfg);
    json j = report_to_json(rep);

    CHECK(object_keys(j) ==
          std::vector<std::string>{"schema_version", "command", "config",
                                   "sample", "t_n", "kappa_alpha", "p_value",
                                   "reject", "regions", "perm_stats",
                                   "timings"});
    CHECK(j["schema_version"] == 1);
    CHECK(j["command"] == "test");
    CHECK(object_keys(j["config"]) ==
          std::vector<std::string>{"kernel", "k_max", "perms", "alpha", "seed",
                                   "one_sided"});
    CHECK(j["config"]["kernel"]["family"] == "recovery");
    CHECK(j["config"]["kernel"]["beta"] == 0.5);
    CHECK(j["config"]["k_max"] == default_k_max(16));
    CHECK(j["config"]["perms"] == 37);
    CHECK(j["config"]["seed"] == 3);
    CHECK(j["config"]["one_sided"] == true);
    CHECK(j["sample"]["n"] == 16);
    CHECK(j["sample"]["m"] == 7);
    CHECK(j["sample"]["d"] == 2);
    CHECK(j["perm_stats"].size() == 37);
    for (const json& region : j["regions"])
        CHECK(object_keys(region) ==
              std::vector<std::string>{"center", "radius", "j", "k", "t_stat",
                                       "correction", "sign"});

    // replay the echoed config: identical bytes apart from timings
    json echoed = json::parse(dump_json(j));
    PermutationConfig replay;
    replay.B = echoed["config"]["perms"].get<std::size_t>();
    replay.alpha = echoed["config"]["alpha"].get<double>();
    replay.seed = echoed["config"]["seed"].get<std::uint64_t>();
    replay.k_max = echoed["config"]["k_max"].get<std::size_t>();
    replay.one_sided = echoed["config"]["one_sided"].get<bool>();
    replay.kernel = KernelSpec::recovery(
        echoed["config"]["kernel"]["beta"].get<double>());
    replay.keep_perm_stats = echoed.contains("perm_stats");

    json j2 = report_to_json(run_test(s, replay));
    j.erase("timings");
    j2.erase("timings");
    CHECK(dump_json(j) == dump_json(j2));
}

TEST_CASE("classify reports echo lambda; two-sample reports do not") {
    const PooledSample s = testutil::random_sample(12, 5, 2, 6);
    PermutationConfig cfg;
    cfg.B = 19;
    cfg.seed = 1;
    const json two = report_to_json(run_test(s, cfg));
    CHECK_FALSE(two["config"].contains("lambda"));

    std::vector<std::vector<double>> pts;
    std::vector<int> y;
    RngStream stream(3, 0);
    for (int i = 0; i < 12; ++i) {
        pts.push_back({stream.next_unit(), stream.next_unit()});
        y.push_back(i % 2);
    }
    const LabeledPoints data = validate_labeled(pts, y, 0.4);
    const json cls = report_to_json(classify_test(data, cfg));
    CHECK(cls["command"] == "classify");
    CHECK(cls["config"]["lambda"] == 0.4);
    CHECK(cls["sample"]["m"] == 6);  // observed outcome count
}

TEST_CASE("inequality reports serialize per suite") {
    const json cj =
        inequality_to_json(check_coupling_bound({1.0, 1.0, 0.0, 0.0}, 2,
                                                {1.0, 2.0}));
    CHECK(object_keys(cj) ==
          std::vector<std::string>{"check", "method", "n", "m", "weights",
                                   "rows", "min_margin", "ok"});
    CHECK(cj["check"] == "coupling");
    CHECK(object_keys(cj["rows"][0]) ==
          std::vector<std::string>{"param", "lhs", "rhs", "rhs2", "margin"});

    const json dj = inequality_to_json(
        check_decoupling({1.0, -1.0}, 1, PsiFamily::exp_t, {1.0}));
    CHECK(dj["psi_family"] == "exp");
    CHECK(object_keys(dj["rows"][0]) ==
          std::vector<std::string>{"param", "lhs", "rhs", "margin"});
}

TEST_CASE("power reports carry the scenario but no config seed") {
    const Scenario sc = scenario_from_json_text(
        R"({"d": 1, "n": 30, "m": 15, "replications": 6, "seed": 4,
            "h": {"type": "uniform"},
            "phi": {"type": "plateau", "c": 2.0, "center": [0.5],
                    "delta": 0.15, "kappa": 1.8}})");
    PermutationConfig cfg;
    cfg.B = 19;
    const PowerSummary sum = power_study(sc, cfg);
    const json j = power_to_json(sc, cfg, sum);
    CHECK(object_keys(j) ==
          std::vector<std::string>{"schema_version", "command", "scenario",
                                   "config", "summary"});
    CHECK(j["command"] == "simulate");
    CHECK(j["scenario"]["seed"] == 4);
    CHECK(j["scenario"]["phi"]["type"] == "plateau");
    CHECK(j["scenario"]["phi"].contains("amp_pos"));
    CHECK_FALSE(j["config"].contains("seed"));
    CHECK(j["summary"]["replications"] == 6);
    CHECK(j["summary"]["rejections"] == sum.rejections);
}

TEST_CASE("two-file ingestion with header autodetection") {
    TempDir dir;
    const std::string a = dir.file("a.csv");
    const std::string b = dir.file("b.csv");
    write_file(a, "x,y\n0,0\n0.5 , 0.25\n");
    write_file(b, "1,1\n\n0.75,0.5\n0.9,0.9\n");
    const PooledSample s = ingest_two_files(a, b);
    CHECK(s.n == 5);
    CHECK(s.m == 2);
    CHECK(s.d == 2);
    CHECK(s.coords == std::vector<double>{0.0, 0.0, 0.5, 0.25, 1.0, 1.0, 0.75,
                                          0.5, 0.9, 0.9});
    CHECK(s.group == std::vector<std::uint8_t>{1, 1, 2, 2, 2});

    const std::string c = dir.file("c.csv");
    write_file(c, "0.1\n0.2\n");
    CHECK_THROWS_WITH_AS(
        ingest_two_files(a, c),
        ("ingest: " + a + " has 2 columns but " + c + " has 1").c_str(),
        data_error);
}

TEST_CASE("CSV parse failures carry row and column positions") {
    TempDir dir;
    const std::string bad = dir.file("bad.csv");
    write_file(bad, "x,y\n1,foo\n");
    CHECK_THROWS_WITH_AS(
        ingest_two_files(bad, bad),
        (bad + ": row 2, column 2: cannot parse 'foo' as a number").c_str(),
        data_error);

    const std::string ragged = dir.file("ragged.csv");
    write_file(ragged, "1,2\n3\n");
    CHECK_THROWS_WITH_AS(ingest_two_files(ragged, ragged),
                         (ragged + ": row 2 has 1 cells, expected 2").c_str(),
                         data_error);

    const std::string header_only = dir.file("header.csv");
    write_file(header_only, "x,y\n");
    CHECK_THROWS_WITH_AS(ingest_two_files(header_only, header_only),
                         (header_only + ": no data rows").c_str(), data_error);

    const std::string missing = dir.file("missing.csv");
    CHECK_THROWS_WITH_AS(ingest_two_files(missing, missing),
                         (missing + ": cannot open file").c_str(), data_error);
}

TEST_CASE("grouped and labeled ingestion") {
    TempDir dir;
    const std::string g = dir.file("g.csv");
    write_file(g, "x,y,g\n0.1,0.2,1\n0.3,0.4,2\n0.5,0.6,1\n");
    const PooledSample s = ingest_grouped(g, "g");
    CHECK(s.n == 3);
    CHECK(s.m == 2);
    CHECK(s.d == 2);
    CHECK(s.coords == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    CHECK(s.group == std::vector<std::uint8_t>{1, 2, 1});

    const std::string lead = dir.file("lead.csv");
    write_file(lead, "g,x\n1,0.5\n2,0.7\n");
    const PooledSample s2 = ingest_grouped(lead, "g");
    CHECK(s2.d == 1);
    CHECK(s2.coords == std::vector<double>{0.5, 0.7});

    const std::string badg = dir.file("badg.csv");
    write_file(badg, "x,g\n1,1.5\n");
    CHECK_THROWS_WITH_AS(ingest_grouped(badg, "g"),
                         (badg + ": row 2: group value must be 1 or 2").c_str(),
                         data_error);

    const std::string nohdr = dir.file("nohdr.csv");
    write_file(nohdr, "1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(
        ingest_grouped(nohdr, "g"),
        (nohdr + ": selecting column 'g' needs a header row").c_str(),
        data_error);
    CHECK_THROWS_WITH_AS(ingest_grouped(g, "zzz"),
                         (g + ": no column named 'zzz'").c_str(), data_error);

    const std::string lab = dir.file("lab.csv");
    write_file(lab, "x,y,label\n0.1,0.2,1\n0.3,0.4,0\n");
    const LabeledPoints lp = ingest_labeled(lab, "label", 0.3);
    CHECK(lp.n == 2);
    CHECK(lp.d == 2);
    CHECK(lp.lambda == 0.3);
    CHECK(lp.y == std::vector<std::uint8_t>{1, 0});

    const std::string bady = dir.file("bady.csv");
    write_file(bady, "x,label\n0.1,2\n");
    CHECK_THROWS_WITH_AS(ingest_labeled(bady, "label", 0.3),
                         (bady + ": row 2: outcome must be 0 or 1").c_str(),
                         data_error);
}

TEST_CASE("CLI: test subcommand, exit codes, report files") {
    TempDir dir;
    const std::string a = dir.file("a.csv");
    const std::string b = dir.file("b.csv");
    write_file(a, group_csv(12, 1, 2, true));
    write_file(b, group_csv(14, 2, 2, false));
    const std::string out = dir.file("out.json");

    CHECK(run({"test", "--first", a, "--second", b, "--perms", "40", "--seed",
               "3", "--out", out}) == 0);
    const json j = json::parse(slurp(out));
    CHECK(j["schema_version"] == 1);
    CHECK(j["command"] == "test");
    CHECK(j["config"]["seed"] == 3);
    CHECK(j["config"]["perms"] == 40);
    CHECK(j["sample"]["n"] == 26);
    CHECK(j["sample"]["m"] == 12);
    CHECK_FALSE(j.contains("perm_stats"));

    // usage errors exit 2
    CHECK(run({"test", "--first", a, "--second", b, "--perms", "40"}) == 2);
    CHECK(run({"test", "--first", a, "--seed", "1"}) == 2);
    CHECK(run({"test", "--first", a, "--second", b, "--seed", "1",
               "--kernel", "triangular"}) == 2);
    CHECK(run({"test", "--no-such-flag"}) == 2);
    CHECK(run({}) == 2);
    {
        std::ostringstream help;
        std::streambuf* old = std::cout.rdbuf(help.rdbuf());
        const int rc = run({"--help"});
        std::cout.rdbuf(old);
        CHECK(rc == 0);
        CHECK(help.str().find("test1d") != std::string::npos);
    }

    // data errors exit 3
    CHECK(run({"test", "--first", dir.file("nope.csv"), "--second", b,
               "--seed", "1"}) == 3);

    // perm stats on demand
    CHECK(run({"test", "--first", a, "--second", b, "--perms", "25", "--seed",
               "3", "--emit-perm-stats", "--out", out}) == 0);
    CHECK(json::parse(slurp(out))["perm_stats"].size() == 25);
}

TEST_CASE("CLI: grouped input, one-dimensional routing, stdout") {
    TempDir dir;
    const std::string g = dir.file("g.csv");
    std::string text = "x,g\n";
    RngStream stream(9, 0);
    for (int i = 0; i < 24; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g,%d\n", stream.next_unit(),
                      1 + (i % 2));
        text += buf;
    }
    write_file(g, text);
    const std::string out = dir.file("out.json");

    CHECK(run({"test1d", "--data", g, "--group-col", "g", "--perms", "30",
               "--seed", "5", "--out", out}) == 0);
    const json j = json::parse(slurp(out));
    CHECK(j["command"] == "test1d");
    CHECK(j["sample"]["d"] == 1);
    CHECK(j["sample"]["n"] == 24);

    // test1d insists on one-dimensional input
    const std::string a2 = dir.file("a2.csv");
    const std::string b2 = dir.file("b2.csv");
    write_file(a2, group_csv(8, 3, 2, false));
    write_file(b2, group_csv(8, 4, 2, false));
    CHECK(run({"test1d", "--first", a2, "--second", b2, "--seed", "5"}) == 2);

    // stdout when --out is omitted
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    const int rc = run({"test", "--first", a2, "--second", b2, "--perms", "15",
                        "--seed", "2"});
    std::cout.rdbuf(old);
    CHECK(rc == 0);
    const json piped = json::parse(captured.str());
    CHECK(piped["schema_version"] == 1);
    CHECK(piped["sample"]["n"] == 16);
}

TEST_CASE("CLI: classify, verify and simulate subcommands") {
    TempDir dir;
    std::string text = "x0,x1,y\n";
    RngStream stream(12, 0);
    for (int i = 0; i < 30; ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", stream.next_unit(),
                      stream.next_unit(), i % 2);
        text += buf;
    }
    const std::string c = dir.file("c.csv");
    write_file(c, text);
    const std::string out = dir.file("out.json");

    CHECK(run({"classify", "--data", c, "--y-col", "y", "--lambda", "0.5",
               "--perms", "30", "--seed", "2", "--out", out}) == 0);
    json j = json::parse(slurp(out));
    CHECK(j["command"] == "classify");
    CHECK(j["config"]["lambda"] == 0.5);
    CHECK(j["sample"]["m"] == 15);
    // --lambda is mandatory
    CHECK(run({"classify", "--data", c, "--y-col", "y", "--seed", "2"}) == 2);

    CHECK(run({"verify", "--suite", "both", "--nmax", "6", "--sweeps", "2",
               "--seed", "1", "--out", out}) == 0);
    j = json::parse(slurp(out));
    CHECK(j["command"] == "verify");
    CHECK(j["suite"] == "both");
    CHECK(j["violations"] == 0);
    CHECK(j["all_ok"] == true);
    CHECK(j["reports"].size() > 0);
    CHECK(run({"verify", "--suite", "bogus"}) == 2);

    const std::string scen = dir.file("scen.json");
    write_file(scen,
               R"({"d": 1, "n": 30, "m": 15, "replications": 6, "seed": 7,
                   "h": {"type": "uniform"},
                   "phi": {"type": "plateau", "c": 2.5, "center": [0.5],
                           "delta": 0.15, "kappa": 1.8}})");
    CHECK(run({"simulate", "--scenario", scen, "--reps", "4", "--perms", "19",
               "--out", out}) == 0);
    j = json::parse(slurp(out));
    CHECK(j["command"] == "simulate");
    CHECK(j["summary"]["replications"] == 4);  // CLI overrides the file
    CHECK(j["scenario"]["seed"] == 7);
    CHECK(run({"simulate", "--scenario", dir.file("missing.json")}) == 3);
}
