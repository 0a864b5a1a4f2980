#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nnmt/recovery.hpp"
#include "nnmt/simgen.hpp"

using namespace nnmt;

namespace {

const char* kPlateau1d = R"({
  "d": 1, "n": 4000, "m": 2000, "replications": 3, "seed": 42,
  "h": {"type": "uniform"},
  "phi": {"type": "plateau", "c": 8.0, "center": [0.5], "delta": 0.2,
          "kappa": 1.5}
})";

const char* kHolder2d = R"({
  "d": 2, "n": 500, "m": 200,
  "h": {"type": "uniform"},
  "phi": {"type": "holder", "beta": 0.7, "L": 1.2, "center": [0.5, 0.5],
          "delta": 0.15}
})";

std::string plateau_text(std::size_t n, double c, double center, double delta,
                         double kappa, const char* h_part = nullptr) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"d\": 1, \"n\": %zu, \"m\": %zu, "
                  "\"h\": %s, "
                  "\"phi\": {\"type\": \"plateau\", \"c\": %.17g, "
                  "\"center\": [%.17g], \"delta\": %.17g, \"kappa\": %.17g}}",
                  n, n / 2, h_part ? h_part : "{\"type\": \"uniform\"}", c,
                  center, delta, kappa);
    return buf;
}

// d V_d int phi(r) r^{d-1} dr over [0, kappa delta], split at the sign change
double radial_integral(const Scenario& s) {
    std::vector<double> x(s.d);
    const auto f = [&](double r) {
        for (std::size_t a = 0; a < s.d; ++a) x[a] = s.phi.center[a];
        x[0] += r;
        return phi_value(s, x.data()) *
               std::pow(r, static_cast<double>(s.d) - 1.0);
    };
    // the holder profile has an r^beta endpoint singularity (beta < 1), so
    // Simpson converges at reduced order there; compensate with a fine mesh
    const auto simpson = [&](double lo, double hi) {
        const std::size_t steps = 100000;
        const double h = (hi - lo) / static_cast<double>(steps);
        double acc = f(lo) + f(hi);
        for (std::size_t i = 1; i < steps; ++i)
            acc += (i % 2 ? 4.0 : 2.0) * f(lo + h * static_cast<double>(i));
        return acc * h / 3.0;
    };
    const double delta = s.phi.delta;
    const double inner = simpson(0.0, delta);
    const double outer = simpson(
        std::nextafter(delta, 2.0 * delta), s.phi.kappa * delta);
    return static_cast<double>(s.d) * unit_ball_volume(s.d) * (inner + outer);
}

}  // namespace

TEST_CASE("scenario parsing and derived amplitudes (plateau)") {
    const Scenario s = scenario_from_json_text(kPlateau1d);
    CHECK(s.d == 1);
    CHECK(s.n == 4000);
    CHECK(s.m == 2000);
    CHECK(s.replications == 3);
    CHECK(s.seed == 42);
    CHECK(s.phi.type == PhiType::plateau);
    CHECK(s.phi.kappa == 1.5);
    CHECK(s.h_focal == 1.0);
    const double amp = 8.0 / std::sqrt(4000.0 * 0.2);
    CHECK(s.amp_pos == doctest::Approx(amp).epsilon(1e-15));
    CHECK(s.amp_neg == doctest::Approx(amp / 0.5).epsilon(1e-15));

    // phi by region
    const double at_center = 0.5;
    CHECK(phi_value(s, &at_center) == s.amp_pos);
    const double in_annulus = 0.5 + 0.25;  // radius 0.25 in (delta, kappa delta]
    CHECK(phi_value(s, &in_annulus) == -s.amp_neg);
    const double outside = 0.9;
    CHECK(phi_value(s, &outside) == 0.0);
}

TEST_CASE("scenario parsing and derived amplitudes (holder bump)") {
    const Scenario s = scenario_from_json_text(kHolder2d);
    CHECK(s.phi.type == PhiType::holder_bump);
    // kappa defaults to 2^(1/d): the annulus and ball have equal volume
    CHECK(s.phi.kappa == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    const double amp = 1.2 * std::pow(0.15, 0.7);
    CHECK(s.amp_pos == doctest::Approx(amp).epsilon(1e-15));
    CHECK(s.amp_neg ==
          doctest::Approx(amp * 0.7 / ((2.0 + 0.7) *
                                       (std::pow(s.phi.kappa, 2.0) - 1.0)))
              .epsilon(1e-12));

    // profile: psi_beta shape on the ball
    std::vector<double> x{0.5 + 0.075, 0.5};
    CHECK(phi_value(s, x.data()) ==
          doctest::Approx(amp * (1.0 - std::pow(0.5, 0.7))).epsilon(1e-12));
}

TEST_CASE("phi integrates to zero and the mixture identity holds") {
    for (const char* text : {kPlateau1d, kHolder2d}) {
        const Scenario s = scenario_from_json_text(text);
        const double scale =
            s.amp_pos * unit_ball_volume(s.d) * std::pow(s.phi.delta, s.d);
        CHECK(std::fabs(radial_integral(s)) <= 2e-6 * scale);

        const double lambda =
            static_cast<double>(s.m) / static_cast<double>(s.n);
        std::vector<double> x(s.d);
        for (int t = 0; t < 200; ++t) {
            for (std::size_t a = 0; a < s.d; ++a)
                x[a] = (0.37 * t + 0.11 * a) - std::floor(0.37 * t + 0.11 * a);
            const double p = density_p(s, x.data());
            const double q = density_q(s, x.data());
            const double h = density_h(s, x.data());
            CHECK(p >= 0.0);
            CHECK(q >= 0.0);
            CHECK(lambda * p + (1.0 - lambda) * q ==
                  doctest::Approx(h).epsilon(1e-12));
            CHECK(p <= sup_density_p(s) + 1e-12);
            CHECK(q <= sup_density_q(s) + 1e-12);
        }
    }
}

TEST_CASE("grid densities normalize masses to levels") {
    const Scenario s = scenario_from_json_text(
        R"({"d": 1, "n": 100, "m": 50,
            "h": {"type": "grid", "resolution": [4], "masses": [2, 1, 1, 0]}})");
    const double x0 = 0.1, x1 = 0.3, x3 = 0.9;
    CHECK(density_h(s, &x0) == 2.0);
    CHECK(density_h(s, &x1) == 1.0);
    CHECK(density_h(s, &x3) == 0.0);
    // total integral: mean of levels over equal-volume cells
    double total = 0.0;
    for (double v : s.h.value) total += v;
    CHECK(total / 4.0 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("scenario validation rejects inconsistent specifications") {
    // deviation support leaves the unit cube
    CHECK_THROWS_AS(
        scenario_from_json_text(plateau_text(60, 1.0, 0.05, 0.2, 1.5)),
        data_error);
    // support straddles two h-cells
    CHECK_THROWS_AS(scenario_from_json_text(plateau_text(
                        60, 1.0, 0.5, 0.2, 1.5,
                        "{\"type\": \"grid\", \"resolution\": [2], "
                        "\"masses\": [1, 1]}")),
                    data_error);
    // q < 0 on the ball
    CHECK_THROWS_AS(
        scenario_from_json_text(plateau_text(60, 12.0, 0.5, 0.2, 1.5)),
        data_error);
    // p < 0 on the annulus (thin annulus concentrates the mass)
    CHECK_THROWS_AS(
        scenario_from_json_text(plateau_text(60, 4.0, 0.5, 0.2, 1.1)),
        data_error);
    // deviation on a zero-density cell
    CHECK_THROWS_AS(scenario_from_json_text(plateau_text(
                        60, 1.0, 0.12, 0.02, 1.5,
                        "{\"type\": \"grid\", \"resolution\": [4], "
                        "\"masses\": [0, 1, 1, 2]}")),
                    data_error);
    // kappa must exceed 1
    CHECK_THROWS_AS(
        scenario_from_json_text(plateau_text(60, 1.0, 0.5, 0.2, 0.9)),
        data_error);
    // mass count, negative masses, empty mass
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"d": 1, "n": 10, "m": 5,
                            "h": {"type": "grid", "resolution": [4],
                                  "masses": [1, 2, 1]}})"),
                    data_error);
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"d": 1, "n": 10, "m": 5,
                            "h": {"type": "grid", "resolution": [2],
                                  "masses": [1, -1]}})"),
                    data_error);
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"d": 1, "n": 10, "m": 5,
                            "h": {"type": "grid", "resolution": [2],
                                  "masses": [0, 0]}})"),
                    data_error);
    // group sizes, replications, malformed JSON, missing field
    CHECK_THROWS_AS(scenario_from_json_text(R"({"d": 1, "n": 10, "m": 10})"),
                    data_error);
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"d": 1, "n": 10, "m": 5, "replications": 0})"),
                    data_error);
    CHECK_THROWS_AS(scenario_from_json_text("{nope"), data_error);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"d": 1, "n": 10})"),
                    data_error);
    // holder smoothness outside (0,1]
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"d": 1, "n": 40, "m": 20,
                            "h": {"type": "uniform"},
                            "phi": {"type": "holder", "beta": 1.5, "L": 1.0,
                                    "center": [0.5], "delta": 0.1}})"),
                    data_error);
}

TEST_CASE("load_scenario reads a file and fails cleanly otherwise") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "nnmt_scenario_test.json";
    {
        std::ofstream out(path);
        out << kPlateau1d;
    }
    const Scenario s = load_scenario(path.string());
    CHECK(s.n == 4000);
    fs::remove(path);
    CHECK_THROWS_AS(load_scenario(path.string()), data_error);
}

TEST_CASE("rejection sampler: reproducibility, composition, acceptance") {
    const Scenario s = scenario_from_json_text(kPlateau1d);

    RngStream a(7, 3), b(7, 3), c(7, 4);
    const PooledSample sa = sample_scenario(s, a);
    const PooledSample sb = sample_scenario(s, b);
    const PooledSample sc = sample_scenario(s, c);
    CHECK(sa.coords == sb.coords);
    CHECK(sa.group == sb.group);
    CHECK(sa.coords != sc.coords);
    CHECK(sa.n == 4000);
    CHECK(sa.m == 2000);
    for (std::size_t i = 0; i < sa.n; ++i) {
        CHECK(sa.group[i] == (i < sa.m ? 1 : 2));
        CHECK(sa.coords[i] >= 0.0);
        CHECK(sa.coords[i] < 1.0);
    }

    // null scenario accepts every proposal
    const Scenario null_s = scenario_from_json_text(
        R"({"d": 2, "n": 50, "m": 20, "h": {"type": "uniform"},
            "phi": {"type": "zero"}})");
    SampleStats st{};
    RngStream nstream(1, 0);
    sample_scenario(null_s, nstream, &st);
    CHECK(st.proposals_p == 20);
    CHECK(st.proposals_q == 30);
}

TEST_CASE("rejection sampler reproduces the ball probabilities") {
    const Scenario s = scenario_from_json_text(kPlateau1d);
    const double amp = s.amp_pos;
    const double p_ball = (1.0 + 0.5 * amp) * 0.4;   // level * ball length
    const double q_ball = (1.0 - 0.5 * amp) * 0.4;

    std::size_t in_p = 0, in_q = 0, tot_p = 0, tot_q = 0;
    SampleStats st{};
    for (std::uint64_t r = 0; r < 3; ++r) {
        RngStream stream(99, r);
        const PooledSample sample = sample_scenario(s, stream, &st);
        for (std::size_t i = 0; i < sample.n; ++i) {
            const bool inside = std::fabs(sample.coords[i] - 0.5) <= 0.2;
            if (sample.group[i] == 1) {
                ++tot_p;
                in_p += inside;
            } else {
                ++tot_q;
                in_q += inside;
            }
        }
    }
    const double emp_p = static_cast<double>(in_p) / static_cast<double>(tot_p);
    const double emp_q = static_cast<double>(in_q) / static_cast<double>(tot_q);
    CHECK(std::fabs(emp_p - p_ball) <= 0.033);  // 5 sigma at 6000 draws
    CHECK(std::fabs(emp_q - q_ball) <= 0.031);

    // acceptance rate tracks 1 / sup(density)
    const double rate_p = static_cast<double>(tot_p) /
                          static_cast<double>(st.proposals_p);
    CHECK(std::fabs(rate_p - 1.0 / sup_density_p(s)) <= 0.02);
}

TEST_CASE("clopper_pearson frozen values") {
    const auto [lo1, hi1] = clopper_pearson(1, 10, 0.95);
    CHECK(lo1 == doctest::Approx(0.00252857854446).epsilon(1e-8));
    CHECK(hi1 == doctest::Approx(0.445016117028).epsilon(1e-8));
    const auto [lo0, hi0] = clopper_pearson(0, 10, 0.95);
    CHECK(lo0 == 0.0);
    CHECK(hi0 == doctest::Approx(0.308497107819).epsilon(1e-8));
    const auto [lo10, hi10] = clopper_pearson(10, 10, 0.95);
    CHECK(lo10 == doctest::Approx(0.691502892181).epsilon(1e-8));
    CHECK(hi10 == 1.0);
    CHECK_THROWS_AS(clopper_pearson(11, 10, 0.95), domain_error);
}

TEST_CASE("ball_jaccard geometry") {
    CHECK(ball_jaccard({0.0}, 1.0, {1.0}, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(ball_jaccard({0.0, 0.0}, 1.0, {1.0, 0.0}, 1.0) ==
          doctest::Approx(0.24300979377486318).epsilon(1e-4));
    CHECK(ball_jaccard({0.0, 0.0, 0.0}, 1.0, {1.0, 0.0, 0.0}, 1.0) ==
          doctest::Approx(0.18518518518518519).epsilon(1e-9));  // 5/27
    // containment shortcut: volume ratio
    CHECK(ball_jaccard({0.0, 0.0}, 2.0, {0.5, 0.0}, 0.5) ==
          doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(ball_jaccard({0.0}, 1.0, {5.0}, 1.0) == 0.0);
    CHECK(ball_jaccard({0.25, 0.25}, 0.1, {0.25, 0.25}, 0.1) == 1.0);
    CHECK_THROWS_AS(ball_jaccard({0.0}, 1.0, {0.0, 0.0}, 1.0), domain_error);
}

TEST_CASE("power_study is deterministic and internally consistent") {
    Scenario s = scenario_from_json_text(
        R"({"d": 1, "n": 30, "m": 15, "replications": 40, "seed": 11,
            "h": {"type": "uniform"},
            "phi": {"type": "plateau", "c": 3.0, "center": [0.5],
                    "delta": 0.15, "kappa": 1.8}})");
    PermutationConfig cfg;
    cfg.B = 29;
    cfg.alpha = 0.2;
    cfg.seed = s.seed;

    const PowerSummary one = power_study(s, cfg);
    PermutationConfig par = cfg;
    par.threads = 4;
    const PowerSummary four = power_study(s, par);

    CHECK(one.reps == 40);
    CHECK(one.rejections == four.rejections);
    CHECK(one.rate == four.rate);
    CHECK(one.mean_jaccard == four.mean_jaccard);
    CHECK(one.covered == four.covered);

    CHECK(one.rate ==
          doctest::Approx(static_cast<double>(one.rejections) / 40.0)
              .epsilon(1e-15));
    const auto [lo, hi] = clopper_pearson(one.rejections, one.reps, 0.95);
    CHECK(one.ci_low == lo);
    CHECK(one.ci_high == hi);
    CHECK(one.covered <= one.rejections);
    CHECK(one.mean_jaccard >= 0.0);
    CHECK(one.mean_jaccard <= 1.0);
    CHECK(one.rejections > 0);  // strong localized signal at alpha = 0.2
}
