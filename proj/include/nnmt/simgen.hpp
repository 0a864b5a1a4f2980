#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nnmt/core.hpp"
#include "nnmt/permutation.hpp"
#include "nnmt/rng.hpp"

namespace nnmt {

/// Piecewise-constant mixed density h on [0,1]^d over a regular grid
/// (resolution 1 per axis = uniform). value holds normalized density
/// levels per cell, row-major with the last axis fastest.
struct GridDensity {
    std::vector<std::size_t> resolution;
    std::vector<double> value;
};

enum class PhiType { zero, plateau, holder_bump };

/// Deviation phi = (p - q) sqrt(h)^{-1}. Plateau: amplitude c/sqrt(n delta^d)
/// on the ball B(center, delta) with an equal-integral negative annulus of
/// outer radius kappa*delta. Holder bump: L delta^beta psi_beta(r/delta) on
/// the ball, compensated the same way.
struct PhiSpec {
    PhiType type = PhiType::zero;
    double c = 0.0;                 ///< plateau signal strength
    double beta = 1.0, L = 1.0;     ///< holder bump
    std::vector<double> center;
    double delta = 0.0;             ///< positive-ball radius
    double kappa = 0.0;             ///< annulus ratio; 0 selects 2^(1/d)
};

struct Scenario {
    std::size_t d = 1, n = 0, m = 0;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    GridDensity h;
    PhiSpec phi;

    // Derived by validate_scenario:
    double amp_pos = 0.0;  ///< sup of the positive part of phi
    double amp_neg = 0.0;  ///< annulus amplitude (phi = -amp_neg there)
    double h_focal = 1.0;  ///< h value on the cell carrying the deviation
};

/// Parse and validate a scenario from a JSON file / JSON text.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

/// Computes amplitudes and checks the invariants: the deviation support
/// must lie inside [0,1]^d and inside a single constant-h cell, and the
/// resulting p, q must be nonnegative (closed-form check plus a grid sweep).
void validate_scenario(Scenario& scenario);

double density_h(const Scenario& s, const double* x);
double phi_value(const Scenario& s, const double* x);
double density_p(const Scenario& s, const double* x);  ///< h + (1-lambda) phi sqrt(h)
double density_q(const Scenario& s, const double* x);  ///< h - lambda phi sqrt(h)
double sup_density_p(const Scenario& s);
double sup_density_q(const Scenario& s);

struct SampleStats {
    std::size_t proposals_p = 0;
    std::size_t proposals_q = 0;
};

/// Rejection sampling of m points from p and n-m from q against the exact
/// sup-density envelopes; deterministic per stream.
PooledSample sample_scenario(const Scenario& s, RngStream& stream,
                             SampleStats* stats = nullptr);

struct PowerSummary {
    std::size_t reps = 0;
    std::size_t rejections = 0;
    double rate = 0.0;
    double ci_low = 0.0;    ///< exact binomial (Clopper-Pearson) 95% interval
    double ci_high = 1.0;
    double mean_jaccard = 0.0;  ///< over rejecting replications
    std::size_t covered = 0;    ///< rejecting replications with overlap > 0
};

/// Replicated run_test over fresh draws from the scenario; config.threads
/// parallelizes replications (each test runs single-threaded inside).
PowerSummary power_study(const Scenario& s, const PermutationConfig& config);

/// Jaccard overlap of two Euclidean balls (1-d slice quadrature).
double ball_jaccard(const std::vector<double>& c1, double r1,
                    const std::vector<double>& c2, double r2);

/// Exact binomial confidence bounds for k successes in n trials.
std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n,
                                          double confidence);

}  // namespace nnmt
