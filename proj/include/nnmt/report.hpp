#pragma once

#include <string>

#include <json.hpp>

#include "nnmt/permutation.hpp"
#include "nnmt/simgen.hpp"
#include "nnmt/verify.hpp"

namespace nnmt {

/// Deterministic JSON serialization: insertion key order, two-space
/// indentation, doubles rendered with 17 significant digits, non-finite
/// numbers rendered as null. Identical values always produce identical bytes.
std::string dump_json(const nlohmann::ordered_json& value);

/// JSON view of a KernelSpec ({"family": ..., "beta"?, "trunc"?}).
nlohmann::ordered_json kernel_to_json(const KernelSpec& kernel);

/// Full report for run_test / univariate_test / classify_test output.
/// Key order: schema_version, command, config, sample, t_n, kappa_alpha,
/// p_value, reject, regions, [perm_stats,] timings.
nlohmann::ordered_json report_to_json(const TestReport& report);

/// Machine-readable record of one inequality sweep.
nlohmann::ordered_json inequality_to_json(const InequalityReport& report);

/// Power-study summary (simulate subcommand).
nlohmann::ordered_json power_to_json(const Scenario& scenario,
                                     const PermutationConfig& config,
                                     const PowerSummary& summary);

}  // namespace nnmt
