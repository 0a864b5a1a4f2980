#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nnmt/permutation.hpp"

namespace nnmt {

/// Covariates with binary outcomes and a known marginal rate lambda.
struct LabeledPoints {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> coords;      ///< n*d, row-major
    std::vector<std::uint8_t> y;     ///< outcomes in {0,1}
    double lambda = 0.5;             ///< known P(Y = 1), in (0,1)
};

/// Validated construction; throws data_error on bad outcomes or lambda.
LabeledPoints validate_labeled(const std::vector<std::vector<double>>& points,
                               const std::vector<int>& y, double lambda);

/// T = (1/(sigma_lambda gamma sqrt(n))) sum_i w_i (y_i - lambda) with
/// sigma_lambda = sqrt(lambda(1-lambda)): the local outcome-rate deviation
/// from lambda, standardized like the two-sample statistic.
double classify_stat(const std::vector<double>& weights,
                     const std::vector<std::uint8_t>& y, double lambda,
                     double gamma, std::size_t n);

/// C = 3 R gamma^{-1} Gamma + sqrt(2 Gamma) with Gamma = gamma_log(gamma^2)
/// and R = max(lambda, 1-lambda) / (3 sigma_lambda sqrt(n)) -- the Bernstein
/// ratio for centered Bernoullis; no decoupling factor (delta = 1).
double classify_correction(double gamma, double lambda, std::size_t n);

/// Multiscale classification test; the null is calibrated by permuting y
/// while holding the point cloud (and hence M = sum y_i) fixed.
TestReport classify_test(const LabeledPoints& data,
                         const PermutationConfig& config);

}  // namespace nnmt
