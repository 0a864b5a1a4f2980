#pragma once

#include <cstddef>

#include "nnmt/errors.hpp"

namespace nnmt {

/// Finite-sample calibration constants for a given (m, n, kernel sup-norm).
struct CalibrationConstants {
    std::size_t m = 0;
    std::size_t n = 0;
    double psi_sup = 1.0;
    double delta = 1.0;  ///< decoupling constant delta(m,n) >= 1
    double r_psi = 0.0;  ///< R_psi(m,n)
    double r_n = 0.0;    ///< R_n = R_psi(m,n) / sqrt(n)
};

/// delta(m,n) = (E min(S/m, (n-S)/(n-m)))^{-1} with S ~ Bin(n, m/n).
/// Computed by a mode-seeded pmf recurrence in extended precision;
/// absolute error <= 1e-12 for n <= 1e6. Symmetric: delta(m,n) = delta(n-m,n)
/// exactly (arguments are canonicalized first).
double delta_mn(std::size_t m, std::size_t n);

/// R_psi(m,n) = (2 psi_sup / 3) * max(m, n-m) / sqrt(m(n-m)).
double r_psi(std::size_t m, std::size_t n, double psi_sup);

/// Gamma = max(log(1/gamma_sq), 0); clamped so that a local variance
/// slightly above one never produces a negative correction argument.
double gamma_log(double gamma_sq);

CalibrationConstants make_constants(std::size_t m, std::size_t n,
                                    double psi_sup = 1.0);

/// C = 3 R_n gamma^{-1} delta(m,n) Gamma + delta(m,n) sqrt(2 Gamma)
/// with Gamma = gamma_log(gamma^2). Nonnegative by construction.
double correction(double gamma, const CalibrationConstants& consts);

/// Bernstein inversion G_n(eta, gamma) = Rt*eta + sqrt((Rt*eta)^2 + 2 delta^2 eta)
/// with Rt = delta * 2 psi_sup sqrt(lambda(1-lambda)) / (3 min(lambda, 1-lambda) sqrt(n) gamma).
double bernstein_quantile(double eta, double gamma,
                          const CalibrationConstants& consts, double lambda);

}  // namespace nnmt
