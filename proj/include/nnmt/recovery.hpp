#pragma once

#include <cstddef>

#include "nnmt/errors.hpp"

namespace nnmt {

/// Constants of the optimal-recovery analysis for one (beta, L, d, m, n).
struct RecoveryConstants {
    double beta = 1.0;
    double L = 1.0;
    std::size_t d = 1;
    double norm_sq = 0.0;  ///< squared L2 norm of the recovery kernel
    double c = 0.0;        ///< sharp separation constant c(beta, L)
    double rho = 0.0;      ///< critical rate rho_{m,n}
};

/// Volume of the d-dimensional Euclidean unit ball.
double unit_ball_volume(std::size_t d);

/// psi_beta(r) = (1 - r^beta)_+ for r >= 0; closed form exists only for
/// beta <= 1 (beta > 1 is rejected with a domain error).
double psi_beta(double r, double beta);

/// ||gamma_beta||_2^2 = int (1-||x||^beta)_+^2 dx
///                    = d V_d [1/d - 2/(d+beta) + 1/(d+2 beta)].
double recovery_norm(double beta, std::size_t d);

/// Same integral by adaptive radial quadrature (cross-check path).
double recovery_norm_quadrature(double beta, std::size_t d);

/// c(beta, L) = (2 d L^{d/beta} / ((2 beta + d) ||gamma_beta||^2))^{beta/(2 beta+d)}.
double separation_constant(double beta, double L, std::size_t d);

/// rho_{m,n} = (n log n / (m(n-m)))^{beta/(2 beta + d)}.
double critical_rate(std::size_t m, std::size_t n, double beta, std::size_t d);

RecoveryConstants recovery_constants(double beta, double L, std::size_t d,
                                     std::size_t m, std::size_t n);

}  // namespace nnmt
