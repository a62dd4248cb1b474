#pragma once

#include <Eigen/Dense>

namespace gtlproco {

/*
 * Scrambling test on an adjacency pattern: every pair of rows must share
 * at least one column where both are nonzero. Throws on non-square input.
 */
bool is_scrambling(const Eigen::MatrixXi &adj);

/*
 * Dobrushin ergodicity coefficient of a column-stochastic matrix:
 *   tau_1(M) = 1/2 * max_{i,j} sum_p |M(p,i) - M(p,j)|.
 * Requires M column-stochastic within 1e-9.
 */
double ergodicity_coefficient(const Eigen::MatrixXd &M);

/* Modulus of the second-largest eigenvalue (by modulus, with multiplicity). */
double second_eigenvalue_modulus(const Eigen::MatrixXd &M);

/* Stationary distribution of a column-stochastic matrix (eigenvector at 1). */
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd &M);

struct ReversibilizationRate {
  double rate = 0.0;        /* squared spectral norm of Q^-1 M Q - r r^T */
  double cross_check = 0.0; /* lambda_2 of the multiplicative reversibilization */
};

/*
 * Convergence rate of M toward its stationary distribution nu, computed two
 * independent ways:
 *   - squared top singular value of Q^-1 M Q - r r^T with r = sqrt(nu),
 *     Q = diag(r);
 *   - second-largest eigenvalue of M diag(nu) M^T diag(nu)^-1.
 * Both agree within 1e-8 for valid inputs. Requires nu > 0 and M nu = nu
 * within 1e-8.
 */
ReversibilizationRate reversibilization_rate(const Eigen::MatrixXd &M,
                                             const Eigen::VectorXd &nu);

} // namespace gtlproco
