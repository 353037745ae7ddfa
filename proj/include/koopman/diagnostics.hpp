#pragma once

#include <Eigen/Dense>

namespace koopman {

// max |K(i+1,j+1) - K(i,j)| over interior indices: the max-norm of the
// commutator between the kernel matrix and the index shift.
double shift_commutator_norm(const Eigen::MatrixXd& kernel);

// Coefficient of variation (std/mean) of d2 entries over pairs j - i > Q.
double offdiag_dispersion_cv(const Eigen::MatrixXd& d2, int Q);

// Relative gaps |lambda_{2k-1} - lambda_{2k}| / lambda_{2k-1}, k = 1..pairs.
Eigen::VectorXd degeneracy_gaps(const Eigen::VectorXd& lambdas, int pairs);

// ||V + V^T||_F / ||V||_F.
double skew_symmetry_residual(const Eigen::MatrixXd& v);

// Largest principal angle (radians) between the column spans of a and b
// under the weighted inner product (1/n) sum f w g.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::VectorXd& w);

// Lag in [1, max_lag] maximizing |sum_n a(n+lag) b(n)| (mean-removed,
// normalized by overlap length).
int crosscorr_peak_lag(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       int max_lag);

// Index of the dominant nonzero frequency bin of a real series (plain DFT).
int dft_peak_bin(const Eigen::VectorXd& series);

}  // namespace koopman
