#pragma once

#include <Eigen/Dense>

#include "koopman/delay_kernel.hpp"
#include "koopman/markov.hpp"

// Serial reference implementations. The OpenMP kernels in the main modules
// are checked against these in the test suite and timed against them in the
// benchmark target. delay_distance_direct is the brute-force O(N^2 Q)
// evaluation, independent of the sliding recursion.
namespace koopman::ref {

Eigen::MatrixXd delay_distance_direct(const ObservedTrajectory& traj, int Q);

DelayDistanceMatrix delay_distance_matrix_serial(const ObservedTrajectory& traj,
                                                 int Q);

Eigen::MatrixXd gaussian_kernel_serial(const Eigen::MatrixXd& d2, double epsilon);

double kernel_sum_serial(const Eigen::MatrixXd& d2, double epsilon);

void normalize_vectors_serial(const Eigen::MatrixXd& kernel, Eigen::VectorXd& rho,
                              Eigen::VectorXd& sigma);

// Dense row-stochastic operator matrix (1/n) k(i,j)/(sigma(i) rho(j)) for
// small-instance oracle comparisons.
Eigen::MatrixXd row_stochastic_matrix(const Eigen::MatrixXd& kernel,
                                      const Eigen::VectorXd& rho,
                                      const Eigen::VectorXd& sigma);

}  // namespace koopman::ref
