#pragma once

#include <Eigen/Dense>
#include <vector>

#include "koopman/eigensolver.hpp"
#include "koopman/markov.hpp"

namespace koopman {

// Ordered eigenpairs of the symmetric Markov operator, converted to the
// row-stochastic picture, plus the Sobolev weights
//   eta_j = (1/lambda_j - 1) / (1/lambda_1 - 1),  eta_0 = 0.
//
// phis columns are orthonormal in the weighted inner product
//   <f, g> = (1/n) sum_i f(i) * weights(i) * g(i),  weights = sigma/rho.
struct MarkovSpectrum {
  Eigen::VectorXd lambdas;    // m+1, descending, lambda_0 = 1
  Eigen::MatrixXd phis;       // n x (m+1)
  Eigen::VectorXd etas;       // m+1, nondecreasing
  Eigen::VectorXd weights;    // n, copy of MarkovBundle::d_scale
  Eigen::VectorXd residuals;  // eigensolver residuals per pair

  Eigen::Index n() const { return phis.rows(); }
  int m() const { return static_cast<int>(lambdas.size()) - 1; }
};

// Weighted empirical inner product used throughout the basis.
double weighted_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                    const Eigen::VectorXd& w);

// Top m+1 eigenpairs of the symmetric weighted operator, sign-fixed and
// sorted descending (stable on ties). Errors if the solver fails or the
// eigenvalue 1 is not simple (disconnected kernel).
MarkovSpectrum eigendecompose(const MarkovBundle& m, int n_pairs,
                              const SymEigsOptions& opts = {});

// Out-of-sample eigenfunction values: phi_j(x) = lambda_j^{-1} (1/n) sum_i
// p(x, x_i) phi_j(i) from kernel rows k(x, x_i) computed with the same Q
// and epsilon as the training kernel. Errors for lambda_j <= tol.
Eigen::MatrixXd nystrom_extend(const MarkovBundle& m,
                               const MarkovSpectrum& spectrum,
                               const Eigen::MatrixXd& new_kernel_rows,
                               const std::vector<int>& indices,
                               double tol = 1e-10);

}  // namespace koopman
