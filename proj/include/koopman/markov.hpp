#pragma once

#include <Eigen/Dense>

#include "koopman/delay_kernel.hpp"

namespace koopman {

// Two-step Markov normalization of a kernel matrix. All kernel sums carry
// the empirical-measure weight 1/n, so the stored operators act as
//   (A f)(i) = (1/n) * sum_j a(i,j) f(j).
//
// rho(i)   = (1/n) sum_j k(i,j)
// sigma(i) = (1/n) sum_j k(i,j) / rho(j)
// p_hat(i,j) = k(i,j) / (sigma_hat(i) sigma_hat(j)),  sigma_hat = sqrt(sigma*rho)
// d_scale  = sigma / rho, the diagonal of the similarity transform between
//            the row-stochastic operator and the symmetric one.
struct MarkovBundle {
  Eigen::VectorXd rho;
  Eigen::VectorXd sigma;
  Eigen::VectorXd sigma_hat;
  Eigen::VectorXd d_scale;
  double epsilon = 0.0;
  int Q = 1;
  int k_nn = 0;
  Eigen::MatrixXd p_hat;      // dense storage (k_nn == 0)
  CsrMatrix p_hat_sparse;     // CSR storage (k_nn > 0)
  double stochasticity_residual = 0.0;  // max_i |(1/n) sum_j p(i,j) - 1|

  bool is_sparse() const { return k_nn > 0; }
  Eigen::Index n() const { return rho.size(); }

  // y = (1/n) * p_hat * x
  void weighted_apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
};

// Consumes the kernel (the dense buffer is rescaled in place into p_hat).
MarkovBundle normalize(KernelBundle kernel);

// Row-stochastic action P f computed through the similarity transform
// P = D^{-1/2} Phat D^{1/2}, D = diag(d_scale).
Eigen::VectorXd apply_markov(const MarkovBundle& m, const Eigen::VectorXd& f);

}  // namespace koopman
