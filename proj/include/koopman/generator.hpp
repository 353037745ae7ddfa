#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "koopman/spectrum.hpp"

namespace koopman {

enum class FdOrder { first_forward, second_central };

FdOrder fd_order_from_string(const std::string& name);
std::string to_string(FdOrder order);

struct FDScheme {
  FdOrder order = FdOrder::first_forward;
  double dt = 0.0;
};

// Boundary entries where the stencil is incomplete are zero; `trim`
// additionally drops those samples from inner products (sensitivity
// diagnostic only).
enum class BoundaryMode { zero_pad, trim };

// Finite-difference estimate of the time derivative of a sampled series.
Eigen::VectorXd fd_apply(const Eigen::VectorXd& f, const FDScheme& scheme);

// Galerkin matrix of the generator in the eigenbasis, indices 1..m
// (constant phi_0 excluded): V_ij = <phi_i, fd(phi_j)>_w. Set
// include_constant for the (m+1)x(m+1) diagnostic variant with index 0.
Eigen::MatrixXd generator_matrix(const MarkovSpectrum& spectrum,
                                 const FDScheme& scheme, int m,
                                 bool antisymmetrize = false,
                                 BoundaryMode boundary = BoundaryMode::zero_pad,
                                 bool include_constant = false);

// A_ij = V_ij / eta_j - theta * delta_ij,  B = diag(1/eta_i).
// `etas` holds eta_1..eta_m.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_galerkin(
    const Eigen::MatrixXd& v_mat, const Eigen::VectorXd& etas, double theta);

struct GeneratorEigenpair {
  std::complex<double> gamma;
  Eigen::VectorXcd coeffs;  // expansion in the phi^{(2)} basis, unit norm
};

// All m eigenpairs of the pencil A c = gamma B c via the equivalent
// standard problem B^{-1} A, with a balanced general eigensolver.
std::vector<GeneratorEigenpair> solve_regularized(const Eigen::MatrixXd& a_mat,
                                                  const Eigen::MatrixXd& b_mat);

// Regularized generator solutions ordered by Dirichlet energy.
struct GeneratorSolution {
  Eigen::MatrixXd V_mat;  // m x m, indices 1..m
  double theta = 0.0;
  Eigen::MatrixXd A_mat;
  Eigen::MatrixXd B_mat;
  Eigen::VectorXcd gammas;             // ascending Dirichlet energy
  Eigen::MatrixXcd coeffs;             // column j = phi^{(2)} coefficients
  Eigen::VectorXd energies;            // E_j
  Eigen::VectorXd dirichlet_residuals; // |Re gamma_j + theta E_j|

  int m() const { return static_cast<int>(gammas.size()); }
};

// Energy E_j = sum_k eta_k |b_jk|^2 / sum_k |b_jk|^2 with b = coeffs
// rescaled to the phi basis; sorts ascending by E_j.
GeneratorSolution dirichlet_order(const std::vector<GeneratorEigenpair>& pairs,
                                  const Eigen::VectorXd& etas, double theta);

// Convenience: assemble V, build the pencil, solve, and order by energy.
GeneratorSolution solve_generator(const MarkovSpectrum& spectrum,
                                  const FDScheme& scheme, int m, double theta,
                                  bool antisymmetrize = false,
                                  BoundaryMode boundary = BoundaryMode::zero_pad);

}  // namespace koopman
