#pragma once

#include <Eigen/Dense>
#include <vector>

#include "koopman/dynamics.hpp"

namespace koopman {

// Symmetric matrix of squared delay-coordinate pseudodistances
//   d2(i,j) = (1/Q) * sum_{q<Q} |F_{i+q} - F_{j+q}|^2
// over embedded indices 0 .. N-Q.
struct DelayDistanceMatrix {
  int Q = 1;
  Eigen::MatrixXd d2;  // n_emb x n_emb, diagonal exactly zero

  Eigen::Index n_emb() const { return d2.rows(); }
};

struct CsrMatrix {
  Eigen::Index n = 0;
  std::vector<Eigen::Index> row_ptr;  // n + 1
  std::vector<Eigen::Index> col;
  std::vector<double> val;

  Eigen::Index nnz() const { return static_cast<Eigen::Index>(val.size()); }
};

// Kernel matrix with its bandwidth; dense Gaussian by default, CSR after
// kNN sparsification (k_nn > 0 selects the sparse storage).
struct KernelBundle {
  double epsilon = 0.0;
  int Q = 1;
  int k_nn = 0;
  Eigen::MatrixXd dense;
  CsrMatrix sparse;

  bool is_sparse() const { return k_nn > 0; }
  Eigen::Index n() const { return is_sparse() ? sparse.n : dense.rows(); }
};

DelayDistanceMatrix delay_distance_matrix(const ObservedTrajectory& traj, int Q);

// Rectangular block of squared delay distances between windows starting at
// rows row_start.. and windows starting at col_start.. of the same series.
// Used for out-of-sample extension rows.
Eigen::MatrixXd delay_distance_block(const Eigen::MatrixXd& samples, int Q,
                                     Eigen::Index row_start, Eigen::Index n_rows,
                                     Eigen::Index col_start, Eigen::Index n_cols);

KernelBundle gaussian_kernel(const DelayDistanceMatrix& dist, double epsilon);

struct BandwidthDiagnostics {
  Eigen::VectorXd epsilons;
  Eigen::VectorXd kernel_sums;  // S(eps)
  Eigen::VectorXd slopes;       // forward log-log differences; last entry NaN
  double epsilon_star = 0.0;
  bool flat = false;            // all slopes ~ 0 (degenerate data)
};

// 64 log-spaced candidates spanning [1e-3, 1e3] x median(d2).
Eigen::VectorXd default_bandwidth_grid(const DelayDistanceMatrix& dist);

// Kernel-sum bandwidth tuning: S(eps) = mean of exp(-d2/eps); returns the
// grid point maximizing the forward log-log slope.
BandwidthDiagnostics tune_bandwidth(const DelayDistanceMatrix& dist,
                                    const Eigen::VectorXd& grid);

// Keep the diagonal plus the k_nn largest off-diagonal entries per row,
// then symmetrize the pattern by union.
KernelBundle sparsify_knn(const KernelBundle& kernel, int k_nn);

}  // namespace koopman
