#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace koopman {

using LinearOp = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

enum class EigsMode { automatic, dense, krylov };

struct SymEigsOptions {
  double tol = 1e-10;          // residual target |A v - lambda v|
  int max_subspace = 0;        // 0 = pick from k and n
  int check_every = 20;
  std::uint64_t seed = 0x5eedULL;
  EigsMode mode = EigsMode::automatic;
  Eigen::Index dense_cutoff = 4096;
};

struct SymEigsResult {
  Eigen::VectorXd values;     // descending
  Eigen::MatrixXd vectors;    // unit 2-norm columns
  Eigen::VectorXd residuals;  // |A v - lambda v| per returned pair
  int matvecs = 0;
  int subspace_dim = 0;
};

// Top-k eigenpairs of a dense symmetric matrix (full decomposition, then
// the k largest). Serves as the reference path for the iterative solver.
SymEigsResult dense_symmetric_topk(const Eigen::MatrixXd& a, int k);

// Krylov solver for the k largest eigenvalues of a symmetric operator:
// orthonormal subspace expansion with full reorthogonalization and
// Rayleigh-Ritz extraction; on stagnation (tight clusters, multiplicity)
// the subspace is augmented with a random direction. Throws NumericError
// with a residual report when the subspace budget is exhausted.
SymEigsResult krylov_symmetric_topk(const LinearOp& op, Eigen::Index n, int k,
                                    const SymEigsOptions& opts = {});

// Dispatcher: dense solve up to opts.dense_cutoff when a matrix is given,
// Krylov otherwise. `matrix` may be null if mode forces the Krylov path.
SymEigsResult symmetric_topk(const Eigen::MatrixXd* matrix, const LinearOp& op,
                             Eigen::Index n, int k,
                             const SymEigsOptions& opts = {});

}  // namespace koopman
