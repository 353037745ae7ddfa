#include "koopman/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "koopman/common.hpp"

namespace koopman {

namespace {

struct SortedPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// Descending stable sort on (-value, original solver index).
SortedPairs sort_descending(const Eigen::VectorXd& vals,
                            const Eigen::MatrixXd& vecs, int k) {
  std::vector<int> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return vals(a) > vals(b); });
  SortedPairs out;
  out.values.resize(k);
  out.vectors.resize(vecs.rows(), k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = vals(idx[j]);
    out.vectors.col(j) = vecs.col(idx[j]);
  }
  return out;
}

// Deterministic unit Gaussian via Box-Muller on raw engine output (keeps
// results identical across standard libraries).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
  void fill(Eigen::Ref<Eigen::VectorXd> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = (*this)();
  }

 private:
  double uniform_open() {
    const double u = (rng_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }
  std::mt19937_64 rng_;
};

}  // namespace

SymEigsResult dense_symmetric_topk(const Eigen::MatrixXd& a, int k) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw ConfigError("dense_symmetric_topk: matrix not square");
  if (k < 1 || k > n) throw ConfigError("dense_symmetric_topk: bad k");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw NumericError("dense_symmetric_topk: eigensolver failed");
  SortedPairs top = sort_descending(solver.eigenvalues(), solver.eigenvectors(), k);
  SymEigsResult out;
  out.values = std::move(top.values);
  out.vectors = std::move(top.vectors);
  out.residuals.resize(k);
  for (int j = 0; j < k; ++j)
    out.residuals(j) =
        (a * out.vectors.col(j) - out.values(j) * out.vectors.col(j)).norm();
  out.subspace_dim = static_cast<int>(n);
  return out;
}

SymEigsResult krylov_symmetric_topk(const LinearOp& op, Eigen::Index n, int k,
                                    const SymEigsOptions& opts) {
  if (k < 1 || k > n) throw ConfigError("krylov_symmetric_topk: bad k");
  const int max_dim = static_cast<int>(std::min<Eigen::Index>(
      n, opts.max_subspace > 0 ? opts.max_subspace
                               : std::max(8 * k + 40, 320)));
  if (max_dim < k)
    throw ConfigError("krylov_symmetric_topk: subspace budget below k");

  Eigen::MatrixXd basis(n, max_dim);   // V, orthonormal
  Eigen::MatrixXd image(n, max_dim);   // W = A V
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(max_dim, max_dim);  // V^T A V

  GaussianStream gauss(opts.seed);
  Eigen::VectorXd w(n), tmp(n);
  gauss.fill(w);
  w.normalize();
  basis.col(0) = w;

  int matvecs = 0;
  int dim = 0;
  double prev_worst = std::numeric_limits<double>::infinity();
  int stagnant_checks = 0;
  bool augment_random = false;

  Eigen::VectorXd ritz_vals;
  Eigen::MatrixXd ritz_coef;

  auto rayleigh_ritz = [&](int d) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        proj.topLeftCorner(d, d));
    if (es.info() != Eigen::Success)
      throw NumericError("krylov_symmetric_topk: projected solve failed");
    SortedPairs top = sort_descending(es.eigenvalues(), es.eigenvectors(),
                                      std::min(k, d));
    ritz_vals = std::move(top.values);
    ritz_coef = std::move(top.vectors);
  };

  auto residual_of = [&](int j) {
    tmp.noalias() = image.leftCols(dim) * ritz_coef.col(j);
    tmp.noalias() -= ritz_vals(j) * (basis.leftCols(dim) * ritz_coef.col(j));
    return tmp.norm();
  };

  bool converged = false;
  while (dim < max_dim && !converged) {
    const int i = dim;
    Eigen::VectorXd av(n);
    op(basis.col(i), av);
    ++matvecs;
    image.col(i) = av;
    proj.col(i).head(i + 1).noalias() = basis.leftCols(i + 1).transpose() * av;
    proj.row(i).head(i + 1) = proj.col(i).head(i + 1).transpose();
    dim = i + 1;

    if (dim < max_dim) {
      if (augment_random) {
        gauss.fill(w);
        augment_random = false;
      } else {
        w = av;
      }
      // Two Gram-Schmidt passes keep the basis orthonormal to machine
      // precision even for tight eigenvalue clusters.
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd h = basis.leftCols(dim).transpose() * w;
        w.noalias() -= basis.leftCols(dim) * h;
      }
      double beta = w.norm();
      if (beta < 1e-12) {
        gauss.fill(w);
        for (int pass = 0; pass < 2; ++pass) {
          Eigen::VectorXd h = basis.leftCols(dim).transpose() * w;
          w.noalias() -= basis.leftCols(dim) * h;
        }
        beta = w.norm();
        if (beta < 1e-12) break;  // space exhausted
      }
      basis.col(dim) = w / beta;
    }

    const bool final_step = dim == max_dim;
    if (dim >= k && (dim % opts.check_every == 0 || final_step)) {
      rayleigh_ritz(dim);
      double worst = 0.0;
      for (int j = 0; j < static_cast<int>(ritz_vals.size()); ++j)
        worst = std::max(worst, residual_of(j));
      if (worst < opts.tol) {
        converged = true;
      } else if (!final_step) {
        if (worst > 0.5 * prev_worst) {
          if (++stagnant_checks >= 2) {
            augment_random = true;  // clusters/multiplicity: widen the space
            stagnant_checks = 0;
          }
        } else {
          stagnant_checks = 0;
        }
        prev_worst = worst;
      }
    }
  }

  if (dim < k)
    throw NumericError("krylov_symmetric_topk: subspace collapsed below k");
  if (ritz_vals.size() < k) rayleigh_ritz(dim);

  SymEigsResult out;
  out.values = ritz_vals;
  out.vectors.resize(n, k);
  out.residuals.resize(k);
  for (int j = 0; j < k; ++j) {
    out.vectors.col(j).noalias() = basis.leftCols(dim) * ritz_coef.col(j);
    out.vectors.col(j).normalize();
    out.residuals(j) = residual_of(j);
  }
  out.matvecs = matvecs;
  out.subspace_dim = dim;

  const double worst = out.residuals.maxCoeff();
  if (!converged && worst > 1e-8) {
    std::ostringstream msg;
    msg << "krylov_symmetric_topk: no convergence with subspace " << dim
        << "; worst residual " << worst << " (target " << opts.tol << ")";
    throw NumericError(msg.str());
  }
  return out;
}

SymEigsResult symmetric_topk(const Eigen::MatrixXd* matrix, const LinearOp& op,
                             Eigen::Index n, int k, const SymEigsOptions& opts) {
  const bool dense_ok = matrix != nullptr;
  if (opts.mode == EigsMode::dense ||
      (opts.mode == EigsMode::automatic && dense_ok && n <= opts.dense_cutoff)) {
    if (!dense_ok)
      throw ConfigError("symmetric_topk: dense mode requires a matrix");
    return dense_symmetric_topk(*matrix, k);
  }
  return krylov_symmetric_topk(op, n, k, opts);
}

}  // namespace koopman
