#include "koopman/delay_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace koopman {

namespace {

inline double pair_sq_dist(const Eigen::MatrixXd& f, Eigen::Index a,
                           Eigen::Index b) {
  return (f.row(a) - f.row(b)).squaredNorm();
}

}  // namespace

DelayDistanceMatrix delay_distance_matrix(const ObservedTrajectory& traj, int Q) {
  const Eigen::Index n = traj.n();
  if (Q < 1 || Q > n - 1) {
    std::ostringstream msg;
    msg << "delay_distance_matrix: Q = " << Q << " outside [1, " << n - 1 << "]";
    throw ConfigError(msg.str());
  }
  const Eigen::Index n_emb = n - Q + 1;
  DelayDistanceMatrix out;
  out.Q = Q;
  out.d2.resize(n_emb, n_emb);
  out.d2.diagonal().setZero();

  const Eigen::MatrixXd& f = traj.samples;
  const double inv_q = 1.0 / Q;

  // Each diagonal j - i = c is a sliding-window sum of the base distances
  // e(i) = |F_i - F_{i+c}|^2:  Q d2(i+1, j+1) = Q d2(i, j) - e(i) + e(i+Q).
  // Diagonals are independent, so they parallelize cleanly.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (Eigen::Index c = 1; c < n_emb; ++c) {
    std::vector<double> base(static_cast<std::size_t>(n - c));
    for (Eigen::Index i = 0; i < n - c; ++i) base[i] = pair_sq_dist(f, i, i + c);
    double acc = 0.0;
    for (int q = 0; q < Q; ++q) acc += base[q];
    for (Eigen::Index i = 0; i < n_emb - c; ++i) {
      const double v = std::max(0.0, acc * inv_q);
      out.d2(i, i + c) = v;
      out.d2(i + c, i) = v;
      if (i + 1 < n_emb - c) acc += base[i + Q] - base[i];
    }
  }
  return out;
}

Eigen::MatrixXd delay_distance_block(const Eigen::MatrixXd& samples, int Q,
                                     Eigen::Index row_start, Eigen::Index n_rows,
                                     Eigen::Index col_start, Eigen::Index n_cols) {
  const Eigen::Index n = samples.rows();
  if (Q < 1) throw ConfigError("delay_distance_block: Q must be >= 1");
  if (row_start < 0 || col_start < 0 || n_rows < 1 || n_cols < 1 ||
      row_start + n_rows + Q - 1 > n || col_start + n_cols + Q - 1 > n)
    throw ConfigError("delay_distance_block: window range exceeds the series");

  Eigen::MatrixXd out(n_rows, n_cols);
  const double inv_q = 1.0 / Q;
  // Same sliding recursion, along diagonals of the rectangular block.
  const Eigen::Index n_diag = n_rows + n_cols - 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (Eigen::Index d = 0; d < n_diag; ++d) {
    // Diagonal starts at (i0, j0), advancing (+1, +1).
    Eigen::Index i0 = d < n_cols ? 0 : d - n_cols + 1;
    Eigen::Index j0 = d < n_cols ? n_cols - 1 - d : 0;
    double acc = 0.0;
    for (int q = 0; q < Q; ++q)
      acc += pair_sq_dist(samples, row_start + i0 + q, col_start + j0 + q);
    for (Eigen::Index i = i0, j = j0; i < n_rows && j < n_cols; ++i, ++j) {
      out(i, j) = std::max(0.0, acc * inv_q);
      if (i + 1 < n_rows && j + 1 < n_cols) {
        acc -= pair_sq_dist(samples, row_start + i, col_start + j);
        acc += pair_sq_dist(samples, row_start + i + Q, col_start + j + Q);
      }
    }
  }
  return out;
}

KernelBundle gaussian_kernel(const DelayDistanceMatrix& dist, double epsilon) {
  if (!(epsilon > 0.0))
    throw ConfigError("gaussian_kernel: epsilon must be > 0");
  const Eigen::Index n = dist.n_emb();
  KernelBundle out;
  out.epsilon = epsilon;
  out.Q = dist.Q;
  out.dense.resize(n, n);
  const double inv_eps = 1.0 / epsilon;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i)
      out.dense(i, j) = std::exp(-dist.d2(i, j) * inv_eps);
    out.dense(j, j) = 1.0;
  }
  return out;
}

Eigen::VectorXd default_bandwidth_grid(const DelayDistanceMatrix& dist) {
  const Eigen::Index n = dist.n_emb();
  // Median of the off-diagonal squared distances; subsampled by stride for
  // very large matrices (the grid spans six decades, so fine accuracy of
  // the center is immaterial).
  std::vector<double> vals;
  const Eigen::Index total = n * (n - 1);
  const Eigen::Index target = 2'000'000;
  const Eigen::Index stride = std::max<Eigen::Index>(1, total / target);
  Eigen::Index counter = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      if (counter++ % stride == 0) vals.push_back(dist.d2(i, j));
    }
  double med = 1.0;
  if (!vals.empty()) {
    auto mid = vals.begin() + vals.size() / 2;
    std::nth_element(vals.begin(), mid, vals.end());
    med = *mid;
  }
  if (!(med > 0.0)) med = 1.0;

  const int n_pts = 64;
  Eigen::VectorXd grid(n_pts);
  const double lo = std::log(1e-3 * med), hi = std::log(1e3 * med);
  for (int t = 0; t < n_pts; ++t)
    grid(t) = std::exp(lo + (hi - lo) * t / (n_pts - 1));
  return grid;
}

BandwidthDiagnostics tune_bandwidth(const DelayDistanceMatrix& dist,
                                    const Eigen::VectorXd& grid) {
  if (grid.size() < 2)
    throw ConfigError("tune_bandwidth: need at least two grid points");
  for (Eigen::Index t = 0; t < grid.size(); ++t)
    if (!(grid(t) > 0.0))
      throw ConfigError("tune_bandwidth: grid values must be > 0");

  Eigen::VectorXd eps = grid;
  std::sort(eps.data(), eps.data() + eps.size());

  const Eigen::Index n = dist.n_emb();
  const Eigen::Index n_eps = eps.size();
  Eigen::VectorXd inv_eps = eps.cwiseInverse();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_eps);

  // One pass over the matrix; entries are summed into every grid point.
  // inv_eps is descending-in-contribution: once u/eps underflows exp for
  // some t it underflows for all smaller eps, so start each entry at its
  // first non-vanishing grid index.
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    Eigen::VectorXd local = Eigen::VectorXd::Zero(n_eps);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = dist.d2(i, j);
        Eigen::Index t0 = 0;
        while (t0 < n_eps && u * inv_eps(t0) > 745.0) ++t0;
        for (Eigen::Index t = t0; t < n_eps; ++t)
          local(t) += std::exp(-u * inv_eps(t));
      }
    }
#ifdef _OPENMP
#pragma omp critical
#endif
    sums += local;
  }

  BandwidthDiagnostics diag;
  diag.epsilons = eps;
  diag.kernel_sums = sums / static_cast<double>(n * n);
  diag.slopes.resize(n_eps);
  diag.slopes(n_eps - 1) = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index t = 0; t + 1 < n_eps; ++t) {
    const double ds = std::log(diag.kernel_sums(t + 1)) -
                      std::log(diag.kernel_sums(t));
    diag.slopes(t) = ds / (std::log(eps(t + 1)) - std::log(eps(t)));
  }

  Eigen::Index best = 0;
  for (Eigen::Index t = 1; t + 1 < n_eps; ++t)
    if (diag.slopes(t) > diag.slopes(best)) best = t;
  if (!(diag.slopes(best) > 1e-12)) {
    diag.flat = true;
    diag.epsilon_star = eps(0);
  } else {
    diag.epsilon_star = eps(best);
  }
  return diag;
}

KernelBundle sparsify_knn(const KernelBundle& kernel, int k_nn) {
  if (kernel.is_sparse())
    throw ConfigError("sparsify_knn: input kernel is already sparse");
  const Eigen::Index n = kernel.n();
  if (k_nn < 1 || k_nn >= n) {
    std::ostringstream msg;
    msg << "sparsify_knn: k_nn = " << k_nn << " outside [1, " << n - 1 << ")";
    throw ConfigError(msg.str());
  }

  // Kept pattern per row: diagonal plus the k_nn largest off-diagonal
  // entries (ties broken by column index), then union with the transpose.
  std::vector<std::vector<Eigen::Index>> keep(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> idx;
    idx.reserve(n - 1);
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) idx.push_back(j);
    std::nth_element(idx.begin(), idx.begin() + (k_nn - 1), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       const double va = kernel.dense(i, a);
                       const double vb = kernel.dense(i, b);
                       return va != vb ? va > vb : a < b;
                     });
    idx.resize(k_nn);
    idx.push_back(i);
    std::sort(idx.begin(), idx.end());
    keep[i] = std::move(idx);
  }

  std::vector<std::vector<Eigen::Index>> sym(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j : keep[i]) {
      sym[i].push_back(j);
      if (i != j) sym[j].push_back(i);
    }

  KernelBundle out;
  out.epsilon = kernel.epsilon;
  out.Q = kernel.Q;
  out.k_nn = k_nn;
  out.sparse.n = n;
  out.sparse.row_ptr.assign(n + 1, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& row = sym[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    out.sparse.row_ptr[i + 1] = out.sparse.row_ptr[i] +
                                static_cast<Eigen::Index>(row.size());
  }
  out.sparse.col.resize(out.sparse.row_ptr[n]);
  out.sparse.val.resize(out.sparse.row_ptr[n]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index p = out.sparse.row_ptr[i];
    for (Eigen::Index j : sym[i]) {
      out.sparse.col[p] = j;
      out.sparse.val[p] = kernel.dense(i, j);
      ++p;
    }
  }
  return out;
}

}  // namespace koopman
