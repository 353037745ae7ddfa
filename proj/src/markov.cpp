#include "koopman/markov.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace koopman {

namespace {

void csr_apply(const CsrMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.resize(a.n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < a.n; ++i) {
    double s = 0.0;
    for (Eigen::Index p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      s += a.val[p] * x(a.col[p]);
    y(i) = s;
  }
}

// Connectivity scan of the sparsity pattern (the sparse Markov operator
// must stay ergodic).
bool csr_connected(const CsrMatrix& a) {
  if (a.n == 0) return true;
  std::vector<char> seen(a.n, 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index count = 1;
  while (!stack.empty()) {
    const Eigen::Index i = stack.back();
    stack.pop_back();
    for (Eigen::Index p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const Eigen::Index j = a.col[p];
      if (!seen[j]) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == a.n;
}

}  // namespace

void MarkovBundle::weighted_apply(const Eigen::VectorXd& x,
                                  Eigen::VectorXd& y) const {
  if (is_sparse()) {
    csr_apply(p_hat_sparse, x, y);
  } else {
    y.noalias() = p_hat * x;
  }
  y /= static_cast<double>(n());
}

MarkovBundle normalize(KernelBundle kernel) {
  const Eigen::Index n = kernel.n();
  if (n < 1) throw ConfigError("normalize: empty kernel");

  MarkovBundle out;
  out.epsilon = kernel.epsilon;
  out.Q = kernel.Q;
  out.k_nn = kernel.k_nn;
  out.rho.resize(n);
  out.sigma.resize(n);

  if (kernel.is_sparse()) {
    const CsrMatrix& k = kernel.sparse;
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index p = k.row_ptr[i]; p < k.row_ptr[i + 1]; ++p) {
        if (k.val[p] < 0.0)
          throw NumericError("normalize: negative kernel entry");
        s += k.val[p];
      }
      if (!(s > 0.0)) {
        std::ostringstream msg;
        msg << "normalize: zero kernel row sum at row " << i;
        throw NumericError(msg.str());
      }
      out.rho(i) = s / n;
    }
    if (!csr_connected(k))
      throw NumericError(
          "normalize: sparsity pattern is disconnected; increase k_nn");
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index p = k.row_ptr[i]; p < k.row_ptr[i + 1]; ++p)
        s += k.val[p] / out.rho(k.col[p]);
      out.sigma(i) = s / n;
    }
    out.sigma_hat = (out.sigma.array() * out.rho.array()).sqrt();
    out.d_scale = out.sigma.array() / out.rho.array();
    out.p_hat_sparse = std::move(kernel.sparse);
    CsrMatrix& p = out.p_hat_sparse;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q)
        p.val[q] /= out.sigma_hat(i) * out.sigma_hat(p.col[q]);
  } else {
    const Eigen::MatrixXd& k = kernel.dense;
    if ((k.array() < 0.0).any())
      throw NumericError("normalize: negative kernel entry");
    // Row reductions; the kernel is symmetric so column sums serve as row
    // sums and keep the memory walk contiguous.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Eigen::Index i = 0; i < n; ++i) out.rho(i) = k.col(i).sum() / n;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(out.rho(i) > 0.0)) {
        std::ostringstream msg;
        msg << "normalize: zero kernel row sum at row " << i;
        throw NumericError(msg.str());
      }
    const Eigen::VectorXd inv_rho = out.rho.cwiseInverse();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Eigen::Index i = 0; i < n; ++i)
      out.sigma(i) = k.col(i).dot(inv_rho) / n;
    out.sigma_hat = (out.sigma.array() * out.rho.array()).sqrt();
    out.d_scale = out.sigma.array() / out.rho.array();

    out.p_hat = std::move(kernel.dense);
    const Eigen::VectorXd inv_sh = out.sigma_hat.cwiseInverse();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Eigen::Index j = 0; j < n; ++j)
      out.p_hat.col(j) = out.p_hat.col(j).cwiseProduct(inv_sh) * inv_sh(j);
  }

  // Markov-property residual: row sums of the implied stochastic matrix
  // equal (S u)(i)/u(i) with u = sqrt(d_scale), S the stored operator.
  Eigen::VectorXd u = out.d_scale.array().sqrt();
  Eigen::VectorXd su;
  out.weighted_apply(u, su);
  out.stochasticity_residual = ((su.array() / u.array()) - 1.0).abs().maxCoeff();
  return out;
}

Eigen::VectorXd apply_markov(const MarkovBundle& m, const Eigen::VectorXd& f) {
  if (f.size() != m.n())
    throw ConfigError("apply_markov: vector length mismatch");
  const Eigen::VectorXd half = m.d_scale.array().sqrt();
  Eigen::VectorXd scaled = f.cwiseProduct(half);
  Eigen::VectorXd y;
  m.weighted_apply(scaled, y);
  return y.cwiseQuotient(half);
}

}  // namespace koopman
