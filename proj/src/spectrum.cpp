#include "koopman/spectrum.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace koopman {

double weighted_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                    const Eigen::VectorXd& w) {
  return f.cwiseProduct(w).dot(g) / static_cast<double>(w.size());
}

MarkovSpectrum eigendecompose(const MarkovBundle& m, int n_pairs,
                              const SymEigsOptions& opts) {
  const Eigen::Index n = m.n();
  if (n_pairs < 1 || n_pairs >= n)
    throw ConfigError("eigendecompose: need 1 <= m < n_emb");
  const int k = n_pairs + 1;

  LinearOp op = [&m](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    m.weighted_apply(x, y);
  };

  SymEigsResult eig;
  if (!m.is_sparse() &&
      (opts.mode == EigsMode::dense ||
       (opts.mode == EigsMode::automatic && n <= opts.dense_cutoff))) {
    // Solve on p_hat itself and rescale; avoids a scaled copy.
    eig = dense_symmetric_topk(m.p_hat, k);
    eig.values /= static_cast<double>(n);
    eig.residuals /= static_cast<double>(n);
  } else {
    eig = krylov_symmetric_topk(op, n, k, opts);
  }

  const double worst = eig.residuals.maxCoeff();
  if (worst > 1e-8) {
    std::ostringstream msg;
    msg << "eigendecompose: eigen residual " << worst << " above 1e-8";
    throw NumericError(msg.str());
  }
  if (eig.values(1) >= 1.0 - 1e-10) {
    std::ostringstream msg;
    msg << "eigendecompose: lambda_1 = " << eig.values(1)
        << "; eigenvalue 1 is not simple (disconnected kernel)";
    throw NumericError(msg.str());
  }

  MarkovSpectrum out;
  out.lambdas = eig.values;
  out.residuals = eig.residuals;
  out.weights = m.d_scale;

  // Orthonormal under the (1/n)-weighted product, then the similarity map
  // to the row-stochastic picture; signs fixed deterministically.
  const double root_n = std::sqrt(static_cast<double>(n));
  const Eigen::VectorXd inv_half = m.d_scale.array().rsqrt();
  out.phis.resize(n, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = eig.vectors.col(j) * root_n;
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    out.phis.col(j) = v.cwiseProduct(inv_half);
  }

  out.etas.resize(k);
  out.etas(0) = 0.0;
  const double lam1 = out.lambdas(1);
  const double denom = lam1 > 0.0 ? 1.0 / lam1 - 1.0 : 0.0;
  for (int j = 1; j < k; ++j) {
    const double lam = out.lambdas(j);
    if (lam > 0.0 && denom > 0.0)
      out.etas(j) = (1.0 / lam - 1.0) / denom;
    else
      out.etas(j) = std::numeric_limits<double>::infinity();
  }
  return out;
}

Eigen::MatrixXd nystrom_extend(const MarkovBundle& m,
                               const MarkovSpectrum& spectrum,
                               const Eigen::MatrixXd& new_kernel_rows,
                               const std::vector<int>& indices, double tol) {
  const Eigen::Index n = m.n();
  if (new_kernel_rows.cols() != n)
    throw ConfigError("nystrom_extend: kernel rows have wrong width");
  for (int j : indices) {
    if (j < 0 || j > spectrum.m())
      throw ConfigError("nystrom_extend: eigenfunction index out of range");
    if (!(spectrum.lambdas(j) > tol)) {
      std::ostringstream msg;
      msg << "nystrom_extend: lambda_" << j << " = " << spectrum.lambdas(j)
          << " at or below tolerance " << tol;
      throw NumericError(msg.str());
    }
  }

  const Eigen::Index n_new = new_kernel_rows.rows();
  const Eigen::VectorXd inv_rho = m.rho.cwiseInverse();
  Eigen::MatrixXd out(n_new, static_cast<Eigen::Index>(indices.size()));
  for (Eigen::Index r = 0; r < n_new; ++r) {
    const Eigen::VectorXd row = new_kernel_rows.row(r);
    const double sigma_new = row.dot(inv_rho) / n;
    if (!(sigma_new > 0.0))
      throw NumericError("nystrom_extend: vanishing kernel mass at new point");
    for (std::size_t c = 0; c < indices.size(); ++c) {
      const int j = indices[c];
      // (1/n) sum_i k(x,i)/(sigma(x) rho(i)) phi_j(i) / lambda_j
      const double acc =
          row.cwiseProduct(inv_rho).dot(spectrum.phis.col(j)) / n;
      out(r, c) = acc / (sigma_new * spectrum.lambdas(j));
    }
  }
  return out;
}

}  // namespace koopman
