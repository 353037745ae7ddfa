#include "koopman/reference.hpp"

#include <cmath>

namespace koopman::ref {

Eigen::MatrixXd delay_distance_direct(const ObservedTrajectory& traj, int Q) {
  const Eigen::Index n = traj.n();
  if (Q < 1 || Q > n - 1)
    throw ConfigError("delay_distance_direct: Q out of range");
  const Eigen::Index n_emb = n - Q + 1;
  Eigen::MatrixXd d2(n_emb, n_emb);
  for (Eigen::Index i = 0; i < n_emb; ++i)
    for (Eigen::Index j = 0; j < n_emb; ++j) {
      double s = 0.0;
      for (int q = 0; q < Q; ++q)
        s += (traj.samples.row(i + q) - traj.samples.row(j + q)).squaredNorm();
      d2(i, j) = s / Q;
    }
  return d2;
}

DelayDistanceMatrix delay_distance_matrix_serial(const ObservedTrajectory& traj,
                                                 int Q) {
  const Eigen::Index n = traj.n();
  if (Q < 1 || Q > n - 1)
    throw ConfigError("delay_distance_matrix_serial: Q out of range");
  const Eigen::Index n_emb = n - Q + 1;
  DelayDistanceMatrix out;
  out.Q = Q;
  out.d2.resize(n_emb, n_emb);
  out.d2.diagonal().setZero();
  const Eigen::MatrixXd& f = traj.samples;
  const double inv_q = 1.0 / Q;
  for (Eigen::Index c = 1; c < n_emb; ++c) {
    std::vector<double> base(static_cast<std::size_t>(n - c));
    for (Eigen::Index i = 0; i < n - c; ++i)
      base[i] = (f.row(i) - f.row(i + c)).squaredNorm();
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

Eigen::MatrixXd gaussian_kernel_serial(const Eigen::MatrixXd& d2, double epsilon) {
  if (!(epsilon > 0.0))
    throw ConfigError("gaussian_kernel_serial: epsilon must be > 0");
  Eigen::MatrixXd k(d2.rows(), d2.cols());
  for (Eigen::Index j = 0; j < d2.cols(); ++j) {
    for (Eigen::Index i = 0; i < d2.rows(); ++i)
      k(i, j) = std::exp(-d2(i, j) / epsilon);
    if (j < d2.rows()) k(j, j) = 1.0;
  }
  return k;
}

double kernel_sum_serial(const Eigen::MatrixXd& d2, double epsilon) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < d2.cols(); ++j)
    for (Eigen::Index i = 0; i < d2.rows(); ++i)
      s += std::exp(-d2(i, j) / epsilon);
  return s / static_cast<double>(d2.rows() * d2.cols());
}

void normalize_vectors_serial(const Eigen::MatrixXd& kernel,
                              Eigen::VectorXd& rho, Eigen::VectorXd& sigma) {
  const Eigen::Index n = kernel.rows();
  rho.resize(n);
  sigma.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += kernel(i, j);
    rho(i) = s / n;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += kernel(i, j) / rho(j);
    sigma(i) = s / n;
  }
}

Eigen::MatrixXd row_stochastic_matrix(const Eigen::MatrixXd& kernel,
                                      const Eigen::VectorXd& rho,
                                      const Eigen::VectorXd& sigma) {
  const Eigen::Index n = kernel.rows();
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p(i, j) = kernel(i, j) / (sigma(i) * rho(j)) / n;
  return p;
}

}  // namespace koopman::ref
