#include "koopman/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>

#include "koopman/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace koopman {

double shift_commutator_norm(const Eigen::MatrixXd& kernel) {
  const Eigen::Index n = kernel.rows();
  if (n < 2) throw ConfigError("shift_commutator_norm: matrix too small");
  double worst = 0.0;
  const Eigen::Index last = n - 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : worst)
#endif
  for (Eigen::Index j = 0; j < last; ++j)
    for (Eigen::Index i = 0; i < last; ++i)
      worst = std::max(worst, std::abs(kernel(i + 1, j + 1) - kernel(i, j)));
  return worst;
}

double offdiag_dispersion_cv(const Eigen::MatrixXd& d2, int Q) {
  const Eigen::Index n = d2.rows();
  double sum = 0.0, sum2 = 0.0;
  std::int64_t count = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : sum, sum2, count)
#endif
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i + Q < j; ++i) {
      const double v = d2(i, j);
      sum += v;
      sum2 += v * v;
      ++count;
    }
  }
  if (count < 2) throw ConfigError("offdiag_dispersion_cv: too few pairs");
  const double mean = sum / count;
  const double var = std::max(0.0, sum2 / count - mean * mean);
  if (!(mean > 0.0)) return 0.0;
  return std::sqrt(var) / mean;
}

Eigen::VectorXd degeneracy_gaps(const Eigen::VectorXd& lambdas, int pairs) {
  if (2 * pairs >= lambdas.size())
    throw ConfigError("degeneracy_gaps: not enough eigenvalues");
  Eigen::VectorXd out(pairs);
  for (int k = 1; k <= pairs; ++k) {
    const double a = lambdas(2 * k - 1), b = lambdas(2 * k);
    out(k - 1) = std::abs(a - b) / std::abs(a);
  }
  return out;
}

double skew_symmetry_residual(const Eigen::MatrixXd& v) {
  const double denom = v.norm();
  if (!(denom > 0.0)) return 0.0;
  return (v + v.transpose()).norm() / denom;
}

double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::VectorXd& w) {
  if (a.rows() != w.size() || b.rows() != w.size())
    throw ConfigError("max_principal_angle: row mismatch");
  const double inv_n = 1.0 / static_cast<double>(w.size());
  auto orthonormalize = [&](const Eigen::MatrixXd& m) {
    // Gram-Schmidt in the weighted inner product.
    Eigen::MatrixXd q = m;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double proj = q.col(i).cwiseProduct(w).dot(q.col(j)) * inv_n;
        q.col(j) -= proj * q.col(i);
      }
      const double nrm =
          std::sqrt(q.col(j).cwiseProduct(w).dot(q.col(j)) * inv_n);
      if (!(nrm > 0.0))
        throw NumericError("max_principal_angle: rank-deficient block");
      q.col(j) /= nrm;
    }
    return q;
  };
  const Eigen::MatrixXd qa = orthonormalize(a);
  const Eigen::MatrixXd qb = orthonormalize(b);
  Eigen::MatrixXd cross =
      qa.transpose() * w.asDiagonal() * qb * inv_n;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  const double smin =
      std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smin);
}

int crosscorr_peak_lag(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       int max_lag) {
  const Eigen::Index n = a.size();
  if (b.size() != n) throw ConfigError("crosscorr_peak_lag: length mismatch");
  if (max_lag < 1 || max_lag >= n)
    throw ConfigError("crosscorr_peak_lag: bad max_lag");
  const Eigen::VectorXd ac = a.array() - a.mean();
  const Eigen::VectorXd bc = b.array() - b.mean();
  int best = 1;
  double best_val = -1.0;
  for (int lag = 1; lag <= max_lag; ++lag) {
    const Eigen::Index len = n - lag;
    const double r =
        std::abs(ac.segment(lag, len).dot(bc.head(len))) / len;
    if (r > best_val) {
      best_val = r;
      best = lag;
    }
  }
  return best;
}

int dft_peak_bin(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  if (n < 4) throw ConfigError("dft_peak_bin: series too short");
  const Eigen::VectorXd x = series.array() - series.mean();
  int best = 1;
  double best_mag = -1.0;
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    const double step = -kTwoPi * k / n;
    for (Eigen::Index t = 0; t < n; ++t)
      acc += x(t) * std::polar(1.0, step * t);
    const double mag = std::abs(acc);
    if (mag > best_mag) {
      best_mag = mag;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace koopman
