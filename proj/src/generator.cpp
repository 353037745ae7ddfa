#include "koopman/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace koopman {

FdOrder fd_order_from_string(const std::string& name) {
  if (name == "first_forward") return FdOrder::first_forward;
  if (name == "second_central") return FdOrder::second_central;
  throw ConfigError("unknown finite-difference scheme: " + name);
}

std::string to_string(FdOrder order) {
  return order == FdOrder::first_forward ? "first_forward" : "second_central";
}

Eigen::VectorXd fd_apply(const Eigen::VectorXd& f, const FDScheme& scheme) {
  const Eigen::Index n = f.size();
  if (n < 3) throw ConfigError("fd_apply: need at least 3 samples");
  if (!(scheme.dt > 0.0)) throw ConfigError("fd_apply: dt must be > 0");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (scheme.order == FdOrder::first_forward) {
    out.head(n - 1) = (f.tail(n - 1) - f.head(n - 1)) / scheme.dt;
  } else {
    out.segment(1, n - 2) =
        (f.tail(n - 2) - f.head(n - 2)) / (2.0 * scheme.dt);
  }
  return out;
}

Eigen::MatrixXd generator_matrix(const MarkovSpectrum& spectrum,
                                 const FDScheme& scheme, int m,
                                 bool antisymmetrize, BoundaryMode boundary,
                                 bool include_constant) {
  if (m < 1) throw ConfigError("generator_matrix: m must be >= 1");
  if (m > spectrum.m())
    throw ConfigError("generator_matrix: m exceeds the available basis");
  const Eigen::Index n = spectrum.n();
  const int j0 = include_constant ? 0 : 1;
  const int nb = include_constant ? m + 1 : m;

  Eigen::MatrixXd fd_phi(n, nb);
  for (int b = 0; b < nb; ++b)
    fd_phi.col(b) = fd_apply(spectrum.phis.col(j0 + b), scheme);

  Eigen::Index lo = 0, len = n;
  if (boundary == BoundaryMode::trim) {
    // Drop the samples whose stencil is incomplete.
    lo = scheme.order == FdOrder::second_central ? 1 : 0;
    len = scheme.order == FdOrder::second_central ? n - 2 : n - 1;
  }

  Eigen::MatrixXd weighted =
      spectrum.phis.middleCols(j0, nb).middleRows(lo, len);
  weighted.array().colwise() *= spectrum.weights.segment(lo, len).array();
  Eigen::MatrixXd v =
      weighted.transpose() * fd_phi.middleRows(lo, len) / static_cast<double>(len);
  if (antisymmetrize) v = 0.5 * (v - v.transpose()).eval();
  return v;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_galerkin(
    const Eigen::MatrixXd& v_mat, const Eigen::VectorXd& etas, double theta) {
  const Eigen::Index m = v_mat.rows();
  if (v_mat.cols() != m) throw ConfigError("build_galerkin: V must be square");
  if (etas.size() != m)
    throw ConfigError("build_galerkin: eta vector length mismatch");
  if (theta < 0.0) throw ConfigError("build_galerkin: theta must be >= 0");
  for (Eigen::Index j = 0; j < m; ++j)
    if (!(etas(j) > 0.0) || !std::isfinite(etas(j))) {
      std::ostringstream msg;
      msg << "build_galerkin: eta_" << j + 1 << " = " << etas(j)
          << " is not strictly positive and finite";
      throw NumericError(msg.str());
    }
  Eigen::MatrixXd a = v_mat * etas.cwiseInverse().asDiagonal();
  a.diagonal().array() -= theta;
  Eigen::MatrixXd b = etas.cwiseInverse().asDiagonal();
  return {std::move(a), std::move(b)};
}

namespace {

// Parlett-Reinsch style diagonal balancing with power-of-two factors
// (exact in floating point); improves the conditioning of B^{-1}A when the
// eta spread is large.
Eigen::VectorXd balance_in_place(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  bool changed = true;
  int sweeps = 0;
  while (changed && sweeps++ < 20) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
      double c = m.col(i).cwiseAbs().sum() - std::abs(m(i, i));
      if (r == 0.0 || c == 0.0) continue;
      double f = 1.0;
      const double s = r + c;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (c + r < 0.95 * s) {
        scale(i) *= f;
        m.row(i) /= f;
        m.col(i) *= f;
        changed = true;
      }
    }
  }
  return scale;
}

}  // namespace

std::vector<GeneratorEigenpair> solve_regularized(const Eigen::MatrixXd& a_mat,
                                                  const Eigen::MatrixXd& b_mat) {
  const Eigen::Index m = a_mat.rows();
  if (b_mat.rows() != m || b_mat.cols() != m)
    throw ConfigError("solve_regularized: A and B shapes differ");
  for (Eigen::Index i = 0; i < m; ++i)
    if (!(b_mat(i, i) > 0.0))
      throw NumericError("solve_regularized: B must have a positive diagonal");

  Eigen::MatrixXd g = b_mat.diagonal().cwiseInverse().asDiagonal() * a_mat;
  const Eigen::VectorXd scale = balance_in_place(g);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(g);
  if (solver.info() != Eigen::Success)
    throw NumericError("solve_regularized: eigensolver failed");

  std::vector<GeneratorEigenpair> out(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    out[j].gamma = solver.eigenvalues()(j);
    Eigen::VectorXcd c = solver.eigenvectors().col(j);
    c = c.cwiseProduct(scale.cast<std::complex<double>>());
    // Deterministic normalization: unit norm, largest-magnitude component
    // rotated to the positive real axis.
    Eigen::Index imax = 0;
    c.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> piv = c(imax);
    if (std::abs(piv) > 0.0) c *= std::conj(piv) / std::abs(piv);
    c.normalize();
    out[j].coeffs = c;
  }
  return out;
}

GeneratorSolution dirichlet_order(const std::vector<GeneratorEigenpair>& pairs,
                                  const Eigen::VectorXd& etas, double theta) {
  if (pairs.empty()) throw ConfigError("dirichlet_order: no solutions");
  const Eigen::Index m = pairs[0].coeffs.size();
  if (etas.size() != m)
    throw ConfigError("dirichlet_order: eta vector length mismatch");

  const Eigen::Index count = static_cast<Eigen::Index>(pairs.size());
  Eigen::VectorXd energies(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    // Coefficients back in the phi basis: b_k = c_k / eta_k.
    const Eigen::VectorXcd& c = pairs[j].coeffs;
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double b2 = std::norm(c(k) / etas(k));
      num += etas(k) * b2;
      den += b2;
    }
    energies(j) = den > 0.0 ? num / den : 0.0;
  }

  std::vector<Eigen::Index> idx(count);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return energies(a) < energies(b);
  });

  GeneratorSolution out;
  out.theta = theta;
  out.gammas.resize(count);
  out.coeffs.resize(m, count);
  out.energies.resize(count);
  out.dirichlet_residuals.resize(count);
  for (Eigen::Index r = 0; r < count; ++r) {
    const Eigen::Index j = idx[r];
    out.gammas(r) = pairs[j].gamma;
    out.coeffs.col(r) = pairs[j].coeffs;
    out.energies(r) = energies(j);
    out.dirichlet_residuals(r) =
        std::abs(pairs[j].gamma.real() + theta * energies(j));
  }
  return out;
}

GeneratorSolution solve_generator(const MarkovSpectrum& spectrum,
                                  const FDScheme& scheme, int m, double theta,
                                  bool antisymmetrize, BoundaryMode boundary) {
  Eigen::MatrixXd v =
      generator_matrix(spectrum, scheme, m, antisymmetrize, boundary);
  const Eigen::VectorXd etas = spectrum.etas.segment(1, m);
  auto [a, b] = build_galerkin(v, etas, theta);
  GeneratorSolution out = dirichlet_order(solve_regularized(a, b), etas, theta);
  out.V_mat = std::move(v);
  out.A_mat = std::move(a);
  out.B_mat = std::move(b);
  return out;
}

}  // namespace koopman
