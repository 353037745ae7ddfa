#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "koopman/common.hpp"

namespace koopman {

enum class SystemKind {
  fayad_torus_product,
  l63_product,
  l63_pure,
  circle_rotation,
  external,
};

SystemKind system_kind_from_string(const std::string& name);
std::string to_string(SystemKind kind);

// Test-system parameters. Defaults are the values used throughout the
// experiments: nu = (sqrt 2, sqrt 10, 1), omega = 1, standard Lorenz
// coefficients, and a 32-term truncation of the torus density series.
struct SystemSpec {
  SystemKind kind = SystemKind::fayad_torus_product;
  Eigen::Vector3d nu{std::sqrt(2.0), std::sqrt(10.0), 1.0};
  double omega = 1.0;           // rotation rate, rad/time
  double l63_sigma = 10.0;
  double l63_rho = 28.0;
  double l63_beta = 8.0 / 3.0;
  int fayad_kmax = 32;

  int state_dim() const;
  int obs_dim() const;
  void validate() const;  // throws ConfigError listing every bad field
};

// Time-ordered observation samples F(x_n), one row per sample, taken at a
// fixed interval dt along a single orbit.
struct ObservedTrajectory {
  Eigen::MatrixXd samples;  // N x d
  double dt = 0.0;
  std::string origin;

  Eigen::Index n() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }
};

// Reparameterization density of the mixing torus flow, truncated at k_max.
double fayad_density(const Eigen::Vector3d& point, int k_max);

// Velocity nu / phi(point) of the reparameterized torus flow.
Eigen::Vector3d fayad_velocity(const Eigen::Vector3d& point,
                               const Eigen::Vector3d& nu, int k_max);

Eigen::Vector3d l63_velocity(const Eigen::Vector3d& p, double sigma,
                             double rho, double beta);

// Exact rotation state (alpha0 + omega*t) mod 2*pi.
double rotation_state(double alpha0, double omega, double t);

// Observation map F for the given system; state layout is
// (x, y, z[, alpha]) for product systems, (alpha) for the rotation.
Eigen::VectorXd observe(const SystemSpec& spec, const Eigen::VectorXd& state);

// Deterministic seed-derived initial state in the basin of the attractor.
Eigen::VectorXd default_initial_state(const SystemSpec& spec, std::uint64_t seed);

// Number of fixed-step RK4 substeps used per sampling interval.
int integration_substeps(double dt);

// Integrate the system from x0, discard the spinup segment, and return N
// observation rows at interval dt. The rotation coordinate is advanced
// analytically; continuous coordinates use fixed-step RK4.
ObservedTrajectory integrate_trajectory(const SystemSpec& spec,
                                        const Eigen::VectorXd& x0, double dt,
                                        Eigen::Index n_samples, double spinup);

// CSV ingest/export, one sample per row. Values are written with enough
// digits to round-trip bit-exactly.
ObservedTrajectory load_trajectory(const std::string& path, double dt,
                                   bool skip_header = false);
void save_trajectory(const ObservedTrajectory& traj, const std::string& path,
                     bool header = false);

}  // namespace koopman
