#include "koopman/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "koopman/csv.hpp"

namespace koopman {

double wrap_2pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "fayad_torus_product") return SystemKind::fayad_torus_product;
  if (name == "l63_product") return SystemKind::l63_product;
  if (name == "l63_pure") return SystemKind::l63_pure;
  if (name == "circle_rotation") return SystemKind::circle_rotation;
  if (name == "external") return SystemKind::external;
  throw ConfigError("unknown system kind: " + name);
}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::fayad_torus_product: return "fayad_torus_product";
    case SystemKind::l63_product: return "l63_product";
    case SystemKind::l63_pure: return "l63_pure";
    case SystemKind::circle_rotation: return "circle_rotation";
    case SystemKind::external: return "external";
  }
  throw ConfigError("invalid system kind enum value");
}

int SystemSpec::state_dim() const {
  switch (kind) {
    case SystemKind::fayad_torus_product:
    case SystemKind::l63_product: return 4;
    case SystemKind::l63_pure: return 3;
    case SystemKind::circle_rotation: return 1;
    case SystemKind::external: return 0;
  }
  return 0;
}

int SystemSpec::obs_dim() const {
  switch (kind) {
    case SystemKind::fayad_torus_product:
    case SystemKind::l63_product:
    case SystemKind::l63_pure: return 3;
    case SystemKind::circle_rotation: return 2;
    case SystemKind::external: return 0;
  }
  return 0;
}

void SystemSpec::validate() const {
  std::vector<std::string> bad;
  const bool product = kind == SystemKind::fayad_torus_product ||
                       kind == SystemKind::l63_product ||
                       kind == SystemKind::circle_rotation;
  if (product && !(omega > 0.0)) bad.push_back("omega (must be > 0)");
  if (kind == SystemKind::fayad_torus_product && fayad_kmax < 1)
    bad.push_back("fayad_kmax (must be >= 1)");
  if (kind == SystemKind::l63_product || kind == SystemKind::l63_pure) {
    if (!(l63_sigma > 0.0)) bad.push_back("l63_sigma (must be > 0)");
    if (!(l63_rho > 0.0)) bad.push_back("l63_rho (must be > 0)");
    if (!(l63_beta > 0.0)) bad.push_back("l63_beta (must be > 0)");
  }
  if (!bad.empty()) {
    std::string msg = "invalid system spec:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
}

double fayad_density(const Eigen::Vector3d& point, int k_max) {
  if (k_max < 0) throw ConfigError("fayad_density: k_max must be >= 0");
  const double s = point(0) + point(1);
  const double z = point(2);
  // phi = 1 + sum_k (e^-k / k) cos(k s) D_k(z), with the Dirichlet sum
  // D_k(z) = 1 + 2 sum_{l<=k} cos(l z). Both cosine families advance by
  // Chebyshev-style recurrences, so the whole series is O(k_max).
  const double cs = std::cos(s);
  const double cz = std::cos(z);
  double cks_prev = 1.0, cks = cs;   // cos(k s) at k = 0, 1
  double ckz_prev = 1.0, ckz = cz;   // cos(k z) at k = 0, 1
  double dirichlet = 1.0 + 2.0 * cz;
  double ek = 1.0;
  double phi = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    ek *= std::exp(-1.0);
    phi += ek / k * cks * dirichlet;
    const double cks_next = 2.0 * cs * cks - cks_prev;
    const double ckz_next = 2.0 * cz * ckz - ckz_prev;
    cks_prev = cks;
    cks = cks_next;
    ckz_prev = ckz;
    ckz = ckz_next;
    dirichlet += 2.0 * ckz;  // now D_{k+1}(z)
  }
  return phi;
}

Eigen::Vector3d fayad_velocity(const Eigen::Vector3d& point,
                               const Eigen::Vector3d& nu, int k_max) {
  const double phi = fayad_density(point, k_max);
  if (!(phi > 0.0)) {
    std::ostringstream msg;
    msg << "fayad_velocity: nonpositive density phi = " << phi
        << " (broken series truncation)";
    throw NumericError(msg.str());
  }
  return nu / phi;
}

Eigen::Vector3d l63_velocity(const Eigen::Vector3d& p, double sigma, double rho,
                             double beta) {
  return {sigma * (p(1) - p(0)), p(0) * (rho - p(2)) - p(1),
          p(0) * p(1) - beta * p(2)};
}

double rotation_state(double alpha0, double omega, double t) {
  return wrap_2pi(alpha0 + omega * t);
}

Eigen::VectorXd observe(const SystemSpec& spec, const Eigen::VectorXd& state) {
  switch (spec.kind) {
    case SystemKind::fayad_torus_product: {
      const double x = state(0), y = state(1), z = state(2), a = state(3);
      Eigen::VectorXd f(3);
      f << std::sin(a) + std::sin(x), std::cos(a) + std::sin(y),
          std::sin(2.0 * a) + std::sin(z);
      return f;
    }
    case SystemKind::l63_product: {
      const double x = state(0), y = state(1), z = state(2), a = state(3);
      Eigen::VectorXd f(3);
      f << std::sin(a + x), std::cos(2.0 * a + y), std::cos(a + z);
      return f;
    }
    case SystemKind::l63_pure:
      return state.head(3);
    case SystemKind::circle_rotation: {
      Eigen::VectorXd f(2);
      f << std::sin(state(0)), std::cos(state(0));
      return f;
    }
    case SystemKind::external:
      throw ConfigError("observe: external systems carry no observation map");
  }
  throw ConfigError("observe: invalid system kind");
}

Eigen::VectorXd default_initial_state(const SystemSpec& spec,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  switch (spec.kind) {
    case SystemKind::fayad_torus_product: {
      Eigen::VectorXd x(4);
      x << angle(rng), angle(rng), angle(rng), angle(rng);
      return x;
    }
    case SystemKind::l63_product: {
      Eigen::VectorXd x(4);
      x << 1.0 + unit(rng), 1.0 + unit(rng), 20.0 + 5.0 * unit(rng), angle(rng);
      return x;
    }
    case SystemKind::l63_pure: {
      Eigen::VectorXd x(3);
      x << 1.0 + unit(rng), 1.0 + unit(rng), 20.0 + 5.0 * unit(rng);
      return x;
    }
    case SystemKind::circle_rotation: {
      Eigen::VectorXd x(1);
      x << angle(rng);
      return x;
    }
    case SystemKind::external:
      throw ConfigError("default_initial_state: external system");
  }
  throw ConfigError("default_initial_state: invalid system kind");
}

int integration_substeps(double dt) {
  // Substep ceiling of 1.25e-3 time units keeps the fixed-step error well
  // below kernel-level noise even across chaotic stretching.
  return std::max(1, static_cast<int>(std::ceil(dt / 1.25e-3 - 1e-12)));
}

namespace {

// One RK4 step of the autonomous continuous subsystem.
template <typename Velocity>
Eigen::Vector3d rk4_step(const Eigen::Vector3d& x, double h, Velocity&& vel) {
  const Eigen::Vector3d k1 = vel(x);
  const Eigen::Vector3d k2 = vel(x + 0.5 * h * k1);
  const Eigen::Vector3d k3 = vel(x + 0.5 * h * k2);
  const Eigen::Vector3d k4 = vel(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_finite(const Eigen::Vector3d& x, Eigen::Index step) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "integrate_trajectory: non-finite state at step " << step;
    throw NumericError(msg.str());
  }
}

}  // namespace

ObservedTrajectory integrate_trajectory(const SystemSpec& spec,
                                        const Eigen::VectorXd& x0, double dt,
                                        Eigen::Index n_samples, double spinup) {
  if (!(dt > 0.0)) throw ConfigError("integrate_trajectory: dt must be > 0");
  if (n_samples < 2) throw ConfigError("integrate_trajectory: N must be >= 2");
  if (spinup < 0.0) throw ConfigError("integrate_trajectory: spinup must be >= 0");
  if (x0.size() != spec.state_dim())
    throw ConfigError("integrate_trajectory: initial state has wrong dimension");

  const int n_sub = integration_substeps(dt);
  const double h = dt / n_sub;
  const Eigen::Index n_spin =
      spinup > 0.0 ? static_cast<Eigen::Index>(std::llround(spinup / dt)) : 0;

  const bool has_rotation = spec.kind == SystemKind::fayad_torus_product ||
                            spec.kind == SystemKind::l63_product ||
                            spec.kind == SystemKind::circle_rotation;
  const bool has_continuous = spec.kind != SystemKind::circle_rotation;
  const bool torus = spec.kind == SystemKind::fayad_torus_product;

  auto velocity = [&](const Eigen::Vector3d& p) -> Eigen::Vector3d {
    if (torus) return fayad_velocity(p, spec.nu, spec.fayad_kmax);
    return l63_velocity(p, spec.l63_sigma, spec.l63_rho, spec.l63_beta);
  };

  Eigen::Vector3d xc = Eigen::Vector3d::Zero();
  if (has_continuous) xc = x0.head(3);
  const double alpha0 = has_rotation ? x0(x0.size() - 1) : 0.0;

  auto advance = [&](Eigen::Index step_index) {
    for (int s = 0; s < n_sub; ++s) xc = rk4_step(xc, h, velocity);
    if (torus) xc = xc.unaryExpr([](double a) { return wrap_2pi(a); });
    check_finite(xc, step_index);
  };

  for (Eigen::Index i = 0; i < n_spin; ++i)
    if (has_continuous) advance(i);

  ObservedTrajectory traj;
  traj.dt = dt;
  traj.origin = "generated:" + to_string(spec.kind);
  traj.samples.resize(n_samples, spec.obs_dim());

  Eigen::VectorXd state(spec.state_dim());
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    if (i > 0 && has_continuous) advance(n_spin + i);
    if (has_continuous) state.head(3) = xc;
    if (has_rotation) {
      const double t = static_cast<double>(n_spin + i) * dt;
      state(state.size() - 1) = rotation_state(alpha0, spec.omega, t);
    }
    traj.samples.row(i) = observe(spec, state);
  }
  return traj;
}

ObservedTrajectory load_trajectory(const std::string& path, double dt,
                                   bool skip_header) {
  if (!(dt > 0.0)) throw ConfigError("load_trajectory: dt must be > 0");
  ObservedTrajectory traj;
  traj.samples = read_numeric_csv(path, skip_header);
  if (traj.samples.rows() < 2)
    throw IoError("load_trajectory: need at least 2 samples in " + path);
  traj.dt = dt;
  traj.origin = "external:" + path;
  return traj;
}

void save_trajectory(const ObservedTrajectory& traj, const std::string& path,
                     bool header) {
  std::vector<std::string> names;
  if (header) {
    for (Eigen::Index j = 0; j < traj.dim(); ++j)
      names.push_back("f" + std::to_string(j));
  }
  write_numeric_csv(path, traj.samples, header ? &names : nullptr);
}

}  // namespace koopman
