#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "koopman/dynamics.hpp"

using namespace koopman;

namespace {

Eigen::Vector3d origin3() { return Eigen::Vector3d::Zero(); }

std::string temp_file(const std::string& name) {
  return std::string("/tmp/koopman_dyn_") + name;
}

}  // namespace

TEST_CASE("fayad density: empty series gives unit density") {
  const Eigen::Vector3d nu(std::sqrt(2.0), std::sqrt(10.0), 1.0);
  CHECK(fayad_density(origin3(), 0) == 1.0);
  const Eigen::Vector3d v = fayad_velocity(origin3(), nu, 0);
  CHECK(v.isApprox(nu, 1e-15));
}

TEST_CASE("fayad density: one-term series at the origin") {
  // k = 1 term: (e^-1 / 1) * cos(0) * D_1(0), D_1(0) = 3.
  const double expected = 1.0 + 3.0 * std::exp(-1.0);
  CHECK(fayad_density(origin3(), 1) == doctest::Approx(expected).epsilon(1e-15));
  const Eigen::Vector3d ones = Eigen::Vector3d::Ones();
  const Eigen::Vector3d v = fayad_velocity(origin3(), ones, 1);
  CHECK(v.isApprox(ones / expected, 1e-15));
}

TEST_CASE("fayad density: truncation tail below 1e-12") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Vector3d p(angle(rng), angle(rng), angle(rng));
    const double a = fayad_density(p, 32);
    const double b = fayad_density(p, 64);
    CHECK(std::abs(a - b) < 1e-12);
  }
}

TEST_CASE("fayad density stays positive everywhere sampled") {
  // The alternating series dips lowest near z = 0, x + y = pi.
  double min_phi = 1e9;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      const double s = kTwoPi * i / 64, z = kTwoPi * j / 64;
      Eigen::Vector3d p(s, 0.0, z);
      min_phi = std::min(min_phi, fayad_density(p, 32));
    }
  CHECK(min_phi > 0.0);
  CHECK(min_phi < 0.2);  // the genuine minimum is about 0.148
  CHECK(min_phi > 0.1);
}

TEST_CASE("l63 velocity fixed points and direct substitution") {
  CHECK(l63_velocity(origin3(), 10.0, 28.0, 8.0 / 3.0).norm() == 0.0);

  const Eigen::Vector3d v = l63_velocity({1.0, 1.0, 1.0}, 10.0, 28.0, 8.0 / 3.0);
  CHECK(v(0) == doctest::Approx(0.0));
  CHECK(v(1) == doctest::Approx(26.0));
  CHECK(v(2) == doctest::Approx(1.0 - 8.0 / 3.0));

  const double beta = 8.0 / 3.0, rho = 28.0;
  const double c = -std::sqrt(beta * (rho - 1.0));
  const Eigen::Vector3d fp(c, c, rho - 1.0);
  CHECK(l63_velocity(fp, 10.0, rho, beta).norm() < 1e-12);
}

TEST_CASE("rotation state is exact") {
  CHECK(rotation_state(0.0, 1.0, kTwoPi) == 0.0);
  CHECK(rotation_state(1.0, 1.0, 0.0) == 1.0);
  CHECK(rotation_state(0.0, 1.0, kTwoPi / 4.0) == kTwoPi / 4.0);

  // No integration error: identical to the wrapped linear phase.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double a0 = u(rng), w = 0.1 + u(rng), t = u(rng);
    const double direct = std::fmod(a0 + w * t, kTwoPi);
    CHECK(rotation_state(a0, w, t) == wrap_2pi(direct));
  }
}

TEST_CASE("observation maps") {
  SystemSpec torus;
  torus.kind = SystemKind::fayad_torus_product;
  Eigen::VectorXd s4 = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd f = observe(torus, s4);
  CHECK(f(0) == 0.0);
  CHECK(f(1) == 1.0);
  CHECK(f(2) == 0.0);

  SystemSpec lp;
  lp.kind = SystemKind::l63_product;
  f = observe(lp, s4);
  CHECK(f(0) == 0.0);
  CHECK(f(1) == 1.0);
  CHECK(f(2) == 1.0);

  SystemSpec pure;
  pure.kind = SystemKind::l63_pure;
  Eigen::VectorXd s3(3);
  s3 << 1.0, 2.0, 3.0;
  CHECK(observe(pure, s3).isApprox(s3));

  // Deterministic and stateless.
  SystemSpec rot;
  rot.kind = SystemKind::circle_rotation;
  Eigen::VectorXd a(1);
  a << 0.3;
  CHECK(observe(rot, a) == observe(rot, a));
}

TEST_CASE("circle rotation trajectory is analytic") {
  SystemSpec rot;
  rot.kind = SystemKind::circle_rotation;
  Eigen::VectorXd a0(1);
  a0 << 0.0;
  const auto traj = integrate_trajectory(rot, a0, 0.01, 3, 0.0);
  REQUIRE(traj.n() == 3);
  REQUIRE(traj.dim() == 2);
  for (int i = 0; i < 3; ++i) {
    const double alpha = 0.01 * i;
    CHECK(traj.samples(i, 0) == std::sin(alpha));
    CHECK(traj.samples(i, 1) == std::cos(alpha));
  }
}

TEST_CASE("unreparameterized torus flow follows the linear orbit") {
  SystemSpec spec;
  spec.kind = SystemKind::fayad_torus_product;
  spec.fayad_kmax = 0;  // phi == 1: constant vector field, RK4 exact
  Eigen::VectorXd x0(4);
  x0 << 0.3, 1.1, 2.9, 0.0;
  const auto traj = integrate_trajectory(spec, x0, 0.05, 100, 0.0);
  for (int i = 0; i < 100; ++i) {
    const double t = 0.05 * i;
    Eigen::Vector3d lin;
    for (int c = 0; c < 3; ++c) lin(c) = wrap_2pi(x0(c) + spec.nu(c) * t);
    const double alpha = rotation_state(0.0, 1.0, t);
    Eigen::Vector4d state(lin(0), lin(1), lin(2), alpha);
    Eigen::VectorXd expected = observe(spec, state);
    CHECK((traj.samples.row(i).transpose() - expected).norm() < 1e-11);
  }
}

TEST_CASE("fixed-step integration matches a step-halving reference") {
  SystemSpec spec;
  spec.kind = SystemKind::l63_pure;
  Eigen::VectorXd x0(3);
  x0 << 1.0, 2.0, 3.0;
  // 10 time units at the sampling interval of the experiments.
  const auto traj = integrate_trajectory(spec, x0, 0.01, 1001, 0.0);
  const auto ref = integrate_trajectory(spec, x0, 0.01 / 32, 32000 + 1, 0.0);
  double scale = 0.0, worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    scale = std::max(scale, ref.samples.row(32 * i).norm());
    worst =
        std::max(worst, (traj.samples.row(i) - ref.samples.row(32 * i)).norm());
  }
  CHECK(worst / scale < 1e-6);
}

TEST_CASE("integrator error drops by a fourth-order factor when halving") {
  SystemSpec spec;
  spec.kind = SystemKind::l63_pure;
  Eigen::VectorXd x0(3);
  x0 << -3.0, 4.0, 15.0;
  // One time unit; substep sizes h, h/2 against an h/4 reference.
  const auto th = integrate_trajectory(spec, x0, 1e-3, 1001, 0.0);
  const auto th2 = integrate_trajectory(spec, x0, 5e-4, 2001, 0.0);
  const auto th4 = integrate_trajectory(spec, x0, 2.5e-4, 4001, 0.0);
  double eh = 0.0, eh2 = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    eh = std::max(eh, (th.samples.row(i) - th4.samples.row(4 * i)).norm());
    eh2 = std::max(eh2, (th2.samples.row(2 * i) - th4.samples.row(4 * i)).norm());
  }
  const double ratio = eh / eh2;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("spinup changes the first emitted row") {
  SystemSpec spec;
  spec.kind = SystemKind::l63_pure;
  Eigen::VectorXd x0(3);
  x0 << 1.0, 1.0, 20.0;
  const auto a = integrate_trajectory(spec, x0, 0.01, 2, 0.0);
  const auto b = integrate_trajectory(spec, x0, 0.01, 2, 10.0);
  CHECK((a.samples.row(0) - b.samples.row(0)).norm() > 1e-3);
}

TEST_CASE("generation is deterministic for a fixed seed") {
  SystemSpec spec;
  spec.kind = SystemKind::fayad_torus_product;
  const Eigen::VectorXd x0 = default_initial_state(spec, 11);
  const Eigen::VectorXd x0b = default_initial_state(spec, 11);
  CHECK(x0 == x0b);
  const auto a = integrate_trajectory(spec, x0, 0.02, 50, 0.0);
  const auto b = integrate_trajectory(spec, x0, 0.02, 50, 0.0);
  CHECK(a.samples == b.samples);
  CHECK(default_initial_state(spec, 12) != x0);
}

TEST_CASE("trajectory csv round-trips bit-exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ObservedTrajectory traj;
  traj.dt = 0.01;
  traj.samples.resize(17, 3);
  for (Eigen::Index i = 0; i < traj.samples.size(); ++i)
    traj.samples.data()[i] = std::pow(u(rng), 9) * std::exp(40.0 * u(rng));
  traj.samples(0, 0) = 1e-308;
  traj.samples(1, 1) = -0.0;

  const std::string path = temp_file("roundtrip.csv");
  save_trajectory(traj, path, false);
  const auto back = load_trajectory(path, 0.01);
  REQUIRE(back.samples.rows() == traj.samples.rows());
  REQUIRE(back.samples.cols() == traj.samples.cols());
  for (Eigen::Index i = 0; i < traj.samples.size(); ++i) {
    const double a = traj.samples.data()[i], b = back.samples.data()[i];
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  }
  std::remove(path.c_str());
}

TEST_CASE("csv loader validates shape and content") {
  const std::string ok = temp_file("ok.csv");
  {
    std::ofstream out(ok);
    out << "0.5,1.5\n2.5,3.5\n4.5,5.5\n";
  }
  const auto traj = load_trajectory(ok, 0.1);
  CHECK(traj.n() == 3);
  CHECK(traj.dim() == 2);
  CHECK(traj.origin.substr(0, 8) == "external");
  std::remove(ok.c_str());

  const std::string nan_file = temp_file("nan.csv");
  {
    std::ofstream out(nan_file);
    out << "1,2\n3,NaN\n5,6\n";
  }
  CHECK_THROWS_WITH_AS(load_trajectory(nan_file, 0.1),
                       doctest::Contains("line 2"), IoError);
  std::remove(nan_file.c_str());

  const std::string ragged = temp_file("ragged.csv");
  {
    std::ofstream out(ragged);
    out << "1,2\n3,4,5\n";
  }
  CHECK_THROWS_WITH_AS(load_trajectory(ragged, 0.1),
                       doctest::Contains("inconsistent width"), IoError);
  std::remove(ragged.c_str());

  const std::string garbage = temp_file("garbage.csv");
  {
    std::ofstream out(garbage);
    out << "1,2\nfoo,4\n";
  }
  CHECK_THROWS_WITH_AS(load_trajectory(garbage, 0.1),
                       doctest::Contains("line 2"), IoError);
  std::remove(garbage.c_str());
}

TEST_CASE("header flag controls the first csv row") {
  ObservedTrajectory traj;
  traj.dt = 1.0;
  traj.samples = Eigen::MatrixXd::Constant(2, 2, 0.25);
  const std::string path = temp_file("header.csv");
  save_trajectory(traj, path, true);
  {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "f0,f1");
  }
  const auto back = load_trajectory(path, 1.0, /*skip_header=*/true);
  CHECK(back.samples == traj.samples);
  std::remove(path.c_str());
}

TEST_CASE("configuration guards") {
  SystemSpec spec;
  spec.kind = SystemKind::l63_pure;
  Eigen::VectorXd x0(3);
  x0 << 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(integrate_trajectory(spec, x0, 0.0, 10, 0.0), ConfigError);
  CHECK_THROWS_AS(integrate_trajectory(spec, x0, 0.01, 1, 0.0), ConfigError);
  CHECK_THROWS_AS(integrate_trajectory(spec, x0, 0.01, 10, -1.0), ConfigError);

  SystemSpec bad;
  bad.kind = SystemKind::l63_product;
  bad.omega = 0.0;
  bad.l63_beta = -1.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("omega"), ConfigError);
}
