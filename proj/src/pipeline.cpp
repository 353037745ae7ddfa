#include "koopman/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "koopman/csv.hpp"
#include "koopman/diagnostics.hpp"
#include "koopman/matrix_io.hpp"

namespace koopman {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string hex64(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

json system_to_json(const SystemSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["nu"] = {s.nu(0), s.nu(1), s.nu(2)};
  j["omega"] = s.omega;
  j["l63_sigma"] = s.l63_sigma;
  j["l63_rho"] = s.l63_rho;
  j["l63_beta"] = s.l63_beta;
  j["fayad_kmax"] = s.fayad_kmax;
  return j;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["system"] = system_to_json(c.system);
  j["data_path"] = c.data_path;
  j["N"] = c.N;
  j["dt"] = c.dt;
  j["spinup"] = c.spinup;
  j["spinup_resolved"] = c.resolved_spinup();
  j["seed"] = c.seed;
  j["Q"] = c.q_list;
  if (c.epsilon > 0.0)
    j["epsilon"] = c.epsilon;
  else
    j["epsilon"] = "auto";
  j["knn"] = c.k_nn;
  j["m"] = c.m;
  j["theta"] = c.theta;
  j["scheme"] = to_string(c.scheme);
  j["antisymmetrize"] = c.antisymmetrize;
  j["csv_header"] = c.csv_header;
  j["cache"] = c.use_cache;
  j["outdir"] = c.outdir;
  return j;
}

}  // namespace

double PipelineConfig::resolved_spinup() const {
  if (spinup >= 0.0) return spinup;
  if (system.kind == SystemKind::l63_product ||
      system.kind == SystemKind::l63_pure)
    return 100.0;
  return 0.0;
}

void PipelineConfig::validate() const {
  std::vector<std::string> bad;
  if (N < 2) bad.push_back("N (need >= 2)");
  if (!(dt > 0.0)) bad.push_back("dt (need > 0)");
  if (m < 1) bad.push_back("m (need >= 1)");
  if (theta < 0.0) bad.push_back("theta (need >= 0)");
  if (k_nn < 0) bad.push_back("knn (need >= 0)");
  if (q_list.empty()) bad.push_back("Q (need a nonempty list)");
  for (int q : q_list)
    if (q < 1 || q > N - 1) {
      bad.push_back("Q (each entry must lie in [1, N-1])");
      break;
    }
  for (int q : q_list)
    if (k_nn > 0 && k_nn >= N - q + 1) {
      bad.push_back("knn (must be < N - Q + 1)");
      break;
    }
  if (outdir.empty()) bad.push_back("outdir (empty)");
  if (system.kind == SystemKind::external && data_path.empty())
    bad.push_back("data_path (required for external data)");
  if (system.kind != SystemKind::external) {
    try {
      system.validate();
    } catch (const ConfigError& e) {
      bad.push_back(e.what());
    }
  }
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
}

PipelineConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }

  static const std::vector<std::string> known = {
      "system", "data_path", "N", "dt", "spinup", "seed", "Q", "epsilon",
      "knn", "m", "theta", "scheme", "antisymmetrize", "csv_header",
      "cache", "outdir", "nu", "omega", "l63_sigma", "l63_rho", "l63_beta",
      "fayad_kmax", "spinup_resolved"};
  std::vector<std::string> unknown;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      unknown.push_back(it.key());
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  PipelineConfig c;
  try {
    if (j.contains("system")) {
      if (j["system"].is_object()) {
        const json& s = j["system"];
        if (s.contains("kind"))
          c.system.kind = system_kind_from_string(s["kind"].get<std::string>());
        if (s.contains("nu")) {
          auto v = s["nu"].get<std::vector<double>>();
          if (v.size() != 3) throw ConfigError("nu must have 3 entries");
          c.system.nu = Eigen::Vector3d(v[0], v[1], v[2]);
        }
        if (s.contains("omega")) c.system.omega = s["omega"].get<double>();
        if (s.contains("l63_sigma")) c.system.l63_sigma = s["l63_sigma"].get<double>();
        if (s.contains("l63_rho")) c.system.l63_rho = s["l63_rho"].get<double>();
        if (s.contains("l63_beta")) c.system.l63_beta = s["l63_beta"].get<double>();
        if (s.contains("fayad_kmax")) c.system.fayad_kmax = s["fayad_kmax"].get<int>();
      } else {
        c.system.kind = system_kind_from_string(j["system"].get<std::string>());
      }
    }
    if (j.contains("nu")) {
      auto v = j["nu"].get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("nu must have 3 entries");
      c.system.nu = Eigen::Vector3d(v[0], v[1], v[2]);
    }
    if (j.contains("omega")) c.system.omega = j["omega"].get<double>();
    if (j.contains("l63_sigma")) c.system.l63_sigma = j["l63_sigma"].get<double>();
    if (j.contains("l63_rho")) c.system.l63_rho = j["l63_rho"].get<double>();
    if (j.contains("l63_beta")) c.system.l63_beta = j["l63_beta"].get<double>();
    if (j.contains("fayad_kmax")) c.system.fayad_kmax = j["fayad_kmax"].get<int>();
    if (j.contains("data_path")) c.data_path = j["data_path"].get<std::string>();
    if (j.contains("N")) c.N = j["N"].get<Eigen::Index>();
    if (j.contains("dt")) c.dt = j["dt"].get<double>();
    if (j.contains("spinup")) c.spinup = j["spinup"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("Q")) {
      if (j["Q"].is_array())
        c.q_list = j["Q"].get<std::vector<int>>();
      else
        c.q_list = {j["Q"].get<int>()};
    }
    if (j.contains("epsilon")) {
      if (j["epsilon"].is_string()) {
        if (j["epsilon"].get<std::string>() != "auto")
          throw ConfigError("epsilon must be a number or \"auto\"");
        c.epsilon = 0.0;
      } else {
        c.epsilon = j["epsilon"].get<double>();
      }
    }
    if (j.contains("knn")) c.k_nn = j["knn"].get<int>();
    if (j.contains("m")) c.m = j["m"].get<int>();
    if (j.contains("theta")) c.theta = j["theta"].get<double>();
    if (j.contains("scheme"))
      c.scheme = fd_order_from_string(j["scheme"].get<std::string>());
    if (j.contains("antisymmetrize"))
      c.antisymmetrize = j["antisymmetrize"].get<bool>();
    if (j.contains("csv_header")) c.csv_header = j["csv_header"].get<bool>();
    if (j.contains("cache")) c.use_cache = j["cache"].get<bool>();
    if (j.contains("outdir")) c.outdir = j["outdir"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value error: ") + e.what());
  }
  return c;
}

std::string config_to_json_string(const PipelineConfig& cfg) {
  return config_to_json(cfg).dump(2);
}

ObservedTrajectory obtain_trajectory(const PipelineConfig& cfg) {
  if (cfg.system.kind == SystemKind::external)
    return load_trajectory(cfg.data_path, cfg.dt, cfg.csv_header);
  const Eigen::VectorXd x0 = default_initial_state(cfg.system, cfg.seed);
  return integrate_trajectory(cfg.system, x0, cfg.dt, cfg.N,
                              cfg.resolved_spinup());
}

namespace {

std::uint64_t trajectory_hash(const ObservedTrajectory& traj) {
  std::uint64_t h = fnv1a(traj.samples.data(),
                          sizeof(double) * traj.samples.size());
  const Eigen::Index n = traj.n(), d = traj.dim();
  h = fnv1a(&n, sizeof n, h);
  h = fnv1a(&d, sizeof d, h);
  h = fnv1a(&traj.dt, sizeof traj.dt, h);
  return h;
}

// Spectrum cache blob.
constexpr char kSpecMagic[8] = {'K', 'O', 'O', 'P', 'S', 'P', 'C', '1'};

void write_spectrum_cache(const std::string& path, const MarkovSpectrum& s,
                          double eps, double stoch_residual) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const std::uint64_t n = s.n(), k = s.lambdas.size();
  out.write(kSpecMagic, 8);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&k), 8);
  out.write(reinterpret_cast<const char*>(&eps), 8);
  out.write(reinterpret_cast<const char*>(&stoch_residual), 8);
  auto put = [&](const double* p, std::uint64_t count) {
    out.write(reinterpret_cast<const char*>(p),
              static_cast<std::streamsize>(8 * count));
  };
  put(s.lambdas.data(), k);
  put(s.etas.data(), k);
  put(s.residuals.data(), k);
  put(s.weights.data(), n);
  put(s.phis.data(), n * k);
  if (!out) throw IoError("write failed for " + path);
}

std::optional<std::pair<MarkovSpectrum, std::pair<double, double>>>
read_spectrum_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kSpecMagic, 8) != 0) return std::nullopt;
  std::uint64_t n = 0, k = 0;
  double eps = 0.0, stoch = 0.0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&k), 8);
  in.read(reinterpret_cast<char*>(&eps), 8);
  in.read(reinterpret_cast<char*>(&stoch), 8);
  MarkovSpectrum s;
  s.lambdas.resize(k);
  s.etas.resize(k);
  s.residuals.resize(k);
  s.weights.resize(n);
  s.phis.resize(n, k);
  auto get = [&](double* p, std::uint64_t count) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(8 * count));
  };
  get(s.lambdas.data(), k);
  get(s.etas.data(), k);
  get(s.residuals.data(), k);
  get(s.weights.data(), n);
  get(s.phis.data(), n * k);
  if (!in) return std::nullopt;
  return std::make_pair(std::move(s), std::make_pair(eps, stoch));
}

// Orchestrates the stages for one configuration, reusing on-disk caches
// and recording a manifest entry per stage.
class PipelineRunner {
 public:
  explicit PipelineRunner(const PipelineConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    fs::create_directories(fs::path(cfg_.outdir) / "cache");
    manifest_path_ = (fs::path(cfg_.outdir) / "manifest.json").string();
    if (fs::exists(manifest_path_)) {
      std::ifstream in(manifest_path_);
      try {
        in >> manifest_;
      } catch (const json::exception&) {
        manifest_ = json::object();
      }
    }
    manifest_["version"] = version_string();
    manifest_["config"] = config_to_json(cfg_);
    if (!manifest_.contains("stages")) manifest_["stages"] = json::array();
  }

  void ensure_trajectory() {
    if (traj_.n() > 0) return;
    const double t0 = now_seconds();
    traj_ = obtain_trajectory(cfg_);
    hash_ = trajectory_hash(traj_);
    json rec;
    rec["name"] = "trajectory";
    rec["seconds"] = now_seconds() - t0;
    rec["hash"] = hex64(hash_);
    upsert_stage(rec, -1);
    manifest_["trajectory"] = {{"hash", hex64(hash_)},
                               {"n", traj_.n()},
                               {"d", traj_.dim()},
                               {"dt", traj_.dt},
                               {"origin", traj_.origin}};
  }

  void write_trajectory_files() {
    ensure_trajectory();
    const std::string csv = out_path("trajectory.csv");
    save_trajectory(traj_, csv, cfg_.csv_header);
    json meta;
    meta["dt"] = traj_.dt;
    meta["origin"] = traj_.origin;
    meta["n"] = traj_.n();
    meta["d"] = traj_.dim();
    meta["seed"] = cfg_.seed;
    meta["spinup"] = cfg_.resolved_spinup();
    meta["system"] = system_to_json(cfg_.system);
    std::ofstream out(out_path("trajectory.meta.json"));
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("cannot write trajectory metadata");
  }

  // Distance matrix for Q, from cache when possible.
  DelayDistanceMatrix ensure_distance(int Q, bool* cache_hit) {
    ensure_trajectory();
    const std::string path = cache_path("dist", Q);
    if (cfg_.use_cache && fs::exists(path)) {
      MatrixBundleFile f = read_matrix_bundle(path);
      if (f.kind == MatrixKind::squared_distance &&
          f.Q == static_cast<std::uint64_t>(Q)) {
        if (cache_hit) *cache_hit = true;
        std::cerr << "[kernel] cache hit: " << path << "\n";
        DelayDistanceMatrix d;
        d.Q = Q;
        d.d2 = std::move(f.matrix);
        return d;
      }
    }
    if (cache_hit) *cache_hit = false;
    DelayDistanceMatrix d = delay_distance_matrix(traj_, Q);
    if (cfg_.use_cache) {
      MatrixBundleFile f;
      f.kind = MatrixKind::squared_distance;
      f.Q = static_cast<std::uint64_t>(Q);
      f.epsilon = 0.0;
      f.matrix = d.d2;
      write_matrix_bundle(path, f);
    }
    return d;
  }

  double resolve_epsilon(int Q, const DelayDistanceMatrix& dist) {
    if (cfg_.epsilon > 0.0) return cfg_.epsilon;
    BandwidthDiagnostics diag = tune_bandwidth(dist, default_bandwidth_grid(dist));
    Eigen::MatrixXd table(diag.epsilons.size(), 3);
    table.col(0) = diag.epsilons;
    table.col(1) = diag.kernel_sums;
    table.col(2) = diag.slopes;
    write_csv_table(out_path("tune_Q" + std::to_string(Q) + ".csv"),
                    {"epsilon", "kernel_sum", "slope"}, table);
    if (diag.flat)
      std::cerr << "[kernel] warning: flat tuning diagnostics at Q=" << Q
                << "\n";
    return diag.epsilon_star;
  }

  void run_kernel_stage(int Q) {
    const double t0 = now_seconds();
    bool hit = false;
    DelayDistanceMatrix dist = ensure_distance(Q, &hit);
    const double eps = resolve_epsilon(Q, dist);
    eps_by_q_[Q] = eps;
    json rec;
    rec["name"] = "kernel";
    rec["seconds"] = now_seconds() - t0;
    rec["cache_hit"] = hit;
    rec["epsilon"] = eps;
    rec["n_emb"] = dist.n_emb();
    upsert_stage(rec, Q);
  }

  // Full spectrum for Q (kernel + normalize + eigendecompose), cached.
  MarkovSpectrum ensure_spectrum(int Q, int n_pairs, bool* cache_hit,
                                 double* stoch_out) {
    ensure_trajectory();
    if (!eps_by_q_.count(Q)) run_kernel_stage(Q);
    const double eps = eps_by_q_[Q];
    const std::string path = spectrum_cache_path(Q, eps, n_pairs);
    if (cfg_.use_cache && fs::exists(path)) {
      auto cached = read_spectrum_cache(path);
      if (cached && cached->first.m() == n_pairs &&
          cached->second.first == eps) {
        if (cache_hit) *cache_hit = true;
        if (stoch_out) *stoch_out = cached->second.second;
        std::cerr << "[spectrum] cache hit: " << path << "\n";
        return std::move(cached->first);
      }
    }
    if (cache_hit) *cache_hit = false;

    bool dist_hit = false;
    MarkovBundle markov;
    {
      DelayDistanceMatrix dist = ensure_distance(Q, &dist_hit);
      KernelBundle kernel = gaussian_kernel(dist, eps);
      dist.d2.resize(0, 0);
      if (cfg_.k_nn > 0) {
        KernelBundle sparse = sparsify_knn(kernel, cfg_.k_nn);
        kernel.dense.resize(0, 0);
        markov = normalize(std::move(sparse));
      } else {
        markov = normalize(std::move(kernel));
      }
    }
    if (stoch_out) *stoch_out = markov.stochasticity_residual;
    MarkovSpectrum spec = eigendecompose(markov, n_pairs);
    if (cfg_.use_cache)
      write_spectrum_cache(path, spec, eps, markov.stochasticity_residual);
    return spec;
  }

  void run_spectrum_stage(int Q) {
    const double t0 = now_seconds();
    bool hit = false;
    double stoch = 0.0;
    MarkovSpectrum spec = ensure_spectrum(Q, cfg_.m, &hit, &stoch);
    spectra_[Q] = spec;

    const int k = spec.m() + 1;
    Eigen::MatrixXd table(k, 3);
    for (int j = 0; j < k; ++j)
      table.row(j) << j, spec.lambdas(j), spec.etas(j);
    write_csv_table(out_path("eigenvalues_Q" + std::to_string(Q) + ".csv"),
                    {"j", "lambda", "eta"}, table);

    const Eigen::Index n = spec.n();
    Eigen::MatrixXd series(n, 2 + spec.m());
    std::vector<std::string> header{"n", "t"};
    for (Eigen::Index i = 0; i < n; ++i) {
      series(i, 0) = static_cast<double>(i);
      series(i, 1) = static_cast<double>(i) * traj_.dt;
    }
    for (int j = 1; j <= spec.m(); ++j) {
      series.col(1 + j) = spec.phis.col(j);
      header.push_back("phi_" + std::to_string(j));
    }
    write_csv_table(out_path("eigenfunctions_Q" + std::to_string(Q) + ".csv"),
                    header, series);

    json rec;
    rec["name"] = "spectrum";
    rec["seconds"] = now_seconds() - t0;
    rec["cache_hit"] = hit;
    rec["lambda_0"] = spec.lambdas(0);
    rec["lambda_1"] = spec.lambdas(1);
    rec["stochasticity_residual"] = stoch;
    rec["epsilon"] = eps_by_q_[Q];
    upsert_stage(rec, Q);
  }

  void run_galerkin_stage(int Q) {
    const double t0 = now_seconds();
    if (!spectra_.count(Q)) run_spectrum_stage(Q);
    const MarkovSpectrum& spec = spectra_[Q];
    if (cfg_.theta == 0.0)
      std::cerr << "[galerkin] warning: theta = 0 (no diffusion "
                   "regularization); eigenvalue problem may be ill-posed\n";
    const FDScheme scheme{cfg_.scheme, traj_.dt};
    GeneratorSolution sol = solve_generator(spec, scheme, cfg_.m, cfg_.theta,
                                            cfg_.antisymmetrize);

    // Diagnostic (m+1)x(m+1) generator matrix including the constant mode.
    Eigen::MatrixXd v_diag = generator_matrix(spec, scheme, cfg_.m,
                                              cfg_.antisymmetrize,
                                              BoundaryMode::zero_pad, true);
    std::vector<std::string> vh;
    for (int j = 0; j <= cfg_.m; ++j) vh.push_back("col_" + std::to_string(j));
    write_csv_table(out_path("generator_matrix_Q" + std::to_string(Q) + ".csv"),
                    vh, v_diag);
    write_csv_table(
        out_path("generator_matrix_abs_Q" + std::to_string(Q) + ".csv"), vh,
        v_diag.cwiseAbs());

    Eigen::MatrixXd gtab(sol.m(), 5);
    for (int j = 0; j < sol.m(); ++j)
      gtab.row(j) << j, sol.gammas(j).real(), sol.gammas(j).imag(),
          sol.energies(j), sol.dirichlet_residuals(j);
    write_csv_table(out_path("gamma_table_Q" + std::to_string(Q) + ".csv"),
                    {"rank", "re_gamma", "im_gamma", "energy", "residual"},
                    gtab);

    // Reconstructed eigenfunctions z_j = sum_k (c_jk / eta_k) phi_k for the
    // leading solutions by energy.
    const int n_z = std::min(10, sol.m());
    const Eigen::Index n = spec.n();
    Eigen::MatrixXd zser(n, 2 + 2 * n_z);
    std::vector<std::string> zh{"n", "t"};
    for (Eigen::Index i = 0; i < n; ++i) {
      zser(i, 0) = static_cast<double>(i);
      zser(i, 1) = static_cast<double>(i) * traj_.dt;
    }
    for (int j = 0; j < n_z; ++j) {
      Eigen::VectorXcd b = sol.coeffs.col(j).array() /
                           spec.etas.segment(1, cfg_.m).cast<std::complex<double>>().array();
      Eigen::VectorXcd z = spec.phis.middleCols(1, cfg_.m) * b;
      zser.col(2 + 2 * j) = z.real();
      zser.col(3 + 2 * j) = z.imag();
      zh.push_back("re_z" + std::to_string(j));
      zh.push_back("im_z" + std::to_string(j));
    }
    write_csv_table(out_path("z_series_Q" + std::to_string(Q) + ".csv"), zh,
                    zser);

    json rec;
    rec["name"] = "galerkin";
    rec["seconds"] = now_seconds() - t0;
    rec["theta"] = cfg_.theta;
    rec["scheme"] = to_string(cfg_.scheme);
    rec["skew_residual"] = skew_symmetry_residual(sol.V_mat);
    upsert_stage(rec, Q);
  }

  void write_manifest() {
    std::ofstream out(manifest_path_);
    out << manifest_.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + manifest_path_);
  }

  std::string out_path(const std::string& name) const {
    return (fs::path(cfg_.outdir) / name).string();
  }

  std::string cache_path(const std::string& kind, int Q) {
    ensure_trajectory();
    return (fs::path(cfg_.outdir) / "cache" /
            (kind + "_" + hex64(hash_) + "_Q" + std::to_string(Q) + ".bin"))
        .string();
  }

  std::string spectrum_cache_path(int Q, double eps, int n_pairs) {
    std::uint64_t h = fnv1a(&eps, sizeof eps, hash_);
    h = fnv1a(&cfg_.k_nn, sizeof cfg_.k_nn, h);
    h = fnv1a(&n_pairs, sizeof n_pairs, h);
    return (fs::path(cfg_.outdir) / "cache" /
            ("spec_" + hex64(h) + "_Q" + std::to_string(Q) + ".bin"))
        .string();
  }

  const PipelineConfig& config() const { return cfg_; }
  const ObservedTrajectory& trajectory() const { return traj_; }

 private:
  void upsert_stage(json rec, int Q) {
    if (Q >= 0) rec["Q"] = Q;
    for (auto& st : manifest_["stages"]) {
      if (st["name"] == rec["name"] &&
          ((Q < 0 && !st.contains("Q")) || (st.contains("Q") && st["Q"] == Q))) {
        st = rec;
        return;
      }
    }
    manifest_["stages"].push_back(rec);
  }

  PipelineConfig cfg_;
  ObservedTrajectory traj_;
  std::uint64_t hash_ = 0;
  std::string manifest_path_;
  json manifest_;
  std::map<int, double> eps_by_q_;
  std::map<int, MarkovSpectrum> spectra_;
};

}  // namespace

void cmd_generate(const PipelineConfig& cfg) {
  PipelineRunner runner(cfg);
  runner.write_trajectory_files();
  runner.write_manifest();
  std::cerr << "[generate] wrote " << runner.out_path("trajectory.csv") << "\n";
}

void cmd_kernel(const PipelineConfig& cfg) {
  PipelineRunner runner(cfg);
  for (int q : cfg.q_list) runner.run_kernel_stage(q);
  runner.write_manifest();
}

void cmd_spectrum(const PipelineConfig& cfg) {
  PipelineRunner runner(cfg);
  for (int q : cfg.q_list) runner.run_spectrum_stage(q);
  runner.write_manifest();
}

void cmd_galerkin(const PipelineConfig& cfg) {
  PipelineRunner runner(cfg);
  for (int q : cfg.q_list) runner.run_galerkin_stage(q);
  runner.write_manifest();
}

void cmd_pipeline(const PipelineConfig& cfg) {
  PipelineRunner runner(cfg);
  runner.write_trajectory_files();
  for (int q : cfg.q_list) {
    runner.run_kernel_stage(q);
    runner.run_spectrum_stage(q);
    runner.run_galerkin_stage(q);
  }
  runner.write_manifest();
  std::cerr << "[pipeline] complete; outputs in " << cfg.outdir << "\n";
}

void cmd_diagnose(const PipelineConfig& cfg) {
  const fs::path outdir(cfg.outdir);
  const fs::path manifest_path = outdir / "manifest.json";
  if (!fs::exists(manifest_path))
    throw IoError("no pipeline artifacts in " + cfg.outdir +
                  ": run the pipeline command first");
  json manifest;
  {
    std::ifstream in(manifest_path);
    try {
      in >> manifest;
    } catch (const json::exception& e) {
      throw IoError("unreadable manifest: " + std::string(e.what()));
    }
  }
  if (!manifest.contains("trajectory"))
    throw IoError("manifest lacks a trajectory record: run the pipeline "
                  "command first");
  const std::string hash = manifest["trajectory"]["hash"].get<std::string>();
  std::vector<int> q_list;
  for (const auto& q : manifest["config"]["Q"]) q_list.push_back(q.get<int>());
  const double theta = manifest["config"]["theta"].get<double>();
  std::sort(q_list.begin(), q_list.end());

  // Shared bandwidth for cross-Q kernel comparisons: the resolved epsilon
  // of the largest Q in the sweep.
  double shared_eps = 0.0;
  for (const auto& st : manifest["stages"])
    if (st["name"] == "kernel" && st.contains("Q") &&
        st["Q"].get<int>() == q_list.back())
      shared_eps = st["epsilon"].get<double>();
  if (!(shared_eps > 0.0))
    throw IoError("no kernel stage for Q=" + std::to_string(q_list.back()) +
                  " in manifest: run the kernel stage first");

  auto dist_path = [&](int q) {
    return (outdir / "cache" /
            ("dist_" + hash + "_Q" + std::to_string(q) + ".bin"))
        .string();
  };

  Eigen::MatrixXd comm_table(q_list.size(), 3);
  Eigen::MatrixXd disp_table(q_list.size(), 2);
  for (std::size_t i = 0; i < q_list.size(); ++i) {
    const int q = q_list[i];
    if (!fs::exists(dist_path(q)))
      throw IoError("missing distance cache for Q=" + std::to_string(q) +
                    ": run the kernel stage first");
    MatrixBundleFile f = read_matrix_bundle(dist_path(q));
    DelayDistanceMatrix dist;
    dist.Q = q;
    dist.d2 = std::move(f.matrix);
    disp_table(i, 0) = q;
    disp_table(i, 1) = offdiag_dispersion_cv(dist.d2, q);
    KernelBundle kern = gaussian_kernel(dist, shared_eps);
    comm_table(i, 0) = q;
    comm_table(i, 1) = shared_eps;
    comm_table(i, 2) = shift_commutator_norm(kern.dense);
  }
  write_csv_table((outdir / "diag_commutator.csv").string(),
                  {"Q", "epsilon", "commutator_norm"}, comm_table);
  write_csv_table((outdir / "diag_dispersion.csv").string(),
                  {"Q", "dispersion_cv"}, disp_table);

  Eigen::MatrixXd skew_table(q_list.size(), 2);
  for (std::size_t i = 0; i < q_list.size(); ++i) {
    const int q = q_list[i];
    const std::string eig_path =
        (outdir / ("eigenvalues_Q" + std::to_string(q) + ".csv")).string();
    if (!fs::exists(eig_path))
      throw IoError("missing eigenvalue table for Q=" + std::to_string(q) +
                    ": run the spectrum stage first");
    CsvTable eig = read_csv_table(eig_path);
    const int pairs = std::min<int>(5, (eig.values.rows() - 1) / 2);
    Eigen::VectorXd lambdas = eig.values.col(1);
    Eigen::VectorXd gaps = degeneracy_gaps(lambdas, pairs);
    Eigen::MatrixXd gtab(pairs, 4);
    for (int k = 1; k <= pairs; ++k)
      gtab.row(k - 1) << k, lambdas(2 * k - 1), lambdas(2 * k), gaps(k - 1);
    write_csv_table(
        (outdir / ("diag_degeneracy_Q" + std::to_string(q) + ".csv")).string(),
        {"pair", "lambda_odd", "lambda_even", "rel_gap"}, gtab);

    const std::string vpath =
        (outdir / ("generator_matrix_Q" + std::to_string(q) + ".csv")).string();
    if (!fs::exists(vpath))
      throw IoError("missing generator matrix for Q=" + std::to_string(q) +
                    ": run the galerkin stage first");
    CsvTable vt = read_csv_table(vpath);
    const Eigen::Index mm = vt.values.rows() - 1;
    skew_table(i, 0) = q;
    skew_table(i, 1) =
        skew_symmetry_residual(vt.values.bottomRightCorner(mm, mm));

    const std::string gpath =
        (outdir / ("gamma_table_Q" + std::to_string(q) + ".csv")).string();
    if (!fs::exists(gpath))
      throw IoError("missing gamma table for Q=" + std::to_string(q) +
                    ": run the galerkin stage first");
    CsvTable gt = read_csv_table(gpath);
    Eigen::MatrixXd dtab(gt.values.rows(), 5);
    for (Eigen::Index r = 0; r < gt.values.rows(); ++r) {
      const double re = gt.values(r, 1), energy = gt.values(r, 3);
      const double theta_e = theta * energy;
      dtab.row(r) << r, re, energy, theta_e,
          theta_e > 0.0 ? std::abs(re + theta_e) / theta_e : 0.0;
    }
    write_csv_table(
        (outdir / ("diag_dirichlet_Q" + std::to_string(q) + ".csv")).string(),
        {"rank", "re_gamma", "energy", "theta_energy", "rel_residual"}, dtab);
  }
  write_csv_table((outdir / "diag_skew.csv").string(),
                  {"Q", "skew_residual"}, skew_table);
  std::cerr << "[diagnose] wrote diagnostics to " << cfg.outdir << "\n";
}

}  // namespace koopman
