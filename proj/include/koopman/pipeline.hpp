#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "koopman/dynamics.hpp"
#include "koopman/generator.hpp"

namespace koopman {

// Declarative end-to-end run description. Numeric defaults are the
// desk-scale experiment values; epsilon <= 0 requests bandwidth tuning and
// spinup < 0 picks the per-system default (0 for torus/rotation, 100 time
// units for the Lorenz systems; pass 4000 to reproduce the long relaxation).
struct PipelineConfig {
  SystemSpec system;
  std::string data_path;  // external observations (kind == external)
  Eigen::Index N = 8000;
  double dt = 0.01;
  double spinup = -1.0;
  std::uint64_t seed = 1;
  std::vector<int> q_list{400};
  double epsilon = 0.0;
  int k_nn = 0;
  int m = 50;
  double theta = 1e-4;
  FdOrder scheme = FdOrder::first_forward;
  bool antisymmetrize = false;
  bool csv_header = false;  // header row on trajectory CSV
  bool use_cache = true;
  std::string outdir = "out";

  double resolved_spinup() const;
  void validate() const;  // ConfigError listing every offending key
};

PipelineConfig config_from_json_file(const std::string& path);
std::string config_to_json_string(const PipelineConfig& cfg);

// Generate (or load, for external data) the observation time series.
ObservedTrajectory obtain_trajectory(const PipelineConfig& cfg);

// Subcommand drivers; each stage reuses cached artifacts of earlier ones.
void cmd_generate(const PipelineConfig& cfg);
void cmd_kernel(const PipelineConfig& cfg);
void cmd_spectrum(const PipelineConfig& cfg);
void cmd_galerkin(const PipelineConfig& cfg);
void cmd_pipeline(const PipelineConfig& cfg);
void cmd_diagnose(const PipelineConfig& cfg);

}  // namespace koopman
