#pragma once

#include "sgpde/elbo.hpp"
#include "sgpde/gauss_newton.hpp"
#include "sgpde/problems.hpp"
#include "sgpde/reference.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace sgpde {

using json = nlohmann::json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// One fully resolved run configuration. Defaults mirror the benchmark
/// settings of each problem; any field may be overridden in the JSON config.
struct RunConfig {
  std::string problem;
  int n = 0;
  int m = 0;
  double interior_ratio = 0.0;
  std::array<double, 2> kernel_sigma{0.0, 0.0};
  double gamma = 0.0;
  double eta = 0.0;
  double nu = 0.0;
  std::vector<std::uint64_t> seeds;
  GNConfig gn;
  int grid_resolution = 60;
  std::string init = "zeros";  // or "normal"
  struct Hyperopt {
    double low = 0.01, high = 1.0, step = 0.01;
  } hyperopt;
  struct Diagnostics {
    bool nystrom = false;
    int max_dense = 20000;
  } diagnostics;
  std::string reference_file;
  std::string output_dir = "sgpde_out";
  bool elbo_half_quad = false;
};

RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

struct SolveResult {
  BuiltProblem problem;
  GNResult gn;
  SolutionModel model;                    // u (or u for MFG)
  std::optional<SolutionModel> model_m;   // MFG density
  double eta_used = 0.0;
  std::optional<double> linf;
  GridError error_grid;
  double elbo_value = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  // MFG extras
  std::optional<double> residual_sq_sum;
  std::optional<double> constraint_sum_z1;
  std::optional<double> constraint_mean_rho1;
};

SolveResult solve_once(const RunConfig& cfg, std::uint64_t seed);

json summarize(const RunConfig& cfg, const SolveResult& res);

void write_solve_artifacts(const RunConfig& cfg, const SolveResult& res,
                           const std::string& out_dir);

// Entry points used by the CLI; return process exit codes (0 ok, 2 config
// error, 3 numerical failure).
int run_solve(const std::string& config_path);
int run_batch(const std::string& config_path);
int run_hyperopt(const std::string& config_path);
int run_diagnose(const std::string& config_path);

}  // namespace sgpde
