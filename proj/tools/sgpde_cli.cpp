// Command-line front end for the sparse GP collocation solver.
//
//   sgpde solve    --config cfg.json   single run (or per-seed batch)
//   sgpde batch    --config cfg.json   multi-seed batch with aggregate stats
//   sgpde hyperopt --config cfg.json   lengthscale grid search by evidence bound
//   sgpde diagnose --config cfg.json   solve plus low-rank approximation audit

#include <CLI11.hpp>

#include "sgpde/runner.hpp"

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
  CLI::App app{"Sparse Gaussian process collocation solver for nonlinear PDEs"};
  app.require_subcommand(1);

  std::string config_path;
  int (*entry)(const std::string&) = nullptr;

  auto add = [&](const char* name, const char* desc, int (*fn)(const std::string&)) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->callback([&entry, fn] { entry = fn; });
  };

  add("solve", "Run the solver once per configured seed", &sgpde::run_solve);
  add("batch", "Run all seeds and write aggregate error statistics", &sgpde::run_batch);
  add("hyperopt", "Grid-search the kernel lengthscale by the evidence bound",
      &sgpde::run_hyperopt);
  add("diagnose", "Solve and audit the low-rank kernel approximation", &sgpde::run_diagnose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return entry(config_path);
}
