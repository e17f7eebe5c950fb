#include "sgpde/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace sgpde {

namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

struct ProblemDefaults {
  double interior_ratio;
  std::array<double, 2> sigma;
  double gamma;
  double eta;
  double nu;
};

ProblemDefaults defaults_for(const std::string& problem) {
  if (problem == "elliptic") return {0.75, {0.2, 0.2}, 1e-12, 1e-12, 0.0};
  if (problem == "burgers") return {5.0 / 6.0, {0.3, 0.05}, 1e-6, 1e-6, 0.02};
  if (problem == "parabolic") return {6.0 / 7.0, {0.3, 0.05}, 1e-10, 1e-10, 0.0};
  if (problem == "mfg") return {1.0, {1.0, 1.0}, 1e-10, 1e-4, 0.1};
  throw ConfigError("unknown problem '" + problem + "'");
}

BuiltProblem build_problem(const RunConfig& cfg, std::uint64_t seed) {
  if (cfg.problem == "elliptic") {
    return elliptic_problem(cfg.n, cfg.m, cfg.interior_ratio, cfg.kernel_sigma[0], seed);
  }
  if (cfg.problem == "burgers") {
    return burgers_problem(cfg.n, cfg.m, cfg.kernel_sigma[0], cfg.kernel_sigma[1], cfg.nu, seed);
  }
  if (cfg.problem == "parabolic") {
    return parabolic_problem(cfg.n, cfg.m, cfg.kernel_sigma[0], cfg.kernel_sigma[1], seed);
  }
  if (cfg.problem == "mfg") {
    return mfg_problem(cfg.n, cfg.m, cfg.nu, seed);
  }
  throw ConfigError("unknown problem '" + cfg.problem + "'");
}

Vec initial_free_vector(const RunConfig& cfg, int free_dim, std::uint64_t seed) {
  if (cfg.init == "zeros") return Vec::Zero(free_dim);
  if (cfg.init == "uniform") {
    // MFG: start from the uniform density rho = 1 (everything else zero),
    // which sits near the ergodic solution branch and converges much faster
    // than the zero start. Elsewhere identical to zeros.
    Vec w = Vec::Zero(free_dim);
    if (cfg.problem == "mfg") {
      const int quarter = cfg.n;  // id-block length
      for (int i = 0; i < quarter - 1; ++i) w(4 * quarter - 1 + i) = 1.0;
    }
    return w;
  }
  if (cfg.init == "normal") {
    std::mt19937_64 eng(derive_seed(seed, 77));
    Vec w(free_dim);
    for (int i = 0; i < free_dim; ++i) {
      // Box-Muller on platform-stable uniform bits
      const double u1 = (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
      const double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
      w(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    return w;
  }
  throw ConfigError("unknown init mode '" + cfg.init + "'");
}

std::string csv_header(const Domain& domain) {
  return domain.time_axis ? "t,x,value" : "x1,x2,value";
}

void write_csv_grid(const std::string& path, const Domain& domain,
                    const std::vector<Point>& pts, const std::vector<double>& vals) {
  std::ofstream out(path);
  out << csv_header(domain) << "\n";
  char buf[128];
  for (size_t i = 0; i < pts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pts[i][0], pts[i][1], vals[i]);
    out << buf;
  }
}

json point_to_json(const Point& p) { return json::array({p[0], p[1]}); }

json kernel_to_json(const KernelSpec& k) {
  json j;
  switch (k.family) {
    case KernelFamily::GaussianIso:
      j["type"] = "gaussian_iso";
      j["sigma"] = k.sigma[0];
      break;
    case KernelFamily::GaussianAniso:
      j["type"] = "gaussian_aniso";
      j["sigma"] = json::array({k.sigma[0], k.sigma[1]});
      break;
    case KernelFamily::PeriodicExp:
      j["type"] = "periodic_exp";
      j["sigma"] = json::array({k.sigma[0], k.sigma[1]});
      break;
  }
  return j;
}

json model_to_json(const SolutionModel& model) {
  json j;
  j["kernel"] = kernel_to_json(model.kernel);
  j["gamma"] = model.gamma;
  j["eta_used"] = model.eta_used;
  json phi = json::array();
  for (const auto& f : model.phi.entries) {
    json op = json::array();
    for (const auto& t : f.op.terms) {
      op.push_back(json::array({t.orders[0], t.orders[1], t.coeff}));
    }
    phi.push_back(json{{"point", point_to_json(f.point)}, {"op", op}});
  }
  j["phi"] = phi;
  j["beta"] = std::vector<double>(model.beta.data(), model.beta.data() + model.beta.size());
  return j;
}

// Cholesky + low-rank factorization with nugget escalation. The Cholesky can
// "succeed" with pivots at rounding scale when eta is tiny, in which case the
// triangular solve inside factorize overflows; retrying with a x10 larger
// nugget restores a usable factor.
struct Factorization {
  CholeskyFactor chol;
  LowRankInverse lri;
};

Factorization factorize_with_escalation(const Mat& theta, const std::vector<BlockInfo>& layout,
                                        double eta, const Mat& cross, double gamma) {
  for (int attempt = 0; attempt <= 3; ++attempt) {
    const NuggetSpec nugget = build_nugget(theta, layout, eta);
    CholeskyFactor chol = cholesky_theta(theta, nugget);
    try {
      LowRankInverse lri = LowRankInverse::factorize(chol, cross, gamma);
      return {std::move(chol), std::move(lri)};
    } catch (const NumericalFailureError&) {
      if (attempt == 3) throw;
      eta = chol.eta_used == 0.0 ? 1e-16 : chol.eta_used * 10.0;
    }
  }
  throw NumericalFailureError("unreachable");
}

std::string resolved_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("SGPDE_OUTPUT_DIR")) return env;
  return cfg.output_dir;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("problem") || !doc["problem"].is_string()) {
    throw ConfigError("config is missing the required string field 'problem'");
  }
  RunConfig cfg;
  cfg.problem = doc["problem"].get<std::string>();
  const ProblemDefaults d = defaults_for(cfg.problem);
  cfg.interior_ratio = d.interior_ratio;
  cfg.kernel_sigma = d.sigma;
  cfg.gamma = d.gamma;
  cfg.eta = d.eta;
  cfg.nu = d.nu;
  if (cfg.problem == "mfg") cfg.init = "uniform";

  try {
    if (!doc.contains("N") || !doc.contains("M")) throw ConfigError("config requires N and M");
    cfg.n = doc.at("N").get<int>();
    cfg.m = doc.at("M").get<int>();
    if (doc.contains("interior_ratio")) cfg.interior_ratio = doc["interior_ratio"].get<double>();
    if (doc.contains("gamma")) cfg.gamma = doc["gamma"].get<double>();
    if (doc.contains("eta")) cfg.eta = doc["eta"].get<double>();
    if (doc.contains("nu")) cfg.nu = doc["nu"].get<double>();
    if (doc.contains("kernel")) {
      const auto& k = doc["kernel"];
      if (k.contains("sigma")) {
        if (k["sigma"].is_array()) {
          cfg.kernel_sigma = {k["sigma"][0].get<double>(), k["sigma"][1].get<double>()};
        } else {
          const double s = k["sigma"].get<double>();
          cfg.kernel_sigma = {s, s};
        }
      }
    }
    if (doc.contains("seed")) {
      cfg.seeds = {doc["seed"].get<std::uint64_t>()};
    } else if (doc.contains("seeds")) {
      cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    } else {
      cfg.seeds = {0};
    }
    if (cfg.seeds.empty()) throw ConfigError("seeds list must not be empty");
    if (doc.contains("gn")) {
      const auto& g = doc["gn"];
      if (g.contains("max_iter")) cfg.gn.max_iter = g["max_iter"].get<int>();
      if (g.contains("tol")) cfg.gn.step_tol = g["tol"].get<double>();
      if (g.contains("step_size")) cfg.gn.step_size = g["step_size"].get<double>();
      if (g.contains("ridge")) cfg.gn.ridge = g["ridge"].get<double>();
    }
    if (doc.contains("grid_resolution")) cfg.grid_resolution = doc["grid_resolution"].get<int>();
    if (doc.contains("init")) cfg.init = doc["init"].get<std::string>();
    if (doc.contains("hyperopt")) {
      const auto& h = doc["hyperopt"];
      if (h.contains("low")) cfg.hyperopt.low = h["low"].get<double>();
      if (h.contains("high")) cfg.hyperopt.high = h["high"].get<double>();
      if (h.contains("step")) cfg.hyperopt.step = h["step"].get<double>();
    }
    if (doc.contains("diagnostics")) {
      const auto& dg = doc["diagnostics"];
      if (dg.contains("nystrom")) cfg.diagnostics.nystrom = dg["nystrom"].get<bool>();
      if (dg.contains("max_dense")) cfg.diagnostics.max_dense = dg["max_dense"].get<int>();
    }
    if (doc.contains("reference_file")) cfg.reference_file = doc["reference_file"].get<std::string>();
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("elbo_half_quad")) cfg.elbo_half_quad = doc["elbo_half_quad"].get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema violation: ") + e.what());
  }

  if (cfg.n < 4 || cfg.m < 1 || cfg.m > cfg.n) throw ConfigError("require 4 <= N and 1 <= M <= N");
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (cfg.eta < 0.0) throw ConfigError("eta must be nonnegative");
  if (cfg.grid_resolution < 2) throw ConfigError("grid_resolution must be at least 2");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

SolveResult solve_once(const RunConfig& cfg, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();

  SolveResult res;
  res.seed = seed;
  res.problem = build_problem(cfg, seed);
  BuiltProblem& bp = res.problem;

  const Mat theta = assemble_theta(bp.spec.kernel, bp.phi);
  const Mat cross = assemble_cross(bp.spec.kernel, bp.phi, bp.psi);
  const Vec psi_diag = assemble_psi_diag(bp.spec.kernel, bp.psi);
  const Factorization fac =
      factorize_with_escalation(theta, bp.phi.layout, cfg.eta, cross, cfg.gamma);
  const CholeskyFactor& chol = fac.chol;
  const LowRankInverse& lri = fac.lri;
  res.eta_used = chol.eta_used;

  GnProblem gnp = bp.mfg ? make_gn_problem(*bp.mfg, lri, cfg.gamma)
                         : make_gn_problem(bp.elim, lri);
  const Vec w0 = initial_free_vector(cfg, gnp.free_dim, seed);
  res.gn = gn_solve(gnp, cfg.gn, w0);

  std::function<double(const Point&)> reference;
  if (bp.mfg) {
    const int quarter = gnp.z_dim / 2;
    res.model = build_solution(res.gn.z.head(quarter), lri, chol, bp.spec.kernel, bp.phi);
    res.model_m =
        build_solution(res.gn.z.tail(quarter), lri, chol, bp.spec.kernel, bp.phi);
    res.residual_sq_sum = bp.mfg->residual(res.gn.w).squaredNorm();
    const int nn = bp.mfg->n_points;
    res.constraint_sum_z1 = res.gn.z.head(nn).sum();
    res.constraint_mean_rho1 = res.gn.z.segment(4 * nn, nn).mean();
    if (!cfg.reference_file.empty()) {
      auto grid = std::make_shared<ReferenceGrid>(ReferenceGrid::ingest(cfg.reference_file));
      reference = [grid](const Point& p) { return (*grid)(p); };
    }
  } else {
    res.model = build_solution(res.gn.z, lri, chol, bp.spec.kernel, bp.phi);
    if (bp.spec.name == "burgers") {
      const double nu = bp.spec.nu;
      reference = [nu](const Point& p) { return cole_hopf_burgers(p[0], p[1], nu); };
    } else if (bp.exact) {
      reference = bp.exact;
    }
  }

  const SolutionModel& err_model = bp.mfg ? *res.model_m : res.model;
  if (reference) {
    res.error_grid = linf_on_grid([&](const Point& p) { return evaluate(err_model, p); },
                                  reference, bp.spec.domain, cfg.grid_resolution);
    res.linf = res.error_grid.max_error;
  } else {
    // still evaluate the solution grid so the artifact exists
    res.error_grid.grid_points = make_grid(bp.spec.domain, cfg.grid_resolution);
    res.error_grid.errors.resize(res.error_grid.grid_points.size(), 0.0);
  }

  {
    const Vec& z_elbo = bp.mfg ? Vec(res.gn.z.head(gnp.z_dim / 2)) : res.gn.z;
    res.elbo_value = elbo(z_elbo, lri, psi_diag, cfg.elbo_half_quad).value();
  }

  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

json summarize(const RunConfig& cfg, const SolveResult& res) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["problem"] = cfg.problem;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["interior_ratio"] = cfg.interior_ratio;
  j["kernel"] = kernel_to_json(res.problem.spec.kernel);
  j["gamma"] = cfg.gamma;
  j["eta"] = cfg.eta;
  j["eta_used"] = res.eta_used;
  j["seed"] = res.seed;
  j["iterations"] = res.gn.iterations;
  j["converged"] = res.gn.converged;
  j["non_monotone"] = res.gn.non_monotone;
  j["final_loss"] = res.gn.loss_history.back();
  j["elbo"] = res.elbo_value;
  j["wall_time_s"] = res.wall_time_s;
  if (res.linf) j["linf_error"] = *res.linf;
  if (res.residual_sq_sum) {
    j["residual_sq_sum"] = *res.residual_sq_sum;
    j["constraint_sum_z1"] = *res.constraint_sum_z1;
    j["constraint_mean_rho1"] = *res.constraint_mean_rho1;
  }
  return j;
}

void write_solve_artifacts(const RunConfig& cfg, const SolveResult& res,
                           const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/run_summary.json");
    out << summarize(cfg, res).dump(2) << "\n";
  }
  {
    std::ofstream out(out_dir + "/loss_history.csv");
    out << "iter,loss\n";
    char buf[64];
    for (size_t i = 0; i < res.gn.loss_history.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, res.gn.loss_history[i]);
      out << buf;
    }
  }
  write_csv_grid(out_dir + "/error_grid.csv", res.problem.spec.domain, res.error_grid.grid_points,
                 res.error_grid.errors);
  {
    std::ofstream out(out_dir + "/model.json");
    out << model_to_json(res.model).dump() << "\n";
  }
  if (res.model_m) {
    std::ofstream out(out_dir + "/model_m.json");
    out << model_to_json(*res.model_m).dump() << "\n";
  }
  {
    json samples;
    json interior = json::array(), boundary = json::array();
    for (const auto& p : res.problem.samples.interior) interior.push_back(point_to_json(p));
    for (const auto& p : res.problem.samples.boundary) boundary.push_back(point_to_json(p));
    samples["interior"] = interior;
    samples["boundary"] = boundary;
    samples["seed"] = res.problem.samples.seed;
    std::ofstream out(out_dir + "/samples.json");
    out << samples.dump() << "\n";

    json inducing;
    inducing["interior_indices"] = res.problem.inducing.interior_indices;
    inducing["boundary_indices"] = res.problem.inducing.boundary_indices;
    std::ofstream out2(out_dir + "/inducing.json");
    out2 << inducing.dump() << "\n";
  }
}

namespace {

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidConfigurationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IngestionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int run_solve(const std::string& config_path) {
  return guarded([&] {
    const RunConfig cfg = load_config(config_path);
    const SolveResult res = solve_once(cfg, cfg.seeds.front());
    write_solve_artifacts(cfg, res, resolved_output_dir(cfg));
  });
}

int run_batch(const std::string& config_path) {
  return guarded([&] {
    const RunConfig cfg = load_config(config_path);
    const std::string out_dir = resolved_output_dir(cfg);
    fs::create_directories(out_dir);

    struct SeedRow {
      std::uint64_t seed;
      bool ok;
      double linf, wall, iters;
    };
    std::vector<SeedRow> rows;
    for (std::uint64_t seed : cfg.seeds) {
      SeedRow row{seed, false, 0.0, 0.0, 0.0};
      try {
        const SolveResult res = solve_once(cfg, seed);
        write_solve_artifacts(cfg, res, out_dir + "/seed_" + std::to_string(seed));
        row.ok = true;
        row.linf = res.linf.value_or(std::numeric_limits<double>::quiet_NaN());
        row.wall = res.wall_time_s;
        row.iters = res.gn.iterations;
      } catch (const std::exception& e) {
        std::cerr << "seed " << seed << " failed: " << e.what() << "\n";
      }
      rows.push_back(row);
    }
    // aggregate over successful seeds, deterministic by seed order
    std::sort(rows.begin(), rows.end(),
              [](const SeedRow& a, const SeedRow& b) { return a.seed < b.seed; });
    int ok = 0;
    double sum = 0.0, sum2 = 0.0, iters = 0.0, wall = 0.0;
    for (const auto& r : rows) {
      if (!r.ok) continue;
      ++ok;
      sum += r.linf;
      sum2 += r.linf * r.linf;
      iters += r.iters;
      wall += r.wall;
    }
    if (ok == 0) throw NumericalFailureError("every seed in the batch failed");
    const double mean = sum / ok;
    const double var = std::max(0.0, sum2 / ok - mean * mean);

    std::ofstream out(out_dir + "/aggregate.csv");
    out << "n,m,seeds_ok,linf_mean,linf_std,iters_mean,wall_mean_s\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n", cfg.n, cfg.m, ok, mean,
                  std::sqrt(var), iters / ok, wall / ok);
    out << buf;
  });
}

int run_hyperopt(const std::string& config_path) {
  return guarded([&] {
    const RunConfig cfg = load_config(config_path);
    if (cfg.problem == "mfg") {
      throw ConfigError("hyperopt is not defined for the periodic MFG kernel");
    }
    const std::string out_dir = resolved_output_dir(cfg);
    fs::create_directories(out_dir);

    const std::vector<double> grid =
        make_sigma_grid(cfg.hyperopt.low, cfg.hyperopt.high, cfg.hyperopt.step);
    const bool aniso = cfg.problem != "elliptic";

    auto run_cell = [&](double s) {
      GridCell cell;
      cell.sigma = s;
      RunConfig local = cfg;
      if (aniso) {
        // shared multiplier on the configured base lengthscales
        local.kernel_sigma = {cfg.kernel_sigma[0] * s, cfg.kernel_sigma[1] * s};
      } else {
        local.kernel_sigma = {s, s};
      }
      try {
        const SolveResult res = solve_once(local, cfg.seeds.front());
        cell.ok = true;
        cell.status = "ok";
        cell.elbo = res.elbo_value;
        cell.iterations = res.gn.iterations;
        cell.linf = res.linf;
      } catch (const std::exception& e) {
        cell.status = e.what();
      }
      return cell;
    };

    const GridResult result = grid_search(grid, run_cell);

    std::ofstream out(out_dir + "/hyperopt.csv");
    out << "sigma,elbo,iterations,linf_error,status\n";
    char buf[256];
    for (const auto& c : result.cells) {
      std::string linf = c.linf ? [&] {
        char b[64];
        std::snprintf(b, sizeof b, "%.17g", *c.linf);
        return std::string(b);
      }() : std::string();
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%s,%s\n", c.sigma, c.elbo, c.iterations,
                    linf.c_str(), c.ok ? "ok" : "failed");
      out << buf;
    }
    json best;
    best["schema_version"] = kSchemaVersion;
    best["best_sigma"] = result.best_sigma;
    std::ofstream bout(out_dir + "/hyperopt_summary.json");
    bout << best.dump(2) << "\n";
  });
}

int run_diagnose(const std::string& config_path) {
  return guarded([&] {
    const RunConfig cfg = load_config(config_path);
    const std::string out_dir = resolved_output_dir(cfg);

    // the dense K(psi,psi) gate
    {
      const BuiltProblem probe = build_problem(cfg, cfg.seeds.front());
      if (probe.psi.size() > cfg.diagnostics.max_dense) {
        throw ConfigError("diagnose requires |psi| <= " + std::to_string(cfg.diagnostics.max_dense) +
                          " (got " + std::to_string(probe.psi.size()) + ")");
      }
    }

    const SolveResult res = solve_once(cfg, cfg.seeds.front());
    write_solve_artifacts(cfg, res, out_dir);

    const BuiltProblem& bp = res.problem;
    const Mat theta = assemble_theta(bp.spec.kernel, bp.phi);
    const Mat cross = assemble_cross(bp.spec.kernel, bp.phi, bp.psi);
    const Mat dense_psi = assemble_dense_psi(bp.spec.kernel, bp.psi);
    const Factorization fac =
        factorize_with_escalation(theta, bp.phi.layout, cfg.eta, cross, cfg.gamma);
    const NystromError nerr = nystrom_error(dense_psi, fac.lri);

    // constraint residual |F(z) - y|: exact elimination makes this a pure
    // roundoff diagnostic, reported for completeness
    double constraint_residual = 0.0;
    if (!bp.mfg) {
      const Vec z2 = bp.elim.z_of_w(res.gn.w);
      constraint_residual = (z2 - res.gn.z).lpNorm<Eigen::Infinity>();
    } else {
      constraint_residual = std::abs(*res.constraint_sum_z1) +
                            std::abs(*res.constraint_mean_rho1 - 1.0);
    }

    json j = summarize(cfg, res);
    j["nystrom_error"] = nerr.value;
    j["nystrom_converged"] = nerr.converged;
    j["constraint_residual"] = constraint_residual;
    std::ofstream out(out_dir + "/run_summary.json");
    out << j.dump(2) << "\n";
  });
}

}  // namespace sgpde
