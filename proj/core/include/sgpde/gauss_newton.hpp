#pragma once

#include "sgpde/problems.hpp"
#include "sgpde/woodbury.hpp"

namespace sgpde {

struct GNConfig {
  int max_iter = 20;
  double step_tol = 1e-5;   // sup-norm of the iterate difference
  double step_size = 1.0;
  double ridge = 1e-10;
};

struct DivergenceError : std::runtime_error {
  Vec last_finite;
  DivergenceError(std::string msg, Vec w)
      : std::runtime_error(std::move(msg)), last_finite(std::move(w)) {}
};

/// Reduced least-squares problem in eliminated variables. The quadratic part
/// sums weight_b * z_b^T (gamma I + Q)^-1 z_b over blocks of the stacked z;
/// MFG additionally carries unit-weight soft residuals and an L2 penalty on
/// selected free variables (the ergodic constant).
struct GnProblem {
  int free_dim = 0;
  int z_dim = 0;
  struct QuadBlock {
    int start = 0;
    int length = 0;
    double weight = 1.0;
  };
  std::vector<QuadBlock> quad_blocks;
  const LowRankInverse* lri = nullptr;
  std::function<Vec(const Vec&)> z_of_w;
  std::function<SpMat(const Vec&)> z_jacobian;
  std::function<Vec(const Vec&)> residual;           // optional
  std::function<SpMat(const Vec&)> residual_jacobian;
  Vec w_l2_weight;                                   // optional, size free_dim
  // When the problem supplies its linearized constraint rows G (G J = 0) and
  // the free-entry selector, the step is computed in constraint space:
  //   z+ = Sigma G^T (G Sigma G^T)^-1 G z,
  // which involves only sums of positive semi-definite products and stays
  // accurate when gamma is at rounding scale (the primal normal equations
  // J^T Sigma^-1 J lose the low-curvature directions to cancellation there).
  std::function<SpMat(const Vec&)> constraints;
  std::function<Vec(const Vec&)> w_of_z;
};

/// Single-unknown problem: one unit-weight quadratic block over all of z.
GnProblem make_gn_problem(const EliminationMap& elim, const LowRankInverse& lri);

/// MFG: gamma-weight quadratic blocks for z_u and z_m, gamma lambda^2, and
/// unit-weight HJB/FP residual squares.
GnProblem make_gn_problem(const MfgModel& model, const LowRankInverse& lri, double gamma);

struct GNResult {
  Vec w;
  Vec z;
  std::vector<double> loss_history;  // loss at w0 and after each iteration
  int iterations = 0;
  bool converged = false;
  bool non_monotone = false;  // loss rose for 3 consecutive iterations
};

GNResult gn_solve(const GnProblem& problem, const GNConfig& config, const Vec& w0);

/// Representer coefficients over the inducing functionals: u(x) = sum_j
/// beta_j K(x, phi_j), evaluable in O(R) per point.
struct SolutionModel {
  KernelSpec kernel;
  FunctionalVector phi;
  Vec beta;
  double gamma = 0.0;
  double eta_used = 0.0;
  Vec z_star;
};

SolutionModel build_solution(const Vec& z_star, const LowRankInverse& lri,
                             const CholeskyFactor& l_factor,
                             const KernelSpec& kernel, const FunctionalVector& phi);

double evaluate(const SolutionModel& model, const Point& x);
Vec evaluate_batch(const SolutionModel& model, const std::vector<Point>& xs);

}  // namespace sgpde
