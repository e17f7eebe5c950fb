#pragma once

#include "sgpde/collocation.hpp"
#include "sgpde/gram.hpp"

#include <Eigen/Sparse>
#include <functional>
#include <memory>

namespace sgpde {

using SpMat = Eigen::SparseMatrix<double>;

/// Parameterization of the constraint set {F(z) = y} by free variables w.
/// z_of_w satisfies the constraints algebraically for every w; jacobian is
/// the exact dz/dw.
struct EliminationMap {
  int free_dim = 0;
  int z_dim = 0;
  std::function<Vec(const Vec&)> z_of_w;
  std::function<SpMat(const Vec&)> jacobian;
  /// Linearized constraint Jacobian G(w) = F'(z(w)), (z_dim - free_dim) x
  /// z_dim, with G(w) * jacobian(w) = 0. Enables the subtraction-free
  /// constraint-space form of the Gauss-Newton step.
  std::function<SpMat(const Vec&)> constraints;
  /// Selects the free entries of a z vector (left inverse of jacobian).
  std::function<Vec(const Vec&)> w_of_z;
};

/// The MFG unknown stack: z_full = [z_u (4N); z_m (4N)] ordered per unknown
/// as [id, dx1, dx2, laplacian] blocks at all N points. The free vector is
/// w = [z_u without its last id entry; z_m without its last id entry; lambda];
/// the two linear constraints (sum z^(1) = 0, mean rho^(1) = 1) are solved
/// for the eliminated entries.
struct MfgModel {
  int n_points = 0;
  double nu = 0.0;
  Vec potential;                     // V at the sample points
  EliminationMap elim;               // w (8N-1) -> z_full (8N); lambda passed separately
  std::function<Vec(const Vec& w)> residual;          // HJB then FP, 2N entries
  std::function<SpMat(const Vec& w)> residual_jacobian;  // 2N x (8N-1)
};

struct ProblemSpec {
  std::string name;
  Domain domain;
  double interior_ratio = 0.75;
  KernelSpec kernel;
  OperatorLayout layout;
  double nu = 0.0;
};

/// A fully instantiated problem: samples, inducing subset, functional
/// vectors, and the eliminated-variable map (or the MFG residual model).
struct BuiltProblem {
  ProblemSpec spec;
  SampleSet samples;
  InducingSet inducing;
  FunctionalVector psi;
  FunctionalVector phi;
  EliminationMap elim;
  std::shared_ptr<MfgModel> mfg;
  std::function<double(const Point&)> exact;  // prescribed solution when analytic
};

BuiltProblem elliptic_problem(int n, int m, double ratio, double sigma, std::uint64_t seed);
BuiltProblem burgers_problem(int n, int m, double sigma_t, double sigma_x, double nu,
                             std::uint64_t seed);
BuiltProblem parabolic_problem(int n, int m, double sigma_t, double sigma_x, std::uint64_t seed);
BuiltProblem mfg_problem(int n, int m, double nu, std::uint64_t seed);

// Prescribed solutions and forcing terms, shared with the diagnostics.
double elliptic_exact(const Point& x);
double elliptic_forcing(const Point& x);
double parabolic_exact(const Point& tx);
double parabolic_forcing(const Point& tx);
double mfg_potential(const Point& x);

}  // namespace sgpde
