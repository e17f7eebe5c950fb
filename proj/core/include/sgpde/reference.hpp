#pragma once

#include "sgpde/collocation.hpp"
#include "sgpde/woodbury.hpp"

#include <functional>
#include <string>

namespace sgpde {

struct IngestionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Viscous Burgers reference via the Cole-Hopf transformation, evaluated by
/// Gauss-Hermite quadrature after the heat-kernel substitution
/// eta = 2 sqrt(nu t) s. At t = 0 returns the initial datum -sin(pi x).
double cole_hopf_burgers(double t, double x, double nu, int nodes = 100);

struct GridError {
  double max_error = 0.0;
  std::vector<double> errors;     // row-major in the first coordinate
  std::vector<Point> grid_points;
};

/// Sup error over an equally spaced grid (endpoints included; periodic axes
/// drop the duplicate wrap point).
GridError linf_on_grid(const std::function<double(const Point&)>& model_eval,
                       const std::function<double(const Point&)>& reference,
                       const Domain& domain, int resolution = 60);

std::vector<Point> make_grid(const Domain& domain, int resolution);

struct NystromError {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

/// Spectral norm of K(psi,psi) - Q(psi,psi) by symmetric power iteration on
/// the residual matvec (the dense residual is never formed).
NystromError nystrom_error(const Mat& dense_psi, const LowRankInverse& lri,
                           double rel_tol = 1e-6, int max_iter = 1000);

/// Lattice lookup with bilinear interpolation, read from a CSV of
/// (x1, x2, value) rows covering a full rectangular grid.
class ReferenceGrid {
 public:
  static ReferenceGrid ingest(const std::string& path);

  double operator()(const Point& p) const;
  int rows() const { return static_cast<int>(x1_.size()); }
  int cols() const { return static_cast<int>(x2_.size()); }

 private:
  std::vector<double> x1_, x2_;
  Mat values_;
};

}  // namespace sgpde
