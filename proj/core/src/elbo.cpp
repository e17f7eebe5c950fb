#include "sgpde/elbo.hpp"

#include <algorithm>
#include <cmath>

namespace sgpde {

ElboTerms elbo(const Vec& z, const LowRankInverse& lri, const Vec& psi_diag, bool half_quad) {
  ElboTerms t;
  const double n = static_cast<double>(lri.n());
  t.const_term = -0.5 * n * std::log(2.0 * M_PI);
  t.logdet_term = -0.5 * lri.log_det();
  t.quad_term = -(half_quad ? 0.5 : 1.0) * lri.quad_form(z);
  t.trace_term = -lri.trace_correction(psi_diag) / (2.0 * lri.gamma());
  return t;
}

GridResult grid_search(const std::vector<double>& sigmas,
                       const std::function<GridCell(double)>& run_cell) {
  if (sigmas.empty()) throw std::invalid_argument("lengthscale grid is empty");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw std::invalid_argument("lengthscales must be positive");
  }
  std::vector<double> sorted = sigmas;
  std::sort(sorted.begin(), sorted.end());

  GridResult result;
  bool any_ok = false;
  double best_f = 0.0;
  for (double s : sorted) {
    GridCell cell = run_cell(s);
    cell.sigma = s;
    // ties break toward the larger sigma: >= on the ascending sweep
    if (cell.ok && (!any_ok || cell.elbo >= best_f)) {
      any_ok = true;
      best_f = cell.elbo;
      result.best_sigma = s;
    }
    result.cells.push_back(std::move(cell));
  }
  if (!any_ok) throw NumericalFailureError("every lengthscale grid cell failed");
  return result;
}

std::vector<double> make_sigma_grid(double low, double high, double step) {
  if (!(low > 0.0) || !(step > 0.0) || high < low) {
    throw std::invalid_argument("invalid lengthscale grid bounds");
  }
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double s = low + step * i;
    if (s > high + 0.5 * step) break;
    grid.push_back(std::min(s, high));
    if (s >= high) break;
  }
  return grid;
}

}  // namespace sgpde
