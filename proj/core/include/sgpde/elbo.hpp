#pragma once

#include "sgpde/woodbury.hpp"

#include <functional>
#include <optional>

namespace sgpde {

/// The four terms of the variational lower bound
///   F = -(n/2) ln 2pi - 1/2 ln det(Q + gamma I)
///       - c z^T (Q + gamma I)^-1 z - Tr(K - Q) / (2 gamma),
/// exposed separately for testing. The quadratic coefficient c is 1 by
/// default; half_quad switches to the 1/2 variant.
struct ElboTerms {
  double const_term = 0.0;
  double logdet_term = 0.0;
  double quad_term = 0.0;
  double trace_term = 0.0;
  double value() const { return const_term + logdet_term + quad_term + trace_term; }
};

ElboTerms elbo(const Vec& z, const LowRankInverse& lri, const Vec& psi_diag,
               bool half_quad = false);

struct GridCell {
  double sigma = 0.0;
  double elbo = 0.0;
  int iterations = 0;
  std::optional<double> linf;
  bool ok = false;
  std::string status;
};

struct GridResult {
  std::vector<GridCell> cells;  // ordered by sigma
  double best_sigma = 0.0;
};

/// Pure fold over the lengthscale grid: run each cell, keep the argmax of F
/// among the cells that succeeded, ties broken toward the larger sigma.
/// Throws only if every cell fails.
GridResult grid_search(const std::vector<double>& sigmas,
                       const std::function<GridCell(double)>& run_cell);

std::vector<double> make_sigma_grid(double low, double high, double step);

}  // namespace sgpde
