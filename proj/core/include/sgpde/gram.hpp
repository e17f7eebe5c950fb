#pragma once

#include "sgpde/collocation.hpp"
#include "sgpde/kernels.hpp"

#include <Eigen/Dense>

namespace sgpde {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct NumericalFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Theta = K(phi, phi), the cross matrix B = K(phi, psi), and the diagonal of
/// K(psi, psi). The dense K(psi, psi) is assembled only for diagnostics.
struct GramBlocks {
  Mat theta;
  Mat cross;
  Vec psi_diag;
  std::optional<Mat> dense_psi;
};

/// Block-diagonal nugget: one positive scale per operator block of phi,
/// expanded to a diagonal matrix R. Scales equalize the very different
/// magnitudes of Dirac and derivative blocks.
struct NuggetSpec {
  double eta = 0.0;
  std::vector<double> block_scales;            // one per layout block
  std::vector<BlockInfo> layout;

  Vec expanded_diagonal() const;
};

struct CholeskyFactor {
  Mat lower;
  double eta_used = 0.0;
};

Mat assemble_theta(const KernelSpec& kernel, const FunctionalVector& phi);

Mat assemble_cross(const KernelSpec& kernel, const FunctionalVector& phi,
                   const FunctionalVector& psi);

Vec assemble_psi_diag(const KernelSpec& kernel, const FunctionalVector& psi);

Mat assemble_dense_psi(const KernelSpec& kernel, const FunctionalVector& psi);

/// Per-block scale = mean Gram diagonal over the block, clamped away from zero.
NuggetSpec build_nugget(const Mat& theta, const std::vector<BlockInfo>& layout, double eta);

/// Cholesky of theta + eta R, escalating eta by x10 up to 3 times when the
/// factorization fails. eta_used records the value that succeeded.
CholeskyFactor cholesky_theta(const Mat& theta, const NuggetSpec& nugget);

}  // namespace sgpde
