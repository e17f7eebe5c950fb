#pragma once

#include "sgpde/gram.hpp"

namespace sgpde {

/// Factorized action of (gamma I + Q(psi, psi))^-1 through the low-rank
/// identity
///   (gamma I + Q)^-1 = gamma^-1 I - gamma^-1 A^T (I + A A^T)^-1 A,
/// with A = gamma^-1/2 L^-1 K(phi, psi) and J J^T = I + A A^T. Immutable
/// after factorize; every apply is a pair of triangular solves against J.
class LowRankInverse {
 public:
  static LowRankInverse factorize(const CholeskyFactor& l_factor, const Mat& cross, double gamma);

  Vec apply_inverse(const Vec& v) const;
  Mat apply_inverse(const Mat& v) const;
  double quad_form(const Vec& z) const;
  /// log det(gamma I + Q(psi, psi)) = n log gamma + 2 sum_i log J_ii
  double log_det() const;
  /// Tr(K(psi,psi)) - Tr(Q(psi,psi)), with Tr(Q) = gamma |A|_F^2
  double trace_correction(const Vec& psi_diag) const;

  double gamma() const { return gamma_; }
  Eigen::Index n() const { return a_.cols(); }
  Eigen::Index rank() const { return a_.rows(); }
  const Mat& a_matrix() const { return a_; }
  const Mat& inner_chol() const { return j_; }

 private:
  LowRankInverse(Mat a, Mat j, double gamma)
      : a_(std::move(a)), j_(std::move(j)), gamma_(gamma) {}

  Mat a_;      // rank x n
  Mat j_;      // lower Cholesky factor of I + A A^T
  double gamma_;
};

}  // namespace sgpde
