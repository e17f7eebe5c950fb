#include "sgpde/woodbury.hpp"

#include <cmath>

namespace sgpde {

LowRankInverse LowRankInverse::factorize(const CholeskyFactor& l_factor, const Mat& cross,
                                         double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (l_factor.lower.rows() != cross.rows()) {
    throw std::invalid_argument("cross matrix rows must match the Cholesky factor");
  }
  Mat a = l_factor.lower.triangularView<Eigen::Lower>().solve(cross);
  a /= std::sqrt(gamma);
  if (!a.allFinite()) throw NumericalFailureError("non-finite entries in A = gamma^-1/2 L^-1 B");

  Mat inner = a * a.transpose();
  inner.diagonal().array() += 1.0;
  if (!inner.allFinite()) {
    throw NumericalFailureError("I + A A^T overflowed; the Gram factor is effectively singular");
  }
  // When kappa(A)^2 exceeds 1/eps the trailing pivots of I + A A^T sit below
  // the rounding noise of its largest entries and the factorization can break
  // down; a relative shift at rounding scale restores it without changing any
  // direction that double precision can represent.
  double shift = 0.0;
  const double scale = inner.diagonal().maxCoeff();
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Mat shifted = inner;
    shifted.diagonal().array() += shift * scale;
    Eigen::LLT<Mat> llt(std::move(shifted));
    if (llt.info() == Eigen::Success) {
      return LowRankInverse(std::move(a), Mat(llt.matrixL()), gamma);
    }
    shift = shift == 0.0 ? 1e-15 : shift * 10.0;
  }
  throw NumericalFailureError("I + A A^T failed to factorize despite shifts");
}

Vec LowRankInverse::apply_inverse(const Vec& v) const {
  if (v.size() != n()) throw std::invalid_argument("vector length mismatch in apply_inverse");
  Vec t = a_ * v;
  j_.triangularView<Eigen::Lower>().solveInPlace(t);
  j_.transpose().triangularView<Eigen::Upper>().solveInPlace(t);
  return (v - a_.transpose() * t) / gamma_;
}

Mat LowRankInverse::apply_inverse(const Mat& v) const {
  if (v.rows() != n()) throw std::invalid_argument("matrix rows mismatch in apply_inverse");
  Mat t = a_ * v;
  j_.triangularView<Eigen::Lower>().solveInPlace(t);
  j_.transpose().triangularView<Eigen::Upper>().solveInPlace(t);
  return (v - a_.transpose() * t) / gamma_;
}

double LowRankInverse::quad_form(const Vec& z) const {
  if (z.size() != n()) throw std::invalid_argument("vector length mismatch in quad_form");
  Vec t = a_ * z;
  j_.triangularView<Eigen::Lower>().solveInPlace(t);
  // z^T Sigma^-1 z = (|z|^2 - |J^-1 A z|^2) / gamma, nonnegative because the
  // eigenvalues of A^T (I + A A^T)^-1 A lie in [0, 1).
  return (z.squaredNorm() - t.squaredNorm()) / gamma_;
}

double LowRankInverse::log_det() const {
  return static_cast<double>(n()) * std::log(gamma_) +
         2.0 * j_.diagonal().array().log().sum();
}

double LowRankInverse::trace_correction(const Vec& psi_diag) const {
  if (psi_diag.size() != n()) throw std::invalid_argument("psi_diag length mismatch");
  return psi_diag.sum() - gamma_ * a_.squaredNorm();
}

}  // namespace sgpde
