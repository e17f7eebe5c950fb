#include "sgpde/gram.hpp"

#include <cmath>

namespace sgpde {

Vec NuggetSpec::expanded_diagonal() const {
  int total = 0;
  for (const auto& b : layout) total = std::max(total, b.start + b.length);
  Vec r = Vec::Zero(total);
  for (size_t b = 0; b < layout.size(); ++b) {
    r.segment(layout[b].start, layout[b].length).setConstant(block_scales[b]);
  }
  return r;
}

Mat assemble_theta(const KernelSpec& kernel, const FunctionalVector& phi) {
  const int r = phi.size();
  if (r == 0) throw std::invalid_argument("phi must be nonempty");
  Mat theta(r, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double v = bilinear_eval(kernel, phi.entries[static_cast<size_t>(i)],
                                     phi.entries[static_cast<size_t>(j)]);
      theta(i, j) = v;
      theta(j, i) = v;
    }
  }
  return theta;
}

Mat assemble_cross(const KernelSpec& kernel, const FunctionalVector& phi,
                   const FunctionalVector& psi) {
  const int r = phi.size();
  const int n = psi.size();
  Mat cross(r, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < r; ++i) {
      cross(i, j) = bilinear_eval(kernel, phi.entries[static_cast<size_t>(i)],
                                  psi.entries[static_cast<size_t>(j)]);
    }
  }
  return cross;
}

Vec assemble_psi_diag(const KernelSpec& kernel, const FunctionalVector& psi) {
  const int n = psi.size();
  Vec d(n);
  for (int j = 0; j < n; ++j) {
    const auto& f = psi.entries[static_cast<size_t>(j)];
    d(j) = bilinear_eval(kernel, f, f);
  }
  return d;
}

Mat assemble_dense_psi(const KernelSpec& kernel, const FunctionalVector& psi) {
  return assemble_theta(kernel, psi);
}

NuggetSpec build_nugget(const Mat& theta, const std::vector<BlockInfo>& layout, double eta) {
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  NuggetSpec spec;
  spec.eta = eta;
  spec.layout = layout;
  spec.block_scales.reserve(layout.size());
  for (const auto& b : layout) {
    if (b.start < 0 || b.start + b.length > theta.rows()) {
      throw std::invalid_argument("nugget layout does not partition theta");
    }
    const double mean = theta.diagonal().segment(b.start, b.length).mean();
    spec.block_scales.push_back(std::max(mean, 1e-300));
  }
  return spec;
}

CholeskyFactor cholesky_theta(const Mat& theta, const NuggetSpec& nugget) {
  const Vec r = nugget.expanded_diagonal();
  if (r.size() != theta.rows()) throw std::invalid_argument("nugget layout size mismatch");
  double eta = nugget.eta;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Mat reg = theta;
    reg.diagonal() += eta * r;
    Eigen::LLT<Mat> llt(reg);
    if (llt.info() == Eigen::Success) {
      CholeskyFactor f;
      f.lower = llt.matrixL();
      f.eta_used = eta;
      return f;
    }
    eta = eta == 0.0 ? 1e-16 : eta * 10.0;
  }
  throw NumericalFailureError("K(phi,phi) not positive definite after nugget escalation to eta=" +
                              std::to_string(eta / 10.0));
}

}  // namespace sgpde
