#include <doctest.h>

#include "sgpde/gram.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace sgpde;

namespace {

struct Setup {
  SampleSet samples;
  InducingSet inducing;
  FunctionalVector psi;
  FunctionalVector phi;
  KernelSpec kernel = KernelSpec::gaussian_iso(0.2);
};

Setup make_setup(int n, int m, std::uint64_t seed) {
  Domain d;
  d.bounds = {{{0.0, 3.0}, {0.0, 3.0}}};
  OperatorLayout layout;
  layout.boundary_ops = {{"dirichlet", DiffOp::identity()}};
  layout.interior_ops = {{"id", DiffOp::identity()}, {"grad_sum", DiffOp::sum_d1()},
                         {"lap", DiffOp::laplacian()}};
  Setup s;
  s.samples = sample_collocation(d, n, 0.75, seed);
  s.inducing = select_inducing(s.samples, m, 0.75, seed);
  s.psi = build_functionals(layout, s.samples.interior, s.samples.boundary);
  s.phi = build_inducing_functionals(layout, s.samples, s.inducing);
  return s;
}

}  // namespace

TEST_CASE("theta is symmetric with nearly nonnegative spectrum") {
  const Setup s = make_setup(80, 40, 5);
  const Mat theta = assemble_theta(s.kernel, s.phi);
  CHECK(theta.rows() == s.phi.size());
  CHECK((theta - theta.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  const Eigen::SelfAdjointEigenSolver<Mat> es(theta, Eigen::EigenvaluesOnly);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * scale);
}

TEST_CASE("cross and diagonal agree with the dense psi Gram matrix") {
  const Setup s = make_setup(60, 30, 9);
  const Mat theta = assemble_theta(s.kernel, s.phi);
  const Mat cross = assemble_cross(s.kernel, s.phi, s.psi);
  const Vec diag = assemble_psi_diag(s.kernel, s.psi);
  const Mat dense = assemble_dense_psi(s.kernel, s.psi);
  CHECK(cross.rows() == s.phi.size());
  CHECK(cross.cols() == s.psi.size());
  CHECK((dense.diagonal() - diag).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);

  // every phi functional is also a psi functional; its theta row must appear
  // verbatim as a cross row restricted to the matching psi columns
  for (int i = 0; i < s.phi.size(); ++i) {
    for (int j = 0; j < s.phi.size(); ++j) {
      const double via_cross =
          bilinear_eval(s.kernel, s.phi.entries[static_cast<size_t>(i)],
                        s.phi.entries[static_cast<size_t>(j)]);
      CHECK(theta(i, j) == via_cross);
    }
  }
}

TEST_CASE("nugget scales are the mean Gram diagonal per block, clamped positive") {
  const Setup s = make_setup(80, 40, 3);
  const Mat theta = assemble_theta(s.kernel, s.phi);
  const NuggetSpec nugget = build_nugget(theta, s.phi.layout, 1e-6);
  CHECK(nugget.eta == 1e-6);
  CHECK(nugget.block_scales.size() == s.phi.layout.size());
  for (size_t b = 0; b < s.phi.layout.size(); ++b) {
    const auto& blk = s.phi.layout[b];
    const double mean = theta.diagonal().segment(blk.start, blk.length).mean();
    CHECK(nugget.block_scales[b] == doctest::Approx(std::max(mean, 1e-12)).epsilon(1e-14));
    CHECK(nugget.block_scales[b] > 0.0);
  }
  const Vec r = nugget.expanded_diagonal();
  CHECK(r.size() == theta.rows());
  for (size_t b = 0; b < s.phi.layout.size(); ++b) {
    const auto& blk = s.phi.layout[b];
    for (int i = 0; i < blk.length; ++i) CHECK(r(blk.start + i) == nugget.block_scales[b]);
  }
}

TEST_CASE("cholesky reconstructs theta + eta R") {
  const Setup s = make_setup(100, 50, 13);
  const Mat theta = assemble_theta(s.kernel, s.phi);
  const NuggetSpec nugget = build_nugget(theta, s.phi.layout, 1e-8);
  const CholeskyFactor f = cholesky_theta(theta, nugget);
  CHECK(f.eta_used >= 1e-8);
  Mat target = theta;
  target.diagonal() += f.eta_used * nugget.expanded_diagonal();
  const Mat rec = f.lower * f.lower.transpose();
  CHECK((rec - target).lpNorm<Eigen::Infinity>() <=
        1e-8 * target.diagonal().maxCoeff());
  // strictly lower triangular factor
  for (int i = 0; i < f.lower.rows(); ++i)
    for (int j = i + 1; j < f.lower.cols(); ++j) CHECK(f.lower(i, j) == 0.0);
}

TEST_CASE("eta escalates by powers of ten when the factorization fails") {
  // a singular matrix (rank 1) forces escalation from eta = 0
  Mat theta = Mat::Ones(6, 6);
  std::vector<BlockInfo> layout{{"all", 0, 6}};
  const NuggetSpec nugget = build_nugget(theta, layout, 0.0);
  const CholeskyFactor f = cholesky_theta(theta, nugget);
  CHECK(f.eta_used > 0.0);
  Mat target = theta;
  target.diagonal() += f.eta_used * nugget.expanded_diagonal();
  CHECK((f.lower * f.lower.transpose() - target).lpNorm<Eigen::Infinity>() <= 1e-10);

  // an indefinite matrix stays indefinite under small shifts: hard failure
  Mat bad = Mat::Identity(4, 4);
  bad(2, 2) = -5.0;
  const NuggetSpec small = build_nugget(Mat::Identity(4, 4), {{"all", 0, 4}}, 1e-10);
  CHECK_THROWS_AS(cholesky_theta(bad, small), NumericalFailureError);
}
