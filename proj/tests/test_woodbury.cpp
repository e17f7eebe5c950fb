#include <doctest.h>

#include "sgpde/woodbury.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace sgpde;

namespace {

double unit(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

Mat random_dense(int r, int c, std::mt19937_64& eng) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = 2.0 * unit(eng) - 1.0;
  return m;
}

// Well-conditioned SPD factor: theta = I + W W^T / r keeps kappa(theta) modest
// so the dense oracle itself stays accurate to ~1e-12.
Mat random_lower(int r, std::mt19937_64& eng) {
  const Mat w = random_dense(r, r, eng);
  Mat theta = Mat::Identity(r, r) + (w * w.transpose()) / static_cast<double>(r);
  return Mat(theta.llt().matrixL());
}

}  // namespace

TEST_CASE("factorized inverse matches the dense oracle on random instances") {
  std::mt19937_64 eng(2024);
  const double gammas[] = {1e-2, 1e-6};
  for (int rep = 0; rep < 20; ++rep) {
    const int r = 5 + static_cast<int>(unit(eng) * 46);    // rank <= 50
    const int n = r + static_cast<int>(unit(eng) * (200 - r));  // n <= 200
    const double gamma = gammas[rep % 2];
    CAPTURE(rep);
    CAPTURE(r);
    CAPTURE(n);
    CAPTURE(gamma);

    CholeskyFactor lf;
    lf.lower = random_lower(r, eng);
    const Mat cross = random_dense(r, n, eng) / std::sqrt(static_cast<double>(n));
    const LowRankInverse lri = LowRankInverse::factorize(lf, cross, gamma);
    CHECK(lri.n() == n);
    CHECK(lri.rank() == r);
    CHECK(lri.gamma() == gamma);

    // dense oracle: M = gamma I + B^T (L L^T)^-1 B via a full factorization
    const Mat theta = lf.lower * lf.lower.transpose();
    Mat m = cross.transpose() * theta.llt().solve(cross);
    m.diagonal().array() += gamma;
    const Eigen::LLT<Mat> dense(m);
    REQUIRE(dense.info() == Eigen::Success);

    const Vec v = random_dense(n, 1, eng);
    const Vec got = lri.apply_inverse(v);
    const Vec want = dense.solve(v);
    CHECK((got - want).norm() <= 1e-8 * want.norm());

    const double qf = lri.quad_form(v);
    const double qf_want = v.dot(want);
    CHECK(std::abs(qf - qf_want) <= 1e-8 * std::abs(qf_want));

    double ld_want = 0.0;
    for (int i = 0; i < n; ++i) ld_want += 2.0 * std::log(dense.matrixLLT()(i, i));
    CHECK(std::abs(lri.log_det() - ld_want) <= 1e-8 * std::abs(ld_want));

    const Vec psi_diag = random_dense(n, 1, eng).cwiseAbs() + Vec::Ones(n);
    const double tc_want = psi_diag.sum() - (m.trace() - gamma * n);
    CHECK(std::abs(lri.trace_correction(psi_diag) - tc_want) <=
          1e-8 * (std::abs(tc_want) + psi_diag.sum()));
  }
}

TEST_CASE("zero cross term degenerates to scaling by 1/gamma") {
  CholeskyFactor lf;
  lf.lower = Mat::Identity(4, 4);
  const Mat cross = Mat::Zero(4, 10);
  const double gamma = 1e-3;
  const LowRankInverse lri = LowRankInverse::factorize(lf, cross, gamma);
  Vec v(10);
  for (int i = 0; i < 10; ++i) v(i) = i + 1;
  CHECK((lri.apply_inverse(v) - v / gamma).lpNorm<Eigen::Infinity>() <= 1e-14 * v.norm() / gamma);
  CHECK(lri.quad_form(v) == doctest::Approx(v.squaredNorm() / gamma).epsilon(1e-14));
  CHECK(lri.log_det() == doctest::Approx(10 * std::log(gamma)).epsilon(1e-14));
}

TEST_CASE("identity blocks reproduce the closed-form rank-one structure") {
  // theta = I, B = I (square): Q = I, so gamma I + Q = (1 + gamma) I
  const int n = 6;
  CholeskyFactor lf;
  lf.lower = Mat::Identity(n, n);
  const double gamma = 0.5;
  const LowRankInverse lri = LowRankInverse::factorize(lf, Mat::Identity(n, n), gamma);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = std::sin(i + 1.0);
  CHECK((lri.apply_inverse(v) - v / (1.0 + gamma)).lpNorm<Eigen::Infinity>() <= 1e-14);
  CHECK(lri.quad_form(v) == doctest::Approx(v.squaredNorm() / (1.0 + gamma)).epsilon(1e-14));
  CHECK(lri.log_det() == doctest::Approx(n * std::log(1.0 + gamma)).epsilon(1e-14));
  const Vec ones = Vec::Ones(n);
  CHECK(lri.trace_correction(ones) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("invalid gamma is rejected") {
  CholeskyFactor lf;
  lf.lower = Mat::Identity(3, 3);
  CHECK_THROWS_AS(LowRankInverse::factorize(lf, Mat::Zero(3, 5), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(LowRankInverse::factorize(lf, Mat::Zero(3, 5), -1.0), std::invalid_argument);
}
