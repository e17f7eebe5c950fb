#include <doctest.h>

#include "sgpde/reference.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

using namespace sgpde;

namespace {

double unit(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = "test_reference_tmp_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("cole-hopf reference: pinned values and symmetries") {
  const double nu = 0.02;
  // odd initial datum keeps u(t, 0) = 0 for all time
  for (double t : {0.0, 1e-4, 0.05, 0.3, 1.0}) {
    CHECK(std::abs(cole_hopf_burgers(t, 0.0, nu)) <= 1e-10);
  }
  // the steep interior layer has barely moved at t = 1e-4
  CHECK(cole_hopf_burgers(1e-4, 0.5, nu) == doctest::Approx(-1.0).epsilon(1e-2));
  // initial datum
  std::mt19937_64 eng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const double x = 2.0 * unit(eng) - 1.0;
    CHECK(cole_hopf_burgers(0.0, x, nu) == doctest::Approx(-std::sin(M_PI * x)).epsilon(1e-14));
  }
  // odd symmetry in x at 20 random points
  for (int rep = 0; rep < 20; ++rep) {
    const double t = unit(eng);
    const double x = 2.0 * unit(eng) - 1.0;
    CHECK(std::abs(cole_hopf_burgers(t, -x, nu) + cole_hopf_burgers(t, x, nu)) <= 1e-10);
  }
  // quadrature is converged: doubling the nodes moves nothing
  for (int rep = 0; rep < 10; ++rep) {
    const double t = 0.05 + 0.95 * unit(eng);
    const double x = 2.0 * unit(eng) - 1.0;
    CHECK(std::abs(cole_hopf_burgers(t, x, nu, 100) - cole_hopf_burgers(t, x, nu, 200)) <= 1e-6);
  }
}

TEST_CASE("evaluation grids include endpoints and drop periodic duplicates") {
  Domain square;
  square.bounds = {{{0.0, 3.0}, {0.0, 3.0}}};
  const auto pts = make_grid(square, 60);
  CHECK(pts.size() == 3600);
  double lo0 = 1e9, hi0 = -1e9;
  for (const auto& p : pts) {
    lo0 = std::min(lo0, p[0]);
    hi0 = std::max(hi0, p[0]);
  }
  CHECK(lo0 == 0.0);
  CHECK(hi0 == 3.0);

  Domain torus;
  torus.bounds = {{{-0.5, 0.5}, {-0.5, 0.5}}};
  torus.periodic = {true, true};
  const auto tp = make_grid(torus, 60);
  CHECK(tp.size() == 3600);
  for (const auto& p : tp) {
    CHECK(p[0] < 0.5);  // wrap point excluded
    CHECK(p[1] < 0.5);
  }
}

TEST_CASE("sup-norm error on the grid matches a direct scan") {
  Domain square;
  square.bounds = {{{0.0, 1.0}, {0.0, 1.0}}};
  auto model = [](const Point& p) { return p[0] + p[1]; };
  auto ref = [](const Point& p) { return p[0] + p[1] + 0.25 * std::sin(M_PI * p[0]); };
  const GridError ge = linf_on_grid(model, ref, square, 30);
  CHECK(ge.errors.size() == 900);
  CHECK(ge.grid_points.size() == 900);
  double want = 0.0;
  for (const auto& p : ge.grid_points) want = std::max(want, std::abs(model(p) - ref(p)));
  CHECK(ge.max_error == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("low-rank residual norm matches a dense eigenvalue oracle") {
  std::mt19937_64 eng(47);
  for (int rep = 0; rep < 5; ++rep) {
    const int r = 6 + rep, n = 25 + 5 * rep;
    Mat w(r, r), b(r, n);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) w(i, j) = 2.0 * unit(eng) - 1.0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = 2.0 * unit(eng) - 1.0;
    CholeskyFactor lf;
    lf.lower = Mat(Mat(Mat::Identity(r, r) + w * w.transpose() / r).llt().matrixL());
    const LowRankInverse lri = LowRankInverse::factorize(lf, b, 1e-2);

    const Mat theta = lf.lower * lf.lower.transpose();
    const Mat q = b.transpose() * theta.llt().solve(b);
    // pretend psi Gram = Q + a rank-1 spike; residual norm is the spike size
    Vec v = Vec::Zero(n);
    v(0) = 1.0;
    v(n - 1) = -1.0;
    const double spike = 0.7;
    const Mat dense = q + spike * (v * v.transpose());
    const NystromError ne = nystrom_error(dense, lri);
    CHECK(ne.converged);
    const Eigen::SelfAdjointEigenSolver<Mat> es(dense - q, Eigen::EigenvaluesOnly);
    const double want = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(ne.value == doctest::Approx(want).epsilon(1e-5));
  }
}

TEST_CASE("reference grids ingest, interpolate, and reject broken lattices") {
  TempFile good(
      "0,0,1\n"
      "0,1,2\n"
      "0,2,3\n"
      "1,0,4\n"
      "1,1,5\n"
      "1,2,6\n");
  const ReferenceGrid g = ReferenceGrid::ingest(good.path);
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 3);
  // exact at lattice points
  CHECK(g(Point(0.0, 0.0)) == 1.0);
  CHECK(g(Point(1.0, 2.0)) == 6.0);
  // bilinear in between (values are affine in the indices here)
  CHECK(g(Point(0.5, 0.5)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(g(Point(0.25, 1.5)) == doctest::Approx(3.25).epsilon(1e-12));

  TempFile incomplete(
      "0,0,1\n"
      "0,1,2\n"
      "1,0,4\n");
  CHECK_THROWS_AS(ReferenceGrid::ingest(incomplete.path), IngestionError);
  CHECK_THROWS_AS(ReferenceGrid::ingest("does_not_exist.csv"), IngestionError);
}
