#include "sgpde/problems.hpp"

#include <cmath>

namespace sgpde {

namespace {

using Triplet = Eigen::Triplet<double>;

Vec interior_values(const SampleSet& s, const std::function<double(const Point&)>& fn) {
  Vec v(static_cast<Eigen::Index>(s.interior.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = fn(s.interior[static_cast<size_t>(i)]);
  return v;
}

Vec boundary_values(const SampleSet& s, const std::function<double(const Point&)>& fn) {
  Vec v(static_cast<Eigen::Index>(s.boundary.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = fn(s.boundary[static_cast<size_t>(i)]);
  return v;
}

}  // namespace

double elliptic_exact(const Point& x) {
  return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]) +
         4.0 * std::sin(4.0 * M_PI * x[0]) * std::sin(4.0 * M_PI * x[1]);
}

double elliptic_forcing(const Point& x) {
  const double s1 = std::sin(M_PI * x[0]), c1 = std::cos(M_PI * x[0]);
  const double s2 = std::sin(M_PI * x[1]), c2 = std::cos(M_PI * x[1]);
  const double s41 = std::sin(4.0 * M_PI * x[0]), c41 = std::cos(4.0 * M_PI * x[0]);
  const double s42 = std::sin(4.0 * M_PI * x[1]), c42 = std::cos(4.0 * M_PI * x[1]);
  const double u = s1 * s2 + 4.0 * s41 * s42;
  const double ux = M_PI * c1 * s2 + 16.0 * M_PI * c41 * s42;
  const double uy = M_PI * s1 * c2 + 16.0 * M_PI * s41 * c42;
  const double lap = -2.0 * M_PI * M_PI * s1 * s2 - 128.0 * M_PI * M_PI * s41 * s42;
  // Delta u = u (u_x1 + u_x2) + f
  return lap - u * (ux + uy);
}

double parabolic_exact(const Point& tx) {
  const double t = tx[0], x = tx[1];
  return (std::sin(M_PI * x) + 2.0 * std::cos(2.0 * M_PI * x)) * std::exp(-t);
}

double parabolic_forcing(const Point& tx) {
  const double t = tx[0], x = tx[1];
  const double e = std::exp(-t);
  const double u = (std::sin(M_PI * x) + 2.0 * std::cos(2.0 * M_PI * x)) * e;
  const double ut = -u;
  const double ux = (M_PI * std::cos(M_PI * x) - 4.0 * M_PI * std::sin(2.0 * M_PI * x)) * e;
  const double uxx =
      (-M_PI * M_PI * std::sin(M_PI * x) - 8.0 * M_PI * M_PI * std::cos(2.0 * M_PI * x)) * e;
  // dt u - dxx u + |dx u|^2/2 + u + x dx u = f
  return ut - uxx + 0.5 * ux * ux + u + x * ux;
}

double mfg_potential(const Point& x) {
  return 0.5 * (std::sin(4.0 * M_PI * x[0]) + std::cos(4.0 * M_PI * x[0]) +
                std::sin(4.0 * M_PI * x[1]));
}

BuiltProblem elliptic_problem(int n, int m, double ratio, double sigma, std::uint64_t seed) {
  BuiltProblem bp;
  bp.spec.name = "elliptic";
  bp.spec.domain.bounds = {{{0.0, 3.0}, {0.0, 3.0}}};
  bp.spec.interior_ratio = ratio;
  bp.spec.kernel = KernelSpec::gaussian_iso(sigma);
  bp.spec.layout.boundary_ops = {{"dirichlet", DiffOp::identity()}};
  bp.spec.layout.interior_ops = {{"id", DiffOp::identity()},
                                 {"sum_d1", DiffOp::sum_d1()},
                                 {"lap", DiffOp::laplacian()}};
  bp.samples = sample_collocation(bp.spec.domain, n, ratio, seed);
  bp.inducing = select_inducing(bp.samples, m, ratio, seed);
  bp.psi = build_functionals(bp.spec.layout, bp.samples.interior, bp.samples.boundary);
  bp.phi = build_inducing_functionals(bp.spec.layout, bp.samples, bp.inducing);
  bp.exact = elliptic_exact;

  const int n_int = static_cast<int>(bp.samples.interior.size());
  const int n_bnd = static_cast<int>(bp.samples.boundary.size());
  const Vec f = interior_values(bp.samples, elliptic_forcing);
  const Vec g = Vec::Zero(n_bnd);

  bp.elim.free_dim = 2 * n_int;
  bp.elim.z_dim = n_bnd + 3 * n_int;
  bp.elim.z_of_w = [n_int, n_bnd, f, g](const Vec& w) {
    Vec z(n_bnd + 3 * n_int);
    const auto w1 = w.head(n_int);
    const auto w2 = w.tail(n_int);
    z.head(n_bnd) = g;
    z.segment(n_bnd, n_int) = w1;
    z.segment(n_bnd + n_int, n_int) = w2;
    z.tail(n_int) = w1.cwiseProduct(w2) + f;
    return z;
  };
  bp.elim.jacobian = [n_int, n_bnd](const Vec& w) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(4 * n_int));
    for (int i = 0; i < n_int; ++i) {
      trip.emplace_back(n_bnd + i, i, 1.0);
      trip.emplace_back(n_bnd + n_int + i, n_int + i, 1.0);
      trip.emplace_back(n_bnd + 2 * n_int + i, i, w(n_int + i));
      trip.emplace_back(n_bnd + 2 * n_int + i, n_int + i, w(i));
    }
    SpMat j(n_bnd + 3 * n_int, 2 * n_int);
    j.setFromTriplets(trip.begin(), trip.end());
    return j;
  };
  // Constraint rows: z_dirichlet = g and z_lap - z_id z_d1 - f = 0, linearized
  bp.elim.constraints = [n_int, n_bnd](const Vec& w) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(n_bnd + 3 * n_int));
    for (int i = 0; i < n_bnd; ++i) trip.emplace_back(i, i, 1.0);
    for (int i = 0; i < n_int; ++i) {
      trip.emplace_back(n_bnd + i, n_bnd + i, -w(n_int + i));
      trip.emplace_back(n_bnd + i, n_bnd + n_int + i, -w(i));
      trip.emplace_back(n_bnd + i, n_bnd + 2 * n_int + i, 1.0);
    }
    SpMat g(n_bnd + n_int, n_bnd + 3 * n_int);
    g.setFromTriplets(trip.begin(), trip.end());
    return g;
  };
  bp.elim.w_of_z = [n_int, n_bnd](const Vec& z) {
    Vec w(2 * n_int);
    w.head(n_int) = z.segment(n_bnd, n_int);
    w.tail(n_int) = z.segment(n_bnd + n_int, n_int);
    return w;
  };
  return bp;
}

namespace {

// Shared scaffolding for the two space-time problems: boundary Dirichlet
// block, then interior [id, dx, dxx, dt] with the dt block eliminated.
BuiltProblem space_time_problem(const std::string& name, double x_low, double x_high,
                                double ratio, double sigma_t, double sigma_x,
                                int n, int m, std::uint64_t seed) {
  BuiltProblem bp;
  bp.spec.name = name;
  bp.spec.domain.bounds = {{{0.0, 1.0}, {x_low, x_high}}};
  bp.spec.domain.time_axis = 0;
  bp.spec.interior_ratio = ratio;
  bp.spec.kernel = KernelSpec::gaussian_aniso(sigma_t, sigma_x);
  bp.spec.layout.boundary_ops = {{"dirichlet", DiffOp::identity()}};
  bp.spec.layout.interior_ops = {{"id", DiffOp::identity()},
                                 {"dx", DiffOp::d1(1)},
                                 {"dxx", DiffOp::d2(1)},
                                 {"dt", DiffOp::d1(0)}};
  bp.samples = sample_collocation(bp.spec.domain, n, ratio, seed);
  bp.inducing = select_inducing(bp.samples, m, ratio, seed);
  bp.psi = build_functionals(bp.spec.layout, bp.samples.interior, bp.samples.boundary);
  bp.phi = build_inducing_functionals(bp.spec.layout, bp.samples, bp.inducing);
  return bp;
}

}  // namespace

BuiltProblem burgers_problem(int n, int m, double sigma_t, double sigma_x, double nu,
                             std::uint64_t seed) {
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity nu must be positive");
  auto bc = [](const Point& p) { return p[0] == 0.0 ? -std::sin(M_PI * p[1]) : 0.0; };
  BuiltProblem bp = space_time_problem("burgers", -1.0, 1.0, 5.0 / 6.0, sigma_t, sigma_x, n, m,
                                       seed);
  bp.spec.nu = nu;

  const int n_int = static_cast<int>(bp.samples.interior.size());
  const int n_bnd = static_cast<int>(bp.samples.boundary.size());
  const Vec g = boundary_values(bp.samples, bc);

  bp.elim.free_dim = 3 * n_int;
  bp.elim.z_dim = n_bnd + 4 * n_int;
  bp.elim.z_of_w = [n_int, n_bnd, g, nu](const Vec& w) {
    Vec z(n_bnd + 4 * n_int);
    const auto u = w.head(n_int);
    const auto ux = w.segment(n_int, n_int);
    const auto uxx = w.tail(n_int);
    z.head(n_bnd) = g;
    z.segment(n_bnd, n_int) = u;
    z.segment(n_bnd + n_int, n_int) = ux;
    z.segment(n_bnd + 2 * n_int, n_int) = uxx;
    // viscous Burgers: dt u = nu dxx u - u dx u
    z.tail(n_int) = nu * uxx - u.cwiseProduct(ux);
    return z;
  };
  bp.elim.jacobian = [n_int, n_bnd, nu](const Vec& w) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(6 * n_int));
    for (int i = 0; i < n_int; ++i) {
      trip.emplace_back(n_bnd + i, i, 1.0);
      trip.emplace_back(n_bnd + n_int + i, n_int + i, 1.0);
      trip.emplace_back(n_bnd + 2 * n_int + i, 2 * n_int + i, 1.0);
      trip.emplace_back(n_bnd + 3 * n_int + i, i, -w(n_int + i));
      trip.emplace_back(n_bnd + 3 * n_int + i, n_int + i, -w(i));
      trip.emplace_back(n_bnd + 3 * n_int + i, 2 * n_int + i, nu);
    }
    SpMat j(n_bnd + 4 * n_int, 3 * n_int);
    j.setFromTriplets(trip.begin(), trip.end());
    return j;
  };
  // Constraint rows: z_dirichlet = g and z_dt - nu z_dxx + z_id z_dx = 0
  bp.elim.constraints = [n_int, n_bnd, nu](const Vec& w) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(n_bnd + 4 * n_int));
    for (int i = 0; i < n_bnd; ++i) trip.emplace_back(i, i, 1.0);
    for (int i = 0; i < n_int; ++i) {
      trip.emplace_back(n_bnd + i, n_bnd + i, w(n_int + i));
      trip.emplace_back(n_bnd + i, n_bnd + n_int + i, w(i));
      trip.emplace_back(n_bnd + i, n_bnd + 2 * n_int + i, -nu);
      trip.emplace_back(n_bnd + i, n_bnd + 3 * n_int + i, 1.0);
    }
    SpMat g(n_bnd + n_int, n_bnd + 4 * n_int);
    g.setFromTriplets(trip.begin(), trip.end());
    return g;
  };
  bp.elim.w_of_z = [n_int, n_bnd](const Vec& z) {
    return Vec(z.segment(n_bnd, 3 * n_int));
  };
  return bp;
}

BuiltProblem parabolic_problem(int n, int m, double sigma_t, double sigma_x, std::uint64_t seed) {
  auto bc = [](const Point& p) { return parabolic_exact(p); };
  BuiltProblem bp = space_time_problem("parabolic", 0.0, 1.5, 6.0 / 7.0, sigma_t, sigma_x, n, m,
                                       seed);
  bp.exact = parabolic_exact;

  const int n_int = static_cast<int>(bp.samples.interior.size());
  const int n_bnd = static_cast<int>(bp.samples.boundary.size());
  const Vec g = boundary_values(bp.samples, bc);
  const Vec f = interior_values(bp.samples, parabolic_forcing);
  Vec xs(n_int);
  for (int i = 0; i < n_int; ++i) xs(i) = bp.samples.interior[static_cast<size_t>(i)][1];

  bp.elim.free_dim = 3 * n_int;
  bp.elim.z_dim = n_bnd + 4 * n_int;
  bp.elim.z_of_w = [n_int, n_bnd, g, f, xs](const Vec& w) {
    Vec z(n_bnd + 4 * n_int);
    const auto u = w.head(n_int);
    const auto ux = w.segment(n_int, n_int);
    const auto uxx = w.tail(n_int);
    z.head(n_bnd) = g;
    z.segment(n_bnd, n_int) = u;
    z.segment(n_bnd + n_int, n_int) = ux;
    z.segment(n_bnd + 2 * n_int, n_int) = uxx;
    // dt u = dxx u - |dx u|^2/2 - u - x dx u + f
    z.tail(n_int) =
        uxx - 0.5 * ux.cwiseProduct(ux) - u - xs.cwiseProduct(ux) + f;
    return z;
  };
  bp.elim.jacobian = [n_int, n_bnd, xs](const Vec& w) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(6 * n_int));
    for (int i = 0; i < n_int; ++i) {
      trip.emplace_back(n_bnd + i, i, 1.0);
      trip.emplace_back(n_bnd + n_int + i, n_int + i, 1.0);
      trip.emplace_back(n_bnd + 2 * n_int + i, 2 * n_int + i, 1.0);
      trip.emplace_back(n_bnd + 3 * n_int + i, i, -1.0);
      trip.emplace_back(n_bnd + 3 * n_int + i, n_int + i, -w(n_int + i) - xs(i));
      trip.emplace_back(n_bnd + 3 * n_int + i, 2 * n_int + i, 1.0);
    }
    SpMat j(n_bnd + 4 * n_int, 3 * n_int);
    j.setFromTriplets(trip.begin(), trip.end());
    return j;
  };
  // Constraint rows: z_dirichlet = g and
  // z_dt - z_dxx + |z_dx|^2/2 + z_id + x z_dx - f = 0
  bp.elim.constraints = [n_int, n_bnd, xs](const Vec& w) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(n_bnd + 4 * n_int));
    for (int i = 0; i < n_bnd; ++i) trip.emplace_back(i, i, 1.0);
    for (int i = 0; i < n_int; ++i) {
      trip.emplace_back(n_bnd + i, n_bnd + i, 1.0);
      trip.emplace_back(n_bnd + i, n_bnd + n_int + i, w(n_int + i) + xs(i));
      trip.emplace_back(n_bnd + i, n_bnd + 2 * n_int + i, -1.0);
      trip.emplace_back(n_bnd + i, n_bnd + 3 * n_int + i, 1.0);
    }
    SpMat g(n_bnd + n_int, n_bnd + 4 * n_int);
    g.setFromTriplets(trip.begin(), trip.end());
    return g;
  };
  bp.elim.w_of_z = [n_int, n_bnd](const Vec& z) {
    return Vec(z.segment(n_bnd, 3 * n_int));
  };
  return bp;
}

BuiltProblem mfg_problem(int n, int m, double nu, std::uint64_t seed) {
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity nu must be positive");
  BuiltProblem bp;
  bp.spec.name = "mfg";
  bp.spec.domain.bounds = {{{-0.5, 0.5}, {-0.5, 0.5}}};
  bp.spec.domain.periodic = {true, true};
  bp.spec.interior_ratio = 1.0;
  bp.spec.kernel = KernelSpec::periodic_exp(1.0);
  bp.spec.nu = nu;
  bp.spec.layout.interior_ops = {{"id", DiffOp::identity()},
                                 {"dx1", DiffOp::d1(0)},
                                 {"dx2", DiffOp::d1(1)},
                                 {"lap", DiffOp::laplacian()}};
  bp.samples = sample_collocation(bp.spec.domain, n, 1.0, seed);
  bp.inducing = select_inducing(bp.samples, m, 1.0, seed);
  bp.psi = build_functionals(bp.spec.layout, bp.samples.interior, bp.samples.boundary);
  bp.phi = build_inducing_functionals(bp.spec.layout, bp.samples, bp.inducing);

  auto model = std::make_shared<MfgModel>();
  model->n_points = n;
  model->nu = nu;
  model->potential = interior_values(bp.samples, mfg_potential);

  const int nn = n;
  const int z_dim = 8 * nn;       // [z_u (4N); z_m (4N)]
  const int free_dim = z_dim - 1; // two eliminated entries, plus lambda

  // Extended elimination matrix: [z_full; lambda] = E_ext * w + c.
  // Free layout: z_u entries except id index N-1, z_m entries except id
  // index N-1, then lambda.
  std::vector<Triplet> etrip;
  Vec c = Vec::Zero(z_dim + 1);
  c(4 * nn + nn - 1) = static_cast<double>(nn);  // mean rho^(1) = 1
  int col = 0;
  for (int half = 0; half < 2; ++half) {
    const int off = half * 4 * nn;
    for (int g = 0; g < 4 * nn; ++g) {
      if (g == nn - 1) continue;  // eliminated id entry
      etrip.emplace_back(off + g, col, 1.0);
      if (g < nn - 1) etrip.emplace_back(off + nn - 1, col, -1.0);
      ++col;
    }
  }
  etrip.emplace_back(z_dim, free_dim - 1, 1.0);  // lambda
  auto e_ext = std::make_shared<SpMat>(z_dim + 1, free_dim);
  e_ext->setFromTriplets(etrip.begin(), etrip.end());
  auto c_shared = std::make_shared<Vec>(std::move(c));

  model->elim.free_dim = free_dim;
  model->elim.z_dim = z_dim;
  model->elim.z_of_w = [e_ext, c_shared, z_dim](const Vec& w) {
    Vec ext = (*e_ext) * w + *c_shared;
    return Vec(ext.head(z_dim));
  };
  model->elim.jacobian = [e_ext, z_dim, free_dim](const Vec&) {
    return SpMat(e_ext->topRows(z_dim));
  };

  const Vec v_pot = model->potential;
  auto z_of_w = model->elim.z_of_w;
  model->residual = [nn, nu, v_pot, e_ext, c_shared](const Vec& w) {
    const Vec ext = (*e_ext) * w + *c_shared;
    const double lambda = ext(8 * nn);
    Vec r(2 * nn);
    for (int j = 0; j < nn; ++j) {
      const double zu2 = ext(nn + j), zu3 = ext(2 * nn + j), zu4 = ext(3 * nn + j);
      const double rm1 = ext(4 * nn + j), rm2 = ext(5 * nn + j), rm3 = ext(6 * nn + j),
                   rm4 = ext(7 * nn + j);
      const double grad_sum = zu2 + zu3;
      r(j) = nu * zu4 - 0.5 * grad_sum * grad_sum - v_pot(j) + rm1 * rm1 + lambda;
      r(nn + j) = -nu * rm4 - rm2 * zu2 - rm3 * zu3 - rm1 * zu4;
    }
    return r;
  };
  model->residual_jacobian = [nn, nu, e_ext, c_shared, free_dim](const Vec& w) {
    const Vec ext = (*e_ext) * w + *c_shared;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(11 * nn));
    for (int j = 0; j < nn; ++j) {
      const double zu2 = ext(nn + j), zu3 = ext(2 * nn + j), zu4 = ext(3 * nn + j);
      const double rm1 = ext(4 * nn + j), rm2 = ext(5 * nn + j), rm3 = ext(6 * nn + j);
      const double grad_sum = zu2 + zu3;
      // HJB row j
      trip.emplace_back(j, nn + j, -grad_sum);
      trip.emplace_back(j, 2 * nn + j, -grad_sum);
      trip.emplace_back(j, 3 * nn + j, nu);
      trip.emplace_back(j, 4 * nn + j, 2.0 * rm1);
      trip.emplace_back(j, 8 * nn, 1.0);  // lambda
      // FP row j
      trip.emplace_back(nn + j, nn + j, -rm2);
      trip.emplace_back(nn + j, 2 * nn + j, -rm3);
      trip.emplace_back(nn + j, 3 * nn + j, -rm1);
      trip.emplace_back(nn + j, 4 * nn + j, -zu4);
      trip.emplace_back(nn + j, 5 * nn + j, -zu2);
      trip.emplace_back(nn + j, 6 * nn + j, -zu3);
      trip.emplace_back(nn + j, 7 * nn + j, -nu);
    }
    SpMat jext(2 * nn, 8 * nn + 1);
    jext.setFromTriplets(trip.begin(), trip.end());
    return SpMat(jext * (*e_ext));
  };

  bp.mfg = model;
  bp.elim = model->elim;
  return bp;
}

}  // namespace sgpde
