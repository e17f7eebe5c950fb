#include "sgpde/gauss_newton.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace sgpde {

GnProblem make_gn_problem(const EliminationMap& elim, const LowRankInverse& lri) {
  GnProblem p;
  p.free_dim = elim.free_dim;
  p.z_dim = elim.z_dim;
  p.quad_blocks = {{0, elim.z_dim, 1.0}};
  p.lri = &lri;
  p.z_of_w = elim.z_of_w;
  p.z_jacobian = elim.jacobian;
  p.constraints = elim.constraints;
  p.w_of_z = elim.w_of_z;
  return p;
}

GnProblem make_gn_problem(const MfgModel& model, const LowRankInverse& lri, double gamma) {
  GnProblem p;
  p.free_dim = model.elim.free_dim;
  p.z_dim = model.elim.z_dim;
  const int half = model.elim.z_dim / 2;
  p.quad_blocks = {{0, half, gamma}, {half, half, gamma}};
  p.lri = &lri;
  p.z_of_w = model.elim.z_of_w;
  p.z_jacobian = model.elim.jacobian;
  p.residual = model.residual;
  p.residual_jacobian = model.residual_jacobian;
  p.w_l2_weight = Vec::Zero(p.free_dim);
  p.w_l2_weight(p.free_dim - 1) = gamma;  // gamma lambda^2
  return p;
}

namespace {

using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Matrix-vector products with extended-precision accumulation. The
// constraint-space system spans ~1/gamma orders of magnitude, so the residual
// and recovery products need more bits than the summands carry in double.
VecL gemv_ld(const Mat& m, const VecL& x) {
  VecL y = VecL::Zero(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const long double xj = x(j);
    for (Eigen::Index i = 0; i < m.rows(); ++i) y(i) += static_cast<long double>(m(i, j)) * xj;
  }
  return y;
}

VecL gemv_t_ld(const Mat& m, const VecL& x) {
  VecL y(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc += static_cast<long double>(m(i, j)) * x(i);
    y(j) = acc;
  }
  return y;
}

VecL spmv_ld(const SpMat& s, const VecL& x) {
  VecL y = VecL::Zero(s.rows());
  for (int k = 0; k < s.outerSize(); ++k) {
    for (SpMat::InnerIterator it(s, k); it; ++it) {
      y(it.row()) += static_cast<long double>(it.value()) * x(it.col());
    }
  }
  return y;
}

VecL spmv_t_ld(const SpMat& s, const VecL& x) {
  VecL y = VecL::Zero(s.cols());
  for (int k = 0; k < s.outerSize(); ++k) {
    for (SpMat::InnerIterator it(s, k); it; ++it) {
      y(it.col()) += static_cast<long double>(it.value()) * x(it.row());
    }
  }
  return y;
}

void add_sparse(Mat& h, const SpMat& s, double scale) {
  for (int k = 0; k < s.outerSize(); ++k) {
    for (SpMat::InnerIterator it(s, k); it; ++it) h(it.row(), it.col()) += scale * it.value();
  }
}

double loss_at(const GnProblem& p, const Vec& w, const Vec& z) {
  double loss = 0.0;
  for (const auto& b : p.quad_blocks) {
    loss += b.weight * p.lri->quad_form(z.segment(b.start, b.length));
  }
  if (p.residual) loss += p.residual(w).squaredNorm();
  if (p.w_l2_weight.size() > 0) loss += p.w_l2_weight.cwiseProduct(w.cwiseAbs2()).sum();
  return loss;
}

}  // namespace

GNResult gn_solve(const GnProblem& p, const GNConfig& config, const Vec& w0) {
  if (config.max_iter < 1 || !(config.step_tol > 0.0)) {
    throw std::invalid_argument("invalid Gauss-Newton configuration");
  }
  const double gamma = p.lri->gamma();
  const Mat& a = p.lri->a_matrix();
  const Mat& jc = p.lri->inner_chol();

  GNResult result;
  Vec w = w0;
  Vec z = p.z_of_w(w);
  result.loss_history.push_back(loss_at(p, w, z));
  int rising = 0;

  // Factorizes the (ridge-shifted) step matrix, escalating the ridge by x10
  // up to 3 times; the shift is relative to the matrix scale so small-gamma
  // runs keep it above rounding noise.
  auto ridged_llt = [](const Mat& h, double initial_ridge) {
    const double h_scale = std::max(1.0, h.diagonal().maxCoeff());
    double ridge = initial_ridge;
    for (int attempt = 0; attempt <= 3; ++attempt) {
      Mat hr = h;
      hr.diagonal().array() += ridge * h_scale;
      Eigen::LLT<Mat> llt(std::move(hr));
      if (llt.info() == Eigen::Success) return llt;
      ridge = ridge == 0.0 ? 1e-14 : ridge * 10.0;
    }
    throw NumericalFailureError("Gauss-Newton normal matrix not positive definite at ridge=" +
                                std::to_string(ridge / 10.0));
  };

  // Constraint-space step: minimize z^T Sigma^-1 z over the linearization
  // {G z = G z_k}; Sigma / gamma = I + A^T A cancels gamma throughout. The
  // system matrix M = G G^T + (G A^T)(G A^T)^T spans ~1/gamma orders of
  // magnitude, and a Cholesky of the formed M loses the gamma-scale
  // directions (G G^T) under the rounding noise of the dominant term. A QR
  // factorization of the stacked square roots [L_g^T; (G A^T)^T] is backward
  // stable in the factors themselves, so those directions survive; iterative
  // refinement with extended-precision residuals then removes the remaining
  // solve error.
  auto constraint_space_delta = [&](const Vec& wk, const Vec& zk) {
    const SpMat gmat = p.constraints(wk);
    const Eigen::Index k = gmat.rows();
    const Mat ga_t = gmat * a.transpose();  // k x R

    // Natural ordering keeps matrixU a true square root of G G^T with no
    // permutation to undo; the matrix is block-diagonal for these problems
    const SpMat ggt = SpMat(gmat * gmat.transpose());
    Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>> gchol(ggt);
    if (gchol.info() != Eigen::Success) {
      throw NumericalFailureError("constraint rows are numerically rank deficient");
    }
    Mat stack(k + ga_t.cols(), k);
    stack.topRows(k) = Mat(gchol.matrixU());
    stack.bottomRows(ga_t.cols()) = ga_t.transpose();
    const Eigen::HouseholderQR<Mat> qr(stack);
    const auto rfac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    auto msolve = [&](const Vec& rhs) {
      Vec u = rfac.transpose().solve(rhs);
      return Vec(rfac.solve(u));
    };

    const VecL c = spmv_ld(gmat, zk.cast<long double>());
    Vec y = msolve(c.cast<double>());
    for (int refine = 0; refine < 2; ++refine) {
      const VecL yl = y.cast<long double>();
      VecL res = c - spmv_ld(gmat, spmv_t_ld(gmat, yl));
      res -= gemv_ld(ga_t, gemv_t_ld(ga_t, yl));
      y += msolve(res.cast<double>());
    }
    VecL t = spmv_t_ld(gmat, y.cast<long double>());
    t += gemv_t_ld(a, gemv_ld(a, t));
    return Vec(p.w_of_z(t.cast<double>()) - wk);
  };

  auto normal_equation_delta = [&](const Vec& wk, const Vec& zk) {
    const SpMat jz = p.z_jacobian(wk);
    Mat h = Mat::Zero(p.free_dim, p.free_dim);
    Vec g = Vec::Zero(p.free_dim);

    for (const auto& b : p.quad_blocks) {
      const SpMat jb = jz.middleRows(b.start, b.length);
      const Vec zb = zk.segment(b.start, b.length);
      // J^T Sigma^-1 J = gamma^-1 (J^T J - U^T U) with U = Jc^-1 A J.
      // Each quadratic block is one full copy of the psi functionals (the
      // MFG stacks two unknowns over the same psi), so A applies whole.
      Mat u = a * jb;
      jc.triangularView<Eigen::Lower>().solveInPlace(u);
      Vec t = a * zb;
      jc.triangularView<Eigen::Lower>().solveInPlace(t);
      const double scale = b.weight / gamma;
      h.noalias() -= scale * (u.transpose() * u);
      add_sparse(h, SpMat(jb.transpose() * jb), scale);
      g.noalias() -= scale * (u.transpose() * t);
      g += scale * (jb.transpose() * zb);
    }
    if (p.residual) {
      const Vec r = p.residual(wk);
      const SpMat jr = p.residual_jacobian(wk);
      add_sparse(h, SpMat(jr.transpose() * jr), 1.0);
      g += jr.transpose() * r;
    }
    if (p.w_l2_weight.size() > 0) {
      h.diagonal() += p.w_l2_weight;
      g += p.w_l2_weight.cwiseProduct(wk);
    }
    return Vec(ridged_llt(h, config.ridge).solve(-g));
  };

  const bool use_constraint_space = static_cast<bool>(p.constraints) && !p.residual;

  for (int iter = 0; iter < config.max_iter; ++iter) {
    const Vec delta =
        use_constraint_space ? constraint_space_delta(w, z) : normal_equation_delta(w, z);

    w += config.step_size * delta;
    if (!w.allFinite()) {
      throw DivergenceError("Gauss-Newton iterates diverged (NaN)", w - config.step_size * delta);
    }
    z = p.z_of_w(w);
    result.iterations = iter + 1;
    const double loss = loss_at(p, w, z);
    if (loss > result.loss_history.back()) {
      if (++rising >= 3) result.non_monotone = true;
    } else {
      rising = 0;
    }
    result.loss_history.push_back(loss);
    if ((config.step_size * delta).lpNorm<Eigen::Infinity>() < config.step_tol) {
      result.converged = true;
      break;
    }
  }
  result.w = std::move(w);
  result.z = std::move(z);
  return result;
}

SolutionModel build_solution(const Vec& z_star, const LowRankInverse& lri,
                             const CholeskyFactor& l_factor,
                             const KernelSpec& kernel, const FunctionalVector& phi) {
  SolutionModel model;
  model.kernel = kernel;
  model.phi = phi;
  model.gamma = lri.gamma();
  model.eta_used = l_factor.eta_used;
  model.z_star = z_star;
  // beta = Theta_eta^-1 B (gamma I + Q)^-1 z. With B = sqrt(gamma) L A and
  // the push-through identity A (I + A^T A)^-1 = (I + A A^T)^-1 A this
  // reduces to triangular solves only, avoiding the gamma^-1-scale
  // cancellation of applying (gamma I + Q)^-1 directly:
  //   beta = gamma^-1/2 L^-T J^-T J^-1 (A z)
  Vec t = lri.a_matrix() * z_star;
  const Mat& j = lri.inner_chol();
  j.triangularView<Eigen::Lower>().solveInPlace(t);
  j.transpose().triangularView<Eigen::Upper>().solveInPlace(t);
  l_factor.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(t);
  model.beta = t / std::sqrt(lri.gamma());
  return model;
}

double evaluate(const SolutionModel& model, const Point& x) {
  double v = 0.0;
  for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
    v += model.beta(j) * right_functional_eval(model.kernel, x, model.phi.entries[static_cast<size_t>(j)]);
  }
  return v;
}

Vec evaluate_batch(const SolutionModel& model, const std::vector<Point>& xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = evaluate(model, xs[static_cast<size_t>(i)]);
  return out;
}

}  // namespace sgpde
