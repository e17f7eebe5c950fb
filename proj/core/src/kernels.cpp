#include "sgpde/kernels.hpp"

#include <cmath>

namespace sgpde {

namespace {

void check_lengthscales(const KernelSpec& spec) {
  for (double s : spec.sigma) {
    if (!(s > 0.0)) throw std::invalid_argument("kernel lengthscale must be strictly positive");
  }
}

// Fifth-entry derivative table d[n] = d^n/dr^n k(r) for the 1-D factor of a
// separable kernel, built from the log-kernel h via the chain rule:
//   k = e^h, k' = h1 k, k'' = (h2 + h1^2) k, ...
struct DerivTable {
  std::array<double, 5> d{};
};

DerivTable chain_from_log(double h, double h1, double h2, double h3, double h4) {
  DerivTable t;
  const double k = std::exp(h);
  t.d[0] = k;
  t.d[1] = h1 * k;
  t.d[2] = (h2 + h1 * h1) * k;
  t.d[3] = (h3 + 3.0 * h1 * h2 + h1 * h1 * h1) * k;
  t.d[4] = (h4 + 4.0 * h1 * h3 + 3.0 * h2 * h2 + 6.0 * h1 * h1 * h2 + h1 * h1 * h1 * h1) * k;
  return t;
}

DerivTable axis_derivs(const KernelSpec& spec, int axis, double r) {
  switch (spec.family) {
    case KernelFamily::GaussianIso:
    case KernelFamily::GaussianAniso: {
      const double s = spec.family == KernelFamily::GaussianIso ? spec.sigma[0]
                                                                : spec.sigma[static_cast<size_t>(axis)];
      const double inv_s2 = 1.0 / (s * s);
      return chain_from_log(-0.5 * r * r * inv_s2, -r * inv_s2, -inv_s2, 0.0, 0.0);
    }
    case KernelFamily::PeriodicExp: {
      const double w = 2.0 * M_PI / spec.sigma[static_cast<size_t>(axis)];
      const double c = std::cos(w * r);
      const double sn = std::sin(w * r);
      return chain_from_log(c - 1.0, -w * sn, -w * w * c, w * w * w * sn, w * w * w * w * c);
    }
  }
  throw std::logic_error("unreachable kernel family");
}

// Canonical ordering over functionals so that bilinear_eval(a, b) and
// bilinear_eval(b, a) run the same code path and agree bit-for-bit.
bool functional_less(const Functional& a, const Functional& b) {
  for (int ax = 0; ax < 2; ++ax) {
    if (a.point[ax] != b.point[ax]) return a.point[ax] < b.point[ax];
  }
  if (a.op.terms.size() != b.op.terms.size()) return a.op.terms.size() < b.op.terms.size();
  for (size_t i = 0; i < a.op.terms.size(); ++i) {
    const auto& ta = a.op.terms[i];
    const auto& tb = b.op.terms[i];
    if (ta.orders != tb.orders) return ta.orders < tb.orders;
    if (ta.coeff != tb.coeff) return ta.coeff < tb.coeff;
  }
  return false;
}

}  // namespace

KernelSpec KernelSpec::gaussian_iso(double s) {
  KernelSpec k{KernelFamily::GaussianIso, {s, s}};
  check_lengthscales(k);
  return k;
}

KernelSpec KernelSpec::gaussian_aniso(double s1, double s2) {
  KernelSpec k{KernelFamily::GaussianAniso, {s1, s2}};
  check_lengthscales(k);
  return k;
}

KernelSpec KernelSpec::periodic_exp(double period) {
  KernelSpec k{KernelFamily::PeriodicExp, {period, period}};
  check_lengthscales(k);
  return k;
}

DiffOp::DiffOp(std::vector<Term> t) : terms(std::move(t)) {
  if (terms.empty()) throw std::invalid_argument("DiffOp needs at least one term");
  for (const auto& term : terms) {
    if (!std::isfinite(term.coeff)) throw std::invalid_argument("DiffOp coefficient must be finite");
    const int total = term.orders[0] + term.orders[1];
    if (term.orders[0] < 0 || term.orders[1] < 0 || total > 2) {
      throw UnsupportedOperatorError("DiffOp term order must lie in [0, 2]");
    }
  }
}

DiffOp DiffOp::identity() { return DiffOp({{{0, 0}, 1.0}}); }

DiffOp DiffOp::d1(int axis) {
  Term t;
  t.orders[static_cast<size_t>(axis)] = 1;
  return DiffOp({t});
}

DiffOp DiffOp::d2(int axis) {
  Term t;
  t.orders[static_cast<size_t>(axis)] = 2;
  return DiffOp({t});
}

DiffOp DiffOp::sum_d1() { return DiffOp({{{1, 0}, 1.0}, {{0, 1}, 1.0}}); }

DiffOp DiffOp::laplacian() { return DiffOp({{{2, 0}, 1.0}, {{0, 2}, 1.0}}); }

int DiffOp::max_order() const {
  int m = 0;
  for (const auto& t : terms) m = std::max(m, t.orders[0] + t.orders[1]);
  return m;
}

bool DiffOp::operator==(const DiffOp& other) const {
  if (terms.size() != other.terms.size()) return false;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].orders != other.terms[i].orders || terms[i].coeff != other.terms[i].coeff)
      return false;
  }
  return true;
}

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y) {
  check_lengthscales(spec);
  double v = 1.0;
  for (int ax = 0; ax < 2; ++ax) v *= axis_derivs(spec, ax, x[ax] - y[ax]).d[0];
  return v;
}

double bilinear_eval(const KernelSpec& spec, const Functional& left, const Functional& right) {
  if (left.op.max_order() + right.op.max_order() > 4) {
    throw UnsupportedOperatorError("combined derivative order exceeds 4");
  }
  const bool swap = functional_less(right, left);
  const Functional& a = swap ? right : left;
  const Functional& b = swap ? left : right;

  const DerivTable t0 = axis_derivs(spec, 0, a.point[0] - b.point[0]);
  const DerivTable t1 = axis_derivs(spec, 1, a.point[1] - b.point[1]);

  double value = 0.0;
  for (const auto& ta : a.op.terms) {
    for (const auto& tb : b.op.terms) {
      // d^p_x d^q_y k(x - y) = (-1)^q k^(p+q)(x - y), per axis.
      const int o0 = ta.orders[0] + tb.orders[0];
      const int o1 = ta.orders[1] + tb.orders[1];
      const double sign = ((tb.orders[0] + tb.orders[1]) % 2 == 0) ? 1.0 : -1.0;
      value += ta.coeff * tb.coeff * sign * t0.d[static_cast<size_t>(o0)] * t1.d[static_cast<size_t>(o1)];
    }
  }
  return value;
}

double right_functional_eval(const KernelSpec& spec, const Point& x, const Functional& right) {
  if (right.op.max_order() > 2) throw UnsupportedOperatorError("right functional order exceeds 2");
  return bilinear_eval(spec, Functional{x, DiffOp::identity()}, right);
}

}  // namespace sgpde
