#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgpde {

using Point = Eigen::Vector2d;

/// Thrown when a functional carries a derivative order the closed-form
/// calculus does not support.
struct UnsupportedOperatorError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class KernelFamily { GaussianIso, GaussianAniso, PeriodicExp };

/// A positive-definite base kernel over the closed 2-D domain.
///
/// All three families are axis-separable products of 1-D kernels and
/// satisfy eval(x, x) = 1:
///   gaussian_iso    exp(-|x-y|^2 / (2 sigma^2))
///   gaussian_aniso  exp(-sum_i (x_i-y_i)^2 / (2 sigma_i^2))
///   periodic_exp    exp(sum_i cos(2 pi (x_i-y_i)/p_i) - d)
struct KernelSpec {
  KernelFamily family = KernelFamily::GaussianIso;
  std::array<double, 2> sigma{1.0, 1.0};  // lengthscales, or periods for periodic_exp

  static KernelSpec gaussian_iso(double s);
  static KernelSpec gaussian_aniso(double s1, double s2);
  static KernelSpec periodic_exp(double period = 1.0);

  double lengthscale(int axis) const { return sigma[static_cast<size_t>(axis)]; }
};

/// A linear differential operator: sum of coeff * d^(a1)_x1 d^(a2)_x2 terms.
/// Total order of each term is at most 2, so bilinear pairs stay within the
/// fourth-order derivative tables.
struct DiffOp {
  struct Term {
    std::array<int, 2> orders{0, 0};
    double coeff = 1.0;
  };
  std::vector<Term> terms;

  DiffOp() = default;
  explicit DiffOp(std::vector<Term> t);

  static DiffOp identity();
  static DiffOp d1(int axis);          // first derivative along one axis
  static DiffOp d2(int axis);          // second derivative along one axis
  static DiffOp sum_d1();              // d/dx1 + d/dx2
  static DiffOp laplacian();           // d^2/dx1^2 + d^2/dx2^2

  int max_order() const;
  bool operator==(const DiffOp& other) const;
};

/// A Dirac at a point composed with a differential operator; the atoms of
/// the sample and inducing functional vectors.
struct Functional {
  Point point{0.0, 0.0};
  DiffOp op;
};

/// K(x, y). Value in (0, 1] for all families.
double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y);

/// (L_left (x) L_right) K evaluated at (left.point, right.point).
/// Exactly symmetric under swapping the arguments (canonical code path).
double bilinear_eval(const KernelSpec& spec, const Functional& left, const Functional& right);

/// K(x, right) = bilinear_eval with left = (x, Id). Supplies the entries of
/// Q(x, psi) needed by the representer evaluation.
double right_functional_eval(const KernelSpec& spec, const Point& x, const Functional& right);

}  // namespace sgpde
