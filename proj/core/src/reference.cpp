#include "sgpde/reference.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace sgpde {

namespace {

struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch on the symmetric Jacobi matrix for the e^{-s^2} weight.
GaussHermite gauss_hermite(int n) {
  Mat jac = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(0.5 * i);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jac);
  GaussHermite gh;
  gh.nodes.resize(static_cast<size_t>(n));
  gh.weights.resize(static_cast<size_t>(n));
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    gh.nodes[static_cast<size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    gh.weights[static_cast<size_t>(i)] = sqrt_pi * v0 * v0;
  }
  return gh;
}

const GaussHermite& cached_gauss_hermite(int n) {
  static std::map<int, GaussHermite> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_hermite(n)).first;
  return it->second;
}

}  // namespace

double cole_hopf_burgers(double t, double x, double nu, int nodes) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (t < 0.0 || t > 1.0 || x < -1.0 || x > 1.0) {
    throw std::invalid_argument("Cole-Hopf reference queried outside [0,1]x[-1,1]");
  }
  if (t == 0.0) return -std::sin(M_PI * x);

  const GaussHermite& gh = cached_gauss_hermite(nodes);
  const double scale = 2.0 * std::sqrt(nu * t);
  const double inv_2pinu = 1.0 / (2.0 * M_PI * nu);

  // Work with exponents relative to their maximum so the ratio stays finite
  // even when the heat-kernel weight underflows.
  std::vector<double> expo(gh.nodes.size());
  double emax = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < gh.nodes.size(); ++i) {
    const double eta = scale * gh.nodes[i];
    expo[i] = -std::cos(M_PI * (x - eta)) * inv_2pinu;
    emax = std::max(emax, expo[i]);
  }
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < gh.nodes.size(); ++i) {
    const double eta = scale * gh.nodes[i];
    const double g = gh.weights[i] * std::exp(expo[i] - emax);
    num += std::sin(M_PI * (x - eta)) * g;
    den += g;
  }
  if (!(den > 0.0) || !std::isfinite(num)) {
    throw NumericalFailureError("degenerate Cole-Hopf quadrature denominator");
  }
  return -num / den;
}

std::vector<Point> make_grid(const Domain& domain, int resolution) {
  if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  std::array<std::vector<double>, 2> coords;
  for (int ax = 0; ax < 2; ++ax) {
    const double low = domain.bounds[static_cast<size_t>(ax)].first;
    const double span = domain.span(ax);
    const bool per = domain.periodic[static_cast<size_t>(ax)];
    for (int i = 0; i < resolution; ++i) {
      const double step = per ? span / resolution : span / (resolution - 1);
      coords[static_cast<size_t>(ax)].push_back(low + step * i);
    }
  }
  std::vector<Point> grid;
  grid.reserve(static_cast<size_t>(resolution) * static_cast<size_t>(resolution));
  for (double a : coords[0]) {
    for (double b : coords[1]) grid.push_back(Point(a, b));
  }
  return grid;
}

GridError linf_on_grid(const std::function<double(const Point&)>& model_eval,
                       const std::function<double(const Point&)>& reference,
                       const Domain& domain, int resolution) {
  GridError err;
  err.grid_points = make_grid(domain, resolution);
  err.errors.reserve(err.grid_points.size());
  for (const auto& p : err.grid_points) {
    const double e = std::abs(model_eval(p) - reference(p));
    err.errors.push_back(e);
    err.max_error = std::max(err.max_error, e);
  }
  return err;
}

NystromError nystrom_error(const Mat& dense_psi, const LowRankInverse& lri, double rel_tol,
                           int max_iter) {
  const Eigen::Index n = dense_psi.rows();
  if (n != lri.n()) throw std::invalid_argument("dense_psi size mismatch");
  const Mat& a = lri.a_matrix();
  const double gamma = lri.gamma();
  auto matvec = [&](const Vec& v) -> Vec {
    return dense_psi * v - gamma * (a.transpose() * (a * v));
  };

  std::mt19937_64 eng(0x5eedULL);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5;
  }
  v.normalize();

  NystromError result;
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = matvec(v);
    const double norm = w.norm();
    result.iterations = it + 1;
    if (norm == 0.0) {
      result.value = 0.0;
      return result;
    }
    v = w / norm;
    if (std::abs(norm - est) <= rel_tol * norm) {
      result.value = norm;
      return result;
    }
    est = norm;
  }
  result.value = est;
  result.converged = false;
  return result;
}

ReferenceGrid ReferenceGrid::ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open reference grid file: " + path);

  std::vector<std::array<double, 3>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.find_first_not_of("0123456789+-.eE, \r") != std::string::npos) {
      continue;  // header row
    }
    std::stringstream ss(line);
    std::array<double, 3> row{};
    char comma;
    if (!(ss >> row[0] >> comma >> row[1] >> comma >> row[2])) {
      throw IngestionError("malformed row " + std::to_string(line_no) + " in " + path);
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw IngestionError("reference grid file is empty: " + path);

  auto collect_axis = [&](int k) {
    std::vector<double> vals;
    for (const auto& r : rows) vals.push_back(r[static_cast<size_t>(k)]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
  };

  ReferenceGrid grid;
  grid.x1_ = collect_axis(0);
  grid.x2_ = collect_axis(1);
  const size_t expected = grid.x1_.size() * grid.x2_.size();
  if (rows.size() != expected) {
    throw IngestionError("reference grid is not a complete lattice: got " +
                         std::to_string(rows.size()) + " rows, expected " +
                         std::to_string(expected));
  }
  grid.values_ = Mat::Constant(static_cast<Eigen::Index>(grid.x1_.size()),
                               static_cast<Eigen::Index>(grid.x2_.size()),
                               std::numeric_limits<double>::quiet_NaN());
  auto index_of = [](const std::vector<double>& axis, double v) -> Eigen::Index {
    const auto it = std::lower_bound(axis.begin(), axis.end(), v);
    if (it == axis.end() || *it != v) return -1;
    return it - axis.begin();
  };
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto i = index_of(grid.x1_, rows[r][0]);
    const auto j = index_of(grid.x2_, rows[r][1]);
    if (i < 0 || j < 0 || !std::isnan(grid.values_(i, j))) {
      throw IngestionError("duplicate or off-lattice row " + std::to_string(r + 1));
    }
    grid.values_(i, j) = rows[r][2];
  }
  return grid;
}

double ReferenceGrid::operator()(const Point& p) const {
  auto locate = [](const std::vector<double>& axis, double v) {
    const auto n = static_cast<Eigen::Index>(axis.size());
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    Eigen::Index hi = std::clamp<Eigen::Index>(it - axis.begin(), 1, n - 1);
    const Eigen::Index lo = hi - 1;
    const double denom = axis[static_cast<size_t>(hi)] - axis[static_cast<size_t>(lo)];
    const double frac =
        std::clamp(denom > 0.0 ? (v - axis[static_cast<size_t>(lo)]) / denom : 0.0, 0.0, 1.0);
    return std::pair<Eigen::Index, double>{lo, frac};
  };
  const auto [i, fx] = locate(x1_, p[0]);
  const auto [j, fy] = locate(x2_, p[1]);
  const double v00 = values_(i, j), v01 = values_(i, j + 1);
  const double v10 = values_(i + 1, j), v11 = values_(i + 1, j + 1);
  return (1 - fx) * ((1 - fy) * v00 + fy * v01) + fx * ((1 - fy) * v10 + fy * v11);
}

}  // namespace sgpde
