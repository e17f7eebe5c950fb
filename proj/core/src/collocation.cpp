#include "sgpde/collocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sgpde {

namespace {

// uniform double in [0, 1) with a platform-stable bit pattern
double next_unit(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

// uniform integer in [0, n) by modulo rejection; platform stable
std::uint64_t next_below(std::mt19937_64& eng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t v;
  do {
    v = eng();
  } while (v >= limit);
  return v % n;
}

constexpr std::uint64_t kStreamInterior = 1;
constexpr std::uint64_t kStreamBoundary = 2;
constexpr std::uint64_t kStreamInducingInterior = 3;
constexpr std::uint64_t kStreamInducingBoundary = 4;

std::vector<int> sample_without_replacement(int n, int m, std::mt19937_64& eng) {
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < m; ++i) {
    const auto j = i + static_cast<int>(next_below(eng, static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  idx.resize(static_cast<size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<Domain::Face> Domain::boundary_faces() const {
  std::vector<Face> faces;
  for (int ax = 0; ax < 2; ++ax) {
    if (periodic[static_cast<size_t>(ax)]) continue;
    const double m = span(1 - ax);
    faces.push_back({ax, true, m});
    if (!(time_axis && *time_axis == ax)) faces.push_back({ax, false, m});
  }
  return faces;
}

const BlockInfo& FunctionalVector::block(const std::string& label) const {
  for (const auto& b : layout) {
    if (b.label == label) return b;
  }
  throw std::out_of_range("no functional block labelled '" + label + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) {
  std::uint64_t z = seed + purpose * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampleSet sample_collocation(const Domain& domain, int n_total, double interior_ratio,
                             std::uint64_t seed) {
  if (n_total < 4) throw InvalidConfigurationError("need at least 4 collocation points");
  const auto faces = domain.boundary_faces();
  int n_interior;
  if (faces.empty()) {
    n_interior = n_total;  // periodic torus: the ratio is ignored
  } else {
    if (!(interior_ratio > 0.0 && interior_ratio <= 1.0)) {
      throw InvalidConfigurationError("interior_ratio must lie in (0, 1]");
    }
    n_interior = static_cast<int>(std::lround(interior_ratio * n_total));
    if (n_interior >= n_total) {
      throw InvalidConfigurationError("interior_ratio leaves no boundary points on a bounded domain");
    }
    if (n_interior < 1) throw InvalidConfigurationError("interior_ratio leaves no interior points");
  }

  SampleSet set;
  set.seed = seed;
  std::mt19937_64 eng_i(derive_seed(seed, kStreamInterior));
  set.interior.reserve(static_cast<size_t>(n_interior));
  for (int i = 0; i < n_interior; ++i) {
    Point p;
    for (int ax = 0; ax < 2; ++ax) {
      p[ax] = domain.bounds[static_cast<size_t>(ax)].first + domain.span(ax) * next_unit(eng_i);
    }
    set.interior.push_back(p);
  }

  if (!faces.empty()) {
    std::mt19937_64 eng_b(derive_seed(seed, kStreamBoundary));
    double total_measure = 0.0;
    for (const auto& f : faces) total_measure += f.measure;
    const int n_boundary = n_total - n_interior;
    set.boundary.reserve(static_cast<size_t>(n_boundary));
    for (int i = 0; i < n_boundary; ++i) {
      const double pick = total_measure * next_unit(eng_b);
      double acc = 0.0;
      const Domain::Face* face = &faces.back();
      for (const auto& f : faces) {
        acc += f.measure;
        if (pick < acc) {
          face = &f;
          break;
        }
      }
      Point p;
      const auto& fb = domain.bounds[static_cast<size_t>(face->axis)];
      p[face->axis] = face->low ? fb.first : fb.second;
      const int free_ax = 1 - face->axis;
      p[free_ax] =
          domain.bounds[static_cast<size_t>(free_ax)].first + domain.span(free_ax) * next_unit(eng_b);
      set.boundary.push_back(p);
    }
  }
  return set;
}

InducingSet select_inducing(const SampleSet& samples, int m_total, double interior_ratio,
                            std::uint64_t seed) {
  const int n_interior = static_cast<int>(samples.interior.size());
  const int n_boundary = static_cast<int>(samples.boundary.size());
  int m_interior;
  if (n_boundary == 0) {
    m_interior = m_total;
  } else {
    m_interior = static_cast<int>(std::lround(interior_ratio * m_total));
  }
  const int m_boundary = m_total - m_interior;
  if (m_interior > n_interior || m_boundary > n_boundary || m_interior < 1 || m_boundary < 0) {
    throw InvalidConfigurationError("inducing counts exceed the sample strata");
  }

  InducingSet ind;
  std::mt19937_64 eng_i(derive_seed(samples.seed ^ seed, kStreamInducingInterior));
  ind.interior_indices = sample_without_replacement(n_interior, m_interior, eng_i);
  if (m_boundary > 0) {
    std::mt19937_64 eng_b(derive_seed(samples.seed ^ seed, kStreamInducingBoundary));
    ind.boundary_indices = sample_without_replacement(n_boundary, m_boundary, eng_b);
  }
  return ind;
}

FunctionalVector build_functionals(const OperatorLayout& layout, const std::vector<Point>& interior,
                                   const std::vector<Point>& boundary) {
  FunctionalVector fv;
  int start = 0;
  for (const auto& [label, op] : layout.boundary_ops) {
    for (const auto& p : boundary) fv.entries.push_back({p, op});
    const int len = static_cast<int>(boundary.size());
    fv.layout.push_back({label, start, len});
    start += len;
  }
  for (const auto& [label, op] : layout.interior_ops) {
    for (const auto& p : interior) fv.entries.push_back({p, op});
    const int len = static_cast<int>(interior.size());
    fv.layout.push_back({label, start, len});
    start += len;
  }
  return fv;
}

FunctionalVector build_inducing_functionals(const OperatorLayout& layout, const SampleSet& samples,
                                            const InducingSet& inducing) {
  std::vector<Point> interior, boundary;
  interior.reserve(inducing.interior_indices.size());
  for (int i : inducing.interior_indices) interior.push_back(samples.interior[static_cast<size_t>(i)]);
  boundary.reserve(inducing.boundary_indices.size());
  for (int i : inducing.boundary_indices) boundary.push_back(samples.boundary[static_cast<size_t>(i)]);
  return build_functionals(layout, interior, boundary);
}

}  // namespace sgpde
