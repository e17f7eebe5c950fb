#pragma once

#include "sgpde/kernels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgpde {

struct InvalidConfigurationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box domain. Periodic axes contribute no boundary faces.
/// When time_axis is set, only the low face of that axis counts as boundary
/// (the initial condition); the final-time face belongs to the interior
/// residual set.
struct Domain {
  std::array<std::pair<double, double>, 2> bounds{{{0.0, 1.0}, {0.0, 1.0}}};
  std::array<bool, 2> periodic{false, false};
  std::optional<int> time_axis;

  struct Face {
    int axis;
    bool low;        // low or high face of that axis
    double measure;  // span of the free axis
  };
  std::vector<Face> boundary_faces() const;
  double span(int axis) const {
    const auto& b = bounds[static_cast<size_t>(axis)];
    return b.second - b.first;
  }
  bool is_periodic() const { return periodic[0] && periodic[1]; }
};

/// Interior/boundary collocation samples, reproducible from the seed.
struct SampleSet {
  std::vector<Point> interior;
  std::vector<Point> boundary;
  std::uint64_t seed = 0;

  int n_total() const { return static_cast<int>(interior.size() + boundary.size()); }
};

/// Index lists into a SampleSet selecting the inducing subset, stratified by
/// interior/boundary.
struct InducingSet {
  std::vector<int> interior_indices;
  std::vector<int> boundary_indices;

  int m_total() const { return static_cast<int>(interior_indices.size() + boundary_indices.size()); }
};

struct BlockInfo {
  std::string label;
  int start = 0;
  int length = 0;
};

/// Ordered functionals with their operator-block layout. Layout convention:
/// boundary operator blocks first (in sample order), then interior operator
/// blocks in the order the problem declares them.
struct FunctionalVector {
  std::vector<Functional> entries;
  std::vector<BlockInfo> layout;

  int size() const { return static_cast<int>(entries.size()); }
  const BlockInfo& block(const std::string& label) const;
};

/// Per-problem operator layout: which operators act at boundary points and
/// which at interior points.
struct OperatorLayout {
  std::vector<std::pair<std::string, DiffOp>> boundary_ops;
  std::vector<std::pair<std::string, DiffOp>> interior_ops;
};

/// Deterministic counter-based substream derivation (splitmix64), so the
/// interior/boundary/inducing draws come from independent streams and
/// changing M never perturbs the sample set.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose);

SampleSet sample_collocation(const Domain& domain, int n_total, double interior_ratio,
                             std::uint64_t seed);

InducingSet select_inducing(const SampleSet& samples, int m_total, double interior_ratio,
                            std::uint64_t seed);

FunctionalVector build_functionals(const OperatorLayout& layout,
                                   const std::vector<Point>& interior,
                                   const std::vector<Point>& boundary);

/// Convenience: functionals at the inducing subset of `samples`.
FunctionalVector build_inducing_functionals(const OperatorLayout& layout, const SampleSet& samples,
                                            const InducingSet& inducing);

}  // namespace sgpde
