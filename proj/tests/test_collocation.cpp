#include <doctest.h>

#include "sgpde/collocation.hpp"

#include <algorithm>
#include <set>

using namespace sgpde;

namespace {

Domain square03() {
  Domain d;
  d.bounds = {{{0.0, 3.0}, {0.0, 3.0}}};
  return d;
}

Domain torus() {
  Domain d;
  d.bounds = {{{0.0, 1.0}, {0.0, 1.0}}};
  d.periodic = {true, true};
  return d;
}

Domain space_time() {
  Domain d;
  d.bounds = {{{0.0, 1.0}, {-1.0, 1.0}}};
  d.time_axis = 0;
  return d;
}

bool same_points(const std::vector<Point>& a, const std::vector<Point>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i][0] != b[i][0] || a[i][1] != b[i][1]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("interior ratio fixes the interior/boundary split exactly") {
  const SampleSet s = sample_collocation(square03(), 1200, 0.75, 7);
  CHECK(static_cast<int>(s.interior.size()) == 900);
  CHECK(static_cast<int>(s.boundary.size()) == 300);
  CHECK(s.n_total() == 1200);
}

TEST_CASE("samples lie inside the domain; boundary points sit on non-periodic faces") {
  const Domain d = square03();
  const SampleSet s = sample_collocation(d, 400, 0.75, 3);
  for (const auto& p : s.interior) {
    CHECK(p[0] > 0.0);
    CHECK(p[0] < 3.0);
    CHECK(p[1] > 0.0);
    CHECK(p[1] < 3.0);
  }
  for (const auto& p : s.boundary) {
    const bool on_face = p[0] == 0.0 || p[0] == 3.0 || p[1] == 0.0 || p[1] == 3.0;
    CHECK(on_face);
    CHECK(p[0] >= 0.0);
    CHECK(p[0] <= 3.0);
    CHECK(p[1] >= 0.0);
    CHECK(p[1] <= 3.0);
  }
}

TEST_CASE("fully periodic domains have no boundary faces or samples") {
  CHECK(torus().boundary_faces().empty());
  const SampleSet s = sample_collocation(torus(), 400, 1.0, 11);
  CHECK(s.boundary.empty());
  CHECK(static_cast<int>(s.interior.size()) == 400);
}

TEST_CASE("time axis keeps only the initial face as boundary") {
  const Domain d = space_time();
  const auto faces = d.boundary_faces();
  // initial-time face plus the two spatial walls
  CHECK(faces.size() == 3);
  int time_faces = 0;
  for (const auto& f : faces) {
    if (f.axis == 0) {
      CHECK(f.low);
      ++time_faces;
    }
  }
  CHECK(time_faces == 1);
  const SampleSet s = sample_collocation(d, 400, 0.75, 5);
  for (const auto& p : s.boundary) {
    const bool valid = p[0] == 0.0 || p[1] == -1.0 || p[1] == 1.0;
    CHECK(valid);
    CHECK(p[0] < 1.0);  // final-time face is not boundary
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  const SampleSet a = sample_collocation(square03(), 600, 0.75, 42);
  const SampleSet b = sample_collocation(square03(), 600, 0.75, 42);
  const SampleSet c = sample_collocation(square03(), 600, 0.75, 43);
  CHECK(same_points(a.interior, b.interior));
  CHECK(same_points(a.boundary, b.boundary));
  CHECK_FALSE(same_points(a.interior, c.interior));
}

TEST_CASE("inducing selection is a stratified subset with no duplicates") {
  const SampleSet s = sample_collocation(square03(), 1200, 0.75, 9);
  const InducingSet ind = select_inducing(s, 600, 0.75, 9);
  CHECK(ind.m_total() == 600);
  CHECK(static_cast<int>(ind.interior_indices.size()) == 450);
  CHECK(static_cast<int>(ind.boundary_indices.size()) == 150);
  std::set<int> seen(ind.interior_indices.begin(), ind.interior_indices.end());
  CHECK(seen.size() == ind.interior_indices.size());
  for (int i : ind.interior_indices) {
    CHECK(i >= 0);
    CHECK(i < static_cast<int>(s.interior.size()));
  }
  std::set<int> seen_b(ind.boundary_indices.begin(), ind.boundary_indices.end());
  CHECK(seen_b.size() == ind.boundary_indices.size());
  for (int i : ind.boundary_indices) {
    CHECK(i >= 0);
    CHECK(i < static_cast<int>(s.boundary.size()));
  }
}

TEST_CASE("substreams are independent: M does not perturb the samples") {
  const SampleSet a = sample_collocation(square03(), 800, 0.75, 21);
  const SampleSet b = sample_collocation(square03(), 800, 0.75, 21);
  const InducingSet ia = select_inducing(a, 200, 0.75, 21);
  const InducingSet ib = select_inducing(b, 400, 0.75, 21);
  CHECK(same_points(a.interior, b.interior));
  CHECK(same_points(a.boundary, b.boundary));
  // the smaller selection need not be a prefix, but both must index the same set
  CHECK(ia.m_total() == 200);
  CHECK(ib.m_total() == 400);
  // distinct purposes give distinct streams
  CHECK(derive_seed(21, 0) != derive_seed(21, 1));
  CHECK(derive_seed(21, 0) != derive_seed(22, 0));
}

TEST_CASE("invalid sampling configurations are rejected") {
  CHECK_THROWS_AS(sample_collocation(square03(), 0, 0.75, 1), InvalidConfigurationError);
  CHECK_THROWS_AS(sample_collocation(square03(), 100, -0.1, 1), InvalidConfigurationError);
  CHECK_THROWS_AS(sample_collocation(square03(), 100, 1.5, 1), InvalidConfigurationError);
  const SampleSet s = sample_collocation(square03(), 100, 0.75, 1);
  CHECK_THROWS_AS(select_inducing(s, 0, 0.75, 1), InvalidConfigurationError);
  CHECK_THROWS_AS(select_inducing(s, 101, 0.75, 1), InvalidConfigurationError);
}

TEST_CASE("functional vector layout: boundary blocks first, then interior operator blocks") {
  const SampleSet s = sample_collocation(square03(), 40, 0.75, 2);
  OperatorLayout layout;
  layout.boundary_ops = {{"dirichlet", DiffOp::identity()}};
  layout.interior_ops = {{"id", DiffOp::identity()}, {"grad_sum", DiffOp::sum_d1()},
                         {"lap", DiffOp::laplacian()}};
  const FunctionalVector fv = build_functionals(layout, s.interior, s.boundary);
  const int n_int = static_cast<int>(s.interior.size());
  const int n_bnd = static_cast<int>(s.boundary.size());
  CHECK(fv.size() == n_bnd + 3 * n_int);

  const BlockInfo& bd = fv.block("dirichlet");
  CHECK(bd.start == 0);
  CHECK(bd.length == n_bnd);
  const BlockInfo& bid = fv.block("id");
  CHECK(bid.start == n_bnd);
  CHECK(bid.length == n_int);
  const BlockInfo& bg = fv.block("grad_sum");
  CHECK(bg.start == n_bnd + n_int);
  const BlockInfo& bl = fv.block("lap");
  CHECK(bl.start == n_bnd + 2 * n_int);

  // entries pair the declared operator with the points in sample order
  for (int i = 0; i < n_bnd; ++i) {
    CHECK(fv.entries[static_cast<size_t>(i)].point == s.boundary[static_cast<size_t>(i)]);
    CHECK(fv.entries[static_cast<size_t>(i)].op == DiffOp::identity());
  }
  for (int i = 0; i < n_int; ++i) {
    const auto& e = fv.entries[static_cast<size_t>(bl.start + i)];
    CHECK(e.point == s.interior[static_cast<size_t>(i)]);
    CHECK(e.op == DiffOp::laplacian());
  }
  CHECK_THROWS_AS(fv.block("missing"), std::out_of_range);
}
