#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "lodbs/mesh.hpp"

using namespace lodbs;

namespace {

// Reference patch: repeated one-ring expansion over shared vertices.
std::vector<int> brute_force_patch(const BoundaryMesh& mesh, int t, int m) {
  const int ns = mesh.num_segments();
  std::set<int> patch{t};
  for (int round = 0; round < m; ++round) {
    std::set<int> next = patch;
    for (int e : patch)
      for (int other = 0; other < ns; ++other) {
        if (next.count(other)) continue;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            if (mesh.segments(e, a) == mesh.segments(other, b)) next.insert(other);
      }
    patch.swap(next);
  }
  return {patch.begin(), patch.end()};
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("bulk mesh n=2 layout") {
  const BulkMesh mesh = build_bulk_mesh(2);
  CHECK(mesh.num_nodes() == 9);
  CHECK(mesh.num_cells() == 4);
  CHECK(mesh.h == 0.5);

  // Lexicographic nodes, coordinates exactly ix/n.
  for (int iy = 0; iy <= 2; ++iy)
    for (int ix = 0; ix <= 2; ++ix) {
      const int k = mesh.node_index(ix, iy);
      CHECK(mesh.nodes(k, 0) == static_cast<double>(ix) / 2.0);
      CHECK(mesh.nodes(k, 1) == static_cast<double>(iy) / 2.0);
    }

  // Counterclockwise corners from the lower left.
  CHECK(mesh.cells(0, 0) == 0);
  CHECK(mesh.cells(0, 1) == 1);
  CHECK(mesh.cells(0, 2) == 4);
  CHECK(mesh.cells(0, 3) == 3);
  CHECK(mesh.cells(3, 0) == 4);
  CHECK(mesh.cells(3, 1) == 5);
  CHECK(mesh.cells(3, 2) == 8);
  CHECK(mesh.cells(3, 3) == 7);

  const std::vector<int> loop{0, 1, 2, 5, 8, 7, 6, 3};
  CHECK(mesh.boundary_loop == loop);
  CHECK(mesh.boundary_cell.size() == 8);
}

TEST_CASE("dirichlet masks per boundary selector") {
  const BulkMesh full = build_bulk_mesh(4, DynamicBoundary::full);
  CHECK(std::count(full.dirichlet.begin(), full.dirichlet.end(), 1) == 0);

  const BulkMesh bottom = build_bulk_mesh(4, DynamicBoundary::bottom);
  int constrained = 0;
  for (int iy = 0; iy <= 4; ++iy)
    for (int ix = 0; ix <= 4; ++ix) {
      const bool on_boundary = ix == 0 || ix == 4 || iy == 0 || iy == 4;
      const bool open_bottom = iy == 0 && ix > 0 && ix < 4;
      const bool expect = on_boundary && !open_bottom;
      CHECK(static_cast<bool>(bottom.dirichlet[bottom.node_index(ix, iy)]) == expect);
      constrained += expect;
    }
  // 16 boundary nodes, 3 interior bottom nodes stay free.
  CHECK(constrained == 13);
}

TEST_CASE("boundary restriction carries bulk data bitwise") {
  const BulkMesh bulk = build_bulk_mesh(4);
  const BoundaryMesh gamma = restrict_to_boundary(bulk, DynamicBoundary::full);

  CHECK(gamma.topology == BoundaryMesh::Topology::loop);
  CHECK(gamma.length == 4.0);
  CHECK(gamma.num_nodes() == 16);
  CHECK(gamma.num_segments() == 16);
  for (int k = 0; k < gamma.num_nodes(); ++k) {
    CHECK(gamma.s[k] == 0.25 * k);
    const int b = gamma.bulk_nodes[static_cast<std::size_t>(k)];
    CHECK(gamma.xy(k, 0) == bulk.nodes(b, 0));
    CHECK(gamma.xy(k, 1) == bulk.nodes(b, 1));
  }
  // Wrap-around segment closes the loop.
  CHECK(gamma.segments(15, 0) == 15);
  CHECK(gamma.segments(15, 1) == 0);
  CHECK(gamma.segment_length(15) == doctest::Approx(0.25).epsilon(1e-15));

  const BulkMesh bb = build_bulk_mesh(4, DynamicBoundary::bottom);
  const BoundaryMesh bottom = restrict_to_boundary(bb, DynamicBoundary::bottom);
  CHECK(bottom.topology == BoundaryMesh::Topology::interval);
  CHECK(bottom.length == 1.0);
  CHECK(bottom.num_nodes() == 5);
  CHECK(bottom.num_segments() == 4);
  CHECK(bottom.endpoint_dirichlet[0]);
  CHECK(bottom.endpoint_dirichlet[1]);
  for (int k = 0; k < 5; ++k) {
    CHECK(bottom.xy(k, 0) == 0.25 * k);
    CHECK(bottom.xy(k, 1) == 0.0);
  }
}

TEST_CASE("gamma_point walks the square counterclockwise") {
  using T = BoundaryMesh::Topology;
  CHECK(gamma_point(0.0, T::loop).isApprox(Eigen::Vector2d(0, 0), 0));
  CHECK(gamma_point(0.5, T::loop).isApprox(Eigen::Vector2d(0.5, 0), 0));
  CHECK(gamma_point(1.5, T::loop) == Eigen::Vector2d(1, 0.5));
  CHECK(gamma_point(2.5, T::loop) == Eigen::Vector2d(0.5, 1));
  CHECK(gamma_point(3.5, T::loop) == Eigen::Vector2d(0, 0.5));
  CHECK(gamma_point(0.75, T::interval) == Eigen::Vector2d(0.75, 0));
}

TEST_CASE("dyadic refinement nests the coarse nodes") {
  const BulkMesh bulk = build_bulk_mesh(4);
  const BoundaryMesh coarse = restrict_to_boundary(bulk, DynamicBoundary::full);
  const BoundaryMesh fine = refine_boundary(coarse, 2);

  CHECK(fine.num_segments() == 64);
  CHECK(fine.refinement_levels == 2);
  REQUIRE(fine.parent != nullptr);
  for (int k = 0; k < coarse.num_nodes(); ++k) {
    bool found = false;
    for (int j = 0; j < fine.num_nodes(); ++j)
      if (std::abs(fine.s[j] - coarse.s[k]) < 1e-15) found = true;
    CHECK(found);
  }

  CHECK(is_dyadic_refinement(coarse, fine));
  CHECK(is_dyadic_refinement(coarse, coarse));
  CHECK_FALSE(is_dyadic_refinement(fine, coarse));

  const BoundaryMesh copy = refine_boundary(coarse, 0);
  CHECK(copy.num_segments() == coarse.num_segments());
  CHECK(copy.parent.get() != nullptr);

  const BulkMesh bb = build_bulk_mesh(4, DynamicBoundary::bottom);
  const BoundaryMesh interval = restrict_to_boundary(bb, DynamicBoundary::bottom);
  CHECK_FALSE(is_dyadic_refinement(interval, fine));
}

TEST_CASE("element patches match one-ring expansion") {
  const BulkMesh bulk = build_bulk_mesh(2);
  const BoundaryMesh loop = restrict_to_boundary(bulk, DynamicBoundary::full);
  const BulkMesh bb = build_bulk_mesh(8, DynamicBoundary::bottom);
  const BoundaryMesh interval = restrict_to_boundary(bb, DynamicBoundary::bottom);

  for (const BoundaryMesh* mesh : {&loop, &interval})
    for (int t = 0; t < mesh->num_segments(); ++t)
      for (int m = 0; m <= 5; ++m) {
        const auto patch = element_patch(*mesh, t, m);
        CHECK(patch == brute_force_patch(*mesh, t, m));
        CHECK(std::is_sorted(patch.begin(), patch.end()));
      }

  // Loop wrap: the m=1 patch of element 0 reaches across the seam.
  CHECK(element_patch(loop, 0, 1) == std::vector<int>{0, 1, 7});
  // Saturation at the full mesh.
  CHECK(element_patch(loop, 3, 50).size() == 8);
  // Interval patches clip at the ends.
  CHECK(element_patch(interval, 0, 2) == std::vector<int>{0, 1, 2});
}

}  // TEST_SUITE
