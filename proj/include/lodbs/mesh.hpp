#pragma once

#include <Eigen/Core>

#include <array>
#include <memory>
#include <vector>

namespace lodbs {

/// Which part of the unit-square boundary carries the dynamic (surface PDE)
/// condition. The remainder gets homogeneous Dirichlet data.
enum class DynamicBoundary { full, bottom };

/// Uniform quadrilateral mesh of the unit square with bilinear (Q1) cells.
///
/// Nodes are ordered lexicographically, node(ix, iy) = iy*(n+1) + ix with
/// coordinates (ix/n, iy/n). Cells are ordered the same way; each cell lists
/// its corners counterclockwise starting at the lower left.
struct BulkMesh {
  int n = 0;  ///< cells per side
  double h = 0.0;
  DynamicBoundary dynamic = DynamicBoundary::full;
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;
  Eigen::Matrix<int, Eigen::Dynamic, 4> cells;
  /// Boundary nodes in counterclockwise order starting at (0,0); the segment
  /// from boundary_loop[k] to boundary_loop[k+1 mod 4n] is boundary segment k.
  std::vector<int> boundary_loop;
  /// Parent cell of boundary segment k.
  std::vector<int> boundary_cell;
  /// Per-node flag, true on the Dirichlet part of the boundary.
  std::vector<unsigned char> dirichlet;

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_cells() const { return static_cast<int>(cells.rows()); }
  int node_index(int ix, int iy) const { return iy * (n + 1) + ix; }
};

/// One-dimensional mesh on (part of) the boundary curve, parameterized by
/// counterclockwise arclength from the corner (0,0). A full-boundary mesh is
/// a closed loop of length 4; the bottom edge is an interval of length 1.
struct BoundaryMesh {
  enum class Topology { loop, interval };

  Topology topology = Topology::loop;
  double length = 0.0;
  /// Node arclengths, strictly increasing. Loops store one entry per node
  /// (the wrap-around segment closes back to node 0).
  Eigen::VectorXd s;
  /// Node coordinates in the plane. For meshes obtained by restriction these
  /// are copied bitwise from the bulk nodes.
  Eigen::Matrix<double, Eigen::Dynamic, 2> xy;
  Eigen::Matrix<int, Eigen::Dynamic, 2> segments;
  /// Interval topology only: whether the first/last node carries Dirichlet
  /// data (and is excluded from the trial, test and multiplier spaces).
  std::array<bool, 2> endpoint_dirichlet{false, false};
  /// For restriction meshes, bulk node index per boundary node; else empty.
  std::vector<int> bulk_nodes;
  std::shared_ptr<const BoundaryMesh> parent;
  int refinement_levels = 0;

  int num_nodes() const { return static_cast<int>(s.size()); }
  int num_segments() const { return static_cast<int>(segments.rows()); }
  double segment_length(int t) const;
  /// Left arclength of segment t.
  double segment_left(int t) const { return s[segments(t, 0)]; }
};

/// Point on the boundary curve at arclength position x, counterclockwise
/// from (0,0). Interval meshes use the bottom-edge chart s -> (s, 0).
Eigen::Vector2d gamma_point(double s_pos, BoundaryMesh::Topology topology);

/// Build the uniform n-by-n Q1 mesh of the unit square. The Dirichlet mask
/// is empty for a fully dynamic boundary and marks all boundary nodes outside
/// the open bottom edge otherwise (the corners are Dirichlet in that case).
BulkMesh build_bulk_mesh(int n, DynamicBoundary dynamic = DynamicBoundary::full);

/// Extract the boundary mesh carried by the bulk mesh trace. The selector
/// must match the one the mesh was built with.
BoundaryMesh restrict_to_boundary(const BulkMesh& mesh, DynamicBoundary selector);

/// Uniform dyadic refinement; every segment splits into 2^levels children and
/// every coarse node stays a fine node with identical arclength. levels = 0
/// returns a copy whose parent is the input mesh.
BoundaryMesh refine_boundary(const BoundaryMesh& mesh, int levels);

/// Element patch U_m(t): m rounds of vertex-neighbor expansion around
/// element t. Returns sorted element indices; size min(2m+1, #elements) on a
/// loop and at most 2m+1 on an interval.
std::vector<int> element_patch(const BoundaryMesh& mesh, int t, int m);

/// True if `fine` is a dyadic refinement of `coarse` (same topology and
/// length, node counts in power-of-two ratio, coarse nodes present in the
/// fine mesh up to 1e-12 in arclength).
bool is_dyadic_refinement(const BoundaryMesh& coarse, const BoundaryMesh& fine);

}  // namespace lodbs
