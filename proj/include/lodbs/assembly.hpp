#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include "lodbs/coefficient.hpp"
#include "lodbs/mesh.hpp"

namespace lodbs {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Time-dependent volume source f(t, x, y).
using BulkSource = std::function<double(double, double, double)>;
/// Time-dependent surface source g(t, s) in arclength coordinates.
using SurfaceSource = std::function<double(double, double)>;

/// Compact numbering of the unconstrained nodes of a mesh. `index` maps a
/// node to its free slot or -1.
struct DofMap {
  std::vector<int> free_nodes;
  std::vector<int> index;

  int count() const { return static_cast<int>(free_nodes.size()); }
};

DofMap build_bulk_dofs(const BulkMesh& mesh);
DofMap build_boundary_dofs(const BoundaryMesh& mesh);

/// Submatrix A(rows, cols) through node lists (e.g. DofMap::free_nodes).
SpMat restrict_matrix(const SpMat& a, const std::vector<int>& rows,
                      const std::vector<int>& cols);
Vec restrict_vector(const Vec& v, const std::vector<int>& nodes);
/// Scatter a compact vector back to full node numbering, zero elsewhere.
Vec extend_vector(const Vec& v, const std::vector<int>& nodes, int full_size);

struct BulkMatrices {
  SpMat mass;
  SpMat stiffness;  ///< kappa-weighted
};

/// Q1 mass and stiffness on the free bulk dofs (Dirichlet rows and columns
/// eliminated). Element integrals are exact on the uniform square cells.
BulkMatrices assemble_bulk_matrices(const BulkMesh& mesh, double kappa);
/// Same matrices on the full node set, no elimination.
BulkMatrices assemble_bulk_matrices_full(const BulkMesh& mesh, double kappa);

struct BoundaryMatrices {
  SpMat mass;
  SpMat stiffness;  ///< coefficient-weighted, plus alpha shift if requested
};

/// P1 mass and coefficient-weighted stiffness on the free boundary nodes.
/// With `with_alpha_shift` the stiffness becomes the shifted bilinear form
/// a(p, q) + alpha (p, q) with alpha the coefficient's lower bound, which is
/// elliptic also on closed loops. Coefficient integrals follow the rules in
/// coefficient.hpp, so unresolved oscillations are still integrated to
/// near-machine accuracy.
BoundaryMatrices assemble_boundary_matrices(const BoundaryMesh& mesh,
                                            const Coefficient& c,
                                            bool with_alpha_shift = false);
BoundaryMatrices assemble_boundary_matrices_full(const BoundaryMesh& mesh,
                                                 const Coefficient& c,
                                                 bool with_alpha_shift = false);

/// Constraint blocks of the pairing b(q - v|_Gamma, mu): rows are free
/// multiplier dofs on `mu_mesh` (the bulk trace mesh), columns of `u` span
/// free bulk dofs and columns of `p` span free nodes of `p_mesh`. `p_mesh`
/// must be `mu_mesh` itself or a dyadic refinement of it.
struct ConstraintBlocks {
  SpMat u;  ///< -(v|_Gamma, mu)
  SpMat p;  ///< +(q, mu)
};

ConstraintBlocks assemble_constraint(const BulkMesh& mesh,
                                     const BoundaryMesh& mu_mesh,
                                     const BoundaryMesh& p_mesh);

/// Load vector (f(t), phi_i) on the full bulk node set, 2x2 Gauss per cell
/// (exact whenever f is Q1, so f == 1 reproduces mass-matrix row sums).
Vec assemble_bulk_load(const BulkMesh& mesh, const BulkSource& f, double t);

/// Load vector (g(t), phi_i) on the full boundary node set, 3-point Gauss
/// per segment.
Vec assemble_boundary_load(const BoundaryMesh& mesh, const SurfaceSource& g,
                           double t);

/// P1 prolongation between nested boundary meshes, full node sets. Exact
/// interpolation: coarse hats map to their fine-mesh representations.
SpMat prolong_boundary(const BoundaryMesh& coarse, const BoundaryMesh& fine);

/// Q1 prolongation between uniform bulk meshes whose resolutions divide.
SpMat prolong_bulk(const BulkMesh& coarse, const BulkMesh& fine);

}  // namespace lodbs
