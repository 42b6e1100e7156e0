#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

#include "lodbs/assembly.hpp"
#include "lodbs/coefficient.hpp"
#include "lodbs/mesh.hpp"

namespace lodbs {

/// Quasi-interpolation onto the coarse boundary space.
///  - nodal:   (I_H v)(z) = v(z), point evaluation at coarse nodes
///  - clement: (I_H v)(z) = (v, phi_z) / (1, phi_z), weighted node averages
enum class InterpolationKind { nodal, clement };

/// Bilinear form driving the correctors: the coefficient form a(p, q) alone
/// or its shifted elliptic version a(p, q) + alpha (p, q).
enum class CorrectorForm { plain, shifted };

/// I_H as a (coarse free dofs) x (fine free dofs) matrix. Rows act on fine
/// coefficient vectors; Dirichlet nodes are dropped on both sides.
struct InterpolationOperator {
  InterpolationKind kind = InterpolationKind::clement;
  SpMat matrix;
};

InterpolationOperator build_interpolation(const BoundaryMesh& fine,
                                          const BoundaryMesh& coarse,
                                          InterpolationKind kind);

/// L2 projection Pi_H onto the coarse space, kept in factored form
/// Pi_H v = M_c^-1 (P^T M_f) v. The kernel of `cross` is the fine-scale
/// remainder space W.
struct L2Projection {
  SpMat cross;        ///< (P^T M_f) on free dofs
  SpMat coarse_mass;  ///< M_c on free dofs
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> solver;

  Vec apply(const Vec& fine_values) const;
};

L2Projection build_l2_projection(const BoundaryMesh& fine,
                                 const BoundaryMesh& coarse);

/// Element correctors summed per coarse hat function. Column z holds the
/// localized corrector of the hat at coarse node z, a fine-space function in
/// the kernel of I_H supported on the union of the contributing patches.
struct CorrectorBasis {
  InterpolationKind kind = InterpolationKind::clement;
  CorrectorForm form = CorrectorForm::shifted;
  int m = 0;
  /// fine free dofs x coarse free dofs
  SpMat correctors;
  /// Per coarse dof, sorted coarse element indices of the support.
  std::vector<std::vector<int>> support;
};

/// Solve the patch problems: for every coarse element T and adjacent hat
/// lambda_z, find G_T lambda_z in W(U_m(T)) with
///     form(G_T lambda_z, w) = form_T(lambda_z, w)  for all w in W(U_m(T)),
/// where form_T integrates over T only. The nodal kind makes the patch a
/// single element regardless of m (correctors are exactly local there); the
/// Clement kind restricts W by the moment conditions (w, phi_z) = 0.
CorrectorBasis compute_correctors(const BoundaryMesh& fine,
                                  const BoundaryMesh& coarse,
                                  const Coefficient& c, int m,
                                  CorrectorForm form, InterpolationKind kind);

/// Multiscale basis (id - G_m) applied to the coarse hats: P - correctors,
/// on free dofs.
SpMat lod_basis_matrix(const BoundaryMesh& fine, const BoundaryMesh& coarse,
                       const CorrectorBasis& cb);

/// Petrov-Galerkin coarse matrices: mass = P^T M_f basis and
/// stiffness = P^T A_f basis, with the coarse hats as test functions. Both
/// are intentionally nonsymmetric.
struct LodMatrices {
  SpMat mass;
  SpMat stiffness;
};

LodMatrices lod_boundary_matrices(const SpMat& prolong_free, const SpMat& basis,
                                  const BoundaryMatrices& fine_free);

/// Localization error against the global correctors: for m = 0..max_m the
/// worst relative error over the coarse hats,
///     max_z  ||(G - G_m) lambda_z||_{H1} / ||lambda_z||_{H1},
/// measured in the coefficient-free H1 norm on the boundary.
struct DecayRow {
  int m = 0;
  double relative_energy_error = 0.0;
};

std::vector<DecayRow> corrector_decay_profile(const BoundaryMesh& fine,
                                              const BoundaryMesh& coarse,
                                              const Coefficient& c,
                                              CorrectorForm form, int max_m);

}  // namespace lodbs
