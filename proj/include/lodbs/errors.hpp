#pragma once

#include <optional>
#include <vector>

#include "lodbs/pdae.hpp"

namespace lodbs {

/// Resolved standard-FEM solution used as the ground truth for error norms.
/// The boundary mesh refines the bulk trace as far as needed to resolve the
/// coefficient (meshsize <= epsilon/4).
struct ReferenceSolution {
  BulkMesh bulk;
  BoundaryMesh gamma;
  BoundaryMesh p_mesh;
  DofMap bulk_dofs, p_dofs;
  Trajectory traj;
  double kappa = 0.0, tau = 0.0, t_end = 0.0;

  /// Norm matrices on full node sets: L2 mass and full H1 (unit coefficient).
  SpMat bulk_mass, bulk_h1;
  SpMat gamma_mass, gamma_h1;  ///< on p_mesh
};

ReferenceSolution compute_reference(int n, DynamicBoundary dynamic,
                                    const Coefficient& c, const ProblemData& data,
                                    double kappa, double tau, double t_end);

/// Errors of one run against the reference at final time, in absolute L2 and
/// H1 norms on the reference meshes. The surface field is compared twice:
/// its coarse part (for pglod runs the coarse coefficients, which coincide
/// with the L2 projection of the multiscale solution) and the full
/// multiscale function.
struct ErrorRow {
  double H_Omega = 0.0;
  double H_Gamma = 0.0;
  int m = 0;
  double err_u_L2 = 0.0;
  double err_p_L2 = 0.0;
  double err_u_H1 = 0.0;
  double err_p_H1 = 0.0;
  double err_p_full_H1 = 0.0;
};

ErrorRow error_norms(const PdaeSystem& sys, const Trajectory& traj,
                     const ReferenceSolution& ref, int m);

/// Observed orders between consecutive rows, one entry per row with the
/// first set to NaN; order = log(e_prev/e_cur) / log(H_prev/H_cur), driven
/// by whichever of H_Gamma or H_Omega varies. Vanishing errors give NaN.
struct OrderRow {
  double u_L2, p_L2, u_H1, p_H1, p_full_H1;
};

std::vector<OrderRow> observed_orders(const std::vector<ErrorRow>& rows);

/// Least-squares slope of log(err) against log(H) over the last `window`
/// rows of one error column (selected by the same field order as OrderRow).
double order_fit(const std::vector<ErrorRow>& rows, int column, int window);

/// Ritz projection of a resolved pair (u on a fine bulk mesh, p on the
/// corrector mesh) onto a pglod system: the stationary saddle problem with
/// the shifted surface form. Enforces the localization default
/// m >= ceil(log2(1 / H_Gamma)) unless told otherwise.
struct RitzResult {
  Vec u;       ///< coarse bulk free dofs
  Vec p;       ///< coarse surface coefficients
  Vec lambda;  ///< multiplier
};

RitzResult ritz_projection(const Vec& u_fine_full, const BulkMesh& bulk_fine,
                           const Vec& p_fine_full, const PdaeSystem& sys,
                           const Coefficient& c, bool enforce_localization = true);

/// Discrete inf-sup constant of the constraint pairing against the
/// H^-1/2(Gamma) dual norm: beta^2 is the smallest eigenvalue of
/// B G^-1 B^T measured against the dual-norm Gram matrix, with G the
/// H1(Omega) x H1(Gamma) Gram of the primal pair. Degenerate pairings
/// (no constraint columns) return 0.
double infsup_constant(const BulkMesh& bulk, const BoundaryMesh& gamma);

}  // namespace lodbs
