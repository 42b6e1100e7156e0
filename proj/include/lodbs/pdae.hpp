#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <vector>

#include "lodbs/assembly.hpp"
#include "lodbs/coefficient.hpp"
#include "lodbs/lod.hpp"
#include "lodbs/mesh.hpp"

namespace lodbs {

/// Discretization of the coupled bulk/surface system.
///  - standard_fem: P1 surface space on its own boundary mesh (which may
///    refine the bulk trace), symmetric saddle problem
///  - pglod: multiscale trial space on the coarse trace mesh with coarse test
///    functions, nonsymmetric blocks
///  - eliminated: the surface unknown is folded into the bulk one through the
///    trace identity, leaving a single-field system (with or without the
///    multiscale trial space)
enum class Variant { standard_fem, pglod, eliminated };

struct ProblemData {
  BulkSource f;                                  ///< f(t, x, y)
  SurfaceSource g;                               ///< g(t, s)
  std::function<double(double, double)> u0;      ///< initial bulk state
};

/// Assembled time-invariant blocks of one discretization, together with the
/// meshes that define it. The saddle unknown is x = (u, p), constrained by
/// b_u u + b_p p = 0.
struct PdaeSystem {
  Variant variant = Variant::standard_fem;
  double kappa = 0.0;

  BulkMesh bulk;
  BoundaryMesh gamma;    ///< bulk trace mesh: multiplier space, coarse p space
  BoundaryMesh p_space;  ///< mesh of the p unknown (standard variants)
  std::optional<BoundaryMesh> fine;  ///< corrector mesh (pglod variants)

  DofMap bulk_dofs, mu_dofs, p_dofs;

  SpMat m_u, k_u;  ///< bulk mass and kappa-stiffness on free dofs
  SpMat m_p, a_p;  ///< surface mass and stiffness blocks (PG: nonsymmetric)
  SpMat b_u, b_p;  ///< constraint rows

  /// Trace selection p dof -> bulk free dof, rows of the identity p = u|_Gamma.
  /// Empty when the p mesh refines the trace mesh.
  SpMat trace;

  /// pglod only: multiscale basis on fine free dofs and the coarse-to-fine
  /// prolongation, both restricted to free dofs.
  SpMat basis, prolong_fine;
  /// Patch radius the basis was built with; -1 for non-multiscale systems.
  int corrector_m = -1;

  int n_u() const { return static_cast<int>(m_u.rows()); }
  int n_p() const { return static_cast<int>(m_p.cols()); }
  int n_mu() const { return static_cast<int>(b_u.rows()); }
};

/// Assemble every block of the chosen variant. `p_space` must equal the
/// trace mesh of `bulk` or refine it; pglod variants take the corrector
/// basis computed on `fine` over that trace mesh. The eliminated variant
/// needs the trace identity and therefore p_space == trace mesh.
PdaeSystem assemble_system(const BulkMesh& bulk, const BoundaryMesh& p_space,
                           const Coefficient& c, double kappa, Variant variant,
                           const BoundaryMesh* fine = nullptr,
                           const CorrectorBasis* correctors = nullptr);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> u;       ///< bulk free dofs per step
  std::vector<Vec> p;       ///< p dofs per step (coarse coefficients for pglod)
  std::vector<Vec> lambda;  ///< multiplier per step; size-0 entries for
                            ///< eliminated runs, which recover no multiplier
  /// Max-norm of the constraint residual b_u u + b_p p, per step.
  std::vector<double> constraint_residual;
  /// Relative linear-solve residual, per step.
  std::vector<double> solve_residual;
};

/// Implicit Euler from t = 0 to t_end in steps of tau. The initial surface
/// state interpolates u0 on the p mesh; both factorizations happen once.
Trajectory implicit_euler(const PdaeSystem& sys, const ProblemData& data,
                          double tau, double t_end);

/// L2(Gamma) norm of the recovered multiplier per time step (skipping t = 0,
/// where no multiplier exists).
std::vector<double> lagrange_multiplier_report(const PdaeSystem& sys,
                                               const Trajectory& traj);

/// Solve [[a, b^T], [b, 0]] [x; y] = rhs directly. Reports singular systems
/// and checks the relative residual (<= 1e-10).
struct SaddleBlocks {
  SpMat a;
  SpMat b;
};

Vec solve_saddle(const SaddleBlocks& blocks, const Vec& rhs);

/// Write a sparse matrix in MatrixMarket coordinate format.
void write_matrix_market(const SpMat& a, const std::string& path);

}  // namespace lodbs
