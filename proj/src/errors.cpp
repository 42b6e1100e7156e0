#include "lodbs/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lodbs {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double norm2(const Vec& v, const SpMat& gram) { return std::sqrt(v.dot(gram * v)); }

/// Error of `run` (on mesh_run) against `ref` (on mesh_ref), both full nodal
/// vectors on nested boundary meshes. Returns {L2, H1}.
std::pair<double, double> boundary_error(const Vec& run, const BoundaryMesh& mesh_run,
                                         const Vec& ref, const BoundaryMesh& mesh_ref,
                                         const SpMat& ref_mass, const SpMat& ref_h1) {
  const Coefficient unit = make_constant_coefficient(1.0);
  if (mesh_run.num_segments() == mesh_ref.num_segments()) {
    const Vec diff = run - ref;
    return {norm2(diff, ref_mass), norm2(diff, ref_h1)};
  }
  if (is_dyadic_refinement(mesh_run, mesh_ref)) {
    const SpMat p = prolong_boundary(mesh_run, mesh_ref);
    const Vec diff = p * run - ref;
    return {norm2(diff, ref_mass), norm2(diff, ref_h1)};
  }
  if (!is_dyadic_refinement(mesh_ref, mesh_run))
    throw std::invalid_argument("error_norms: boundary meshes are not nested");
  // The run mesh is finer; lift the reference instead.
  const SpMat p = prolong_boundary(mesh_ref, mesh_run);
  const BoundaryMatrices bm = assemble_boundary_matrices_full(mesh_run, unit);
  const SpMat h1 = bm.mass + bm.stiffness;
  const Vec diff = run - Vec(p * ref);
  return {norm2(diff, bm.mass), norm2(diff, h1)};
}

}  // namespace

ReferenceSolution compute_reference(int n, DynamicBoundary dynamic,
                                    const Coefficient& c, const ProblemData& data,
                                    double kappa, double tau, double t_end) {
  ReferenceSolution ref;
  ref.bulk = build_bulk_mesh(n, dynamic);
  ref.gamma = restrict_to_boundary(ref.bulk, dynamic);
  ref.kappa = kappa;
  ref.tau = tau;
  ref.t_end = t_end;

  int levels = 0;
  if (c.kind != Coefficient::Kind::constant) {
    double h = ref.gamma.segment_length(0);
    while (h > c.epsilon / 4.0 + 1e-14) {
      h *= 0.5;
      ++levels;
    }
  }
  ref.p_mesh = levels > 0 ? refine_boundary(ref.gamma, levels) : ref.gamma;

  // Rough direct-factorization estimate; refuse runs that would thrash.
  const double ndofs = static_cast<double>(ref.bulk.num_nodes());
  const double est_bytes = 12.0 * ndofs * std::log2(std::max(ndofs, 2.0)) * 12.0;
  if (est_bytes > 12e9)
    throw std::runtime_error(
        "compute_reference: estimated factorization memory " +
        std::to_string(est_bytes / 1e9) + " GB exceeds the 12 GB budget");

  const Variant variant = levels == 0 ? Variant::eliminated : Variant::standard_fem;
  const PdaeSystem sys = assemble_system(ref.bulk, ref.p_mesh, c, kappa, variant);
  ref.traj = implicit_euler(sys, data, tau, t_end);
  ref.bulk_dofs = sys.bulk_dofs;
  ref.p_dofs = sys.p_dofs;

  const BulkMatrices bm = assemble_bulk_matrices_full(ref.bulk, 1.0);
  ref.bulk_mass = bm.mass;
  ref.bulk_h1 = bm.mass + bm.stiffness;
  const BoundaryMatrices gm =
      assemble_boundary_matrices_full(ref.p_mesh, make_constant_coefficient(1.0));
  ref.gamma_mass = gm.mass;
  ref.gamma_h1 = gm.mass + gm.stiffness;
  return ref;
}

ErrorRow error_norms(const PdaeSystem& sys, const Trajectory& traj,
                     const ReferenceSolution& ref, int m) {
  if (std::abs(traj.times.back() - ref.traj.times.back()) > 1e-12)
    throw std::invalid_argument("error_norms: final times differ");
  if (traj.times.size() != ref.traj.times.size())
    throw std::invalid_argument("error_norms: time grids differ");

  ErrorRow row;
  row.H_Omega = sys.bulk.h;
  // The resolution of the p unknown: the trace mesh for multiscale runs,
  // the (possibly refined) p mesh otherwise.
  row.H_Gamma = (sys.basis.nonZeros() > 0 ? sys.gamma : sys.p_space).segment_length(0);
  row.m = m;

  // Bulk error on the reference mesh.
  if (ref.bulk.n % sys.bulk.n != 0)
    throw std::invalid_argument("error_norms: reference bulk mesh must refine the run");
  const Vec u_run =
      extend_vector(traj.u.back(), sys.bulk_dofs.free_nodes, sys.bulk.num_nodes());
  const Vec u_ref = extend_vector(ref.traj.u.back(), ref.bulk_dofs.free_nodes,
                                  ref.bulk.num_nodes());
  const SpMat p_bulk = prolong_bulk(sys.bulk, ref.bulk);
  const Vec e_u = p_bulk * u_run - u_ref;
  row.err_u_L2 = norm2(e_u, ref.bulk_mass);
  row.err_u_H1 = norm2(e_u, ref.bulk_h1);

  // Surface errors: coarse part and full multiscale reconstruction.
  const Vec p_ref = extend_vector(ref.traj.p.back(), ref.p_dofs.free_nodes,
                                  ref.p_mesh.num_nodes());
  const bool lod = sys.basis.nonZeros() > 0;
  const BoundaryMesh& coarse_mesh = lod ? sys.gamma : sys.p_space;
  const Vec p_coarse = extend_vector(traj.p.back(), sys.p_dofs.free_nodes,
                                     coarse_mesh.num_nodes());
  auto [pl2, ph1] = boundary_error(p_coarse, coarse_mesh, p_ref, ref.p_mesh,
                                   ref.gamma_mass, ref.gamma_h1);
  row.err_p_L2 = pl2;
  row.err_p_H1 = ph1;

  if (lod) {
    const DofMap fine_dofs = build_boundary_dofs(*sys.fine);
    const Vec p_full = extend_vector(Vec(sys.basis * traj.p.back()),
                                     fine_dofs.free_nodes, sys.fine->num_nodes());
    auto [fl2, fh1] = boundary_error(p_full, *sys.fine, p_ref, ref.p_mesh,
                                     ref.gamma_mass, ref.gamma_h1);
    (void)fl2;
    row.err_p_full_H1 = fh1;
  } else {
    row.err_p_full_H1 = ph1;
  }
  return row;
}

std::vector<OrderRow> observed_orders(const std::vector<ErrorRow>& rows) {
  std::vector<OrderRow> orders(rows.size(), OrderRow{kNan, kNan, kNan, kNan, kNan});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double ratio = rows[i - 1].H_Gamma / rows[i].H_Gamma;
    if (ratio == 1.0) ratio = rows[i - 1].H_Omega / rows[i].H_Omega;
    if (ratio <= 0.0 || ratio == 1.0) continue;
    const double denom = std::log(ratio);
    auto ord = [&](double prev, double cur) {
      if (prev <= 0.0 || cur <= 0.0) return kNan;
      return std::log(prev / cur) / denom;
    };
    orders[i].u_L2 = ord(rows[i - 1].err_u_L2, rows[i].err_u_L2);
    orders[i].p_L2 = ord(rows[i - 1].err_p_L2, rows[i].err_p_L2);
    orders[i].u_H1 = ord(rows[i - 1].err_u_H1, rows[i].err_u_H1);
    orders[i].p_H1 = ord(rows[i - 1].err_p_H1, rows[i].err_p_H1);
    orders[i].p_full_H1 = ord(rows[i - 1].err_p_full_H1, rows[i].err_p_full_H1);
  }
  return orders;
}

namespace {
double column_value(const ErrorRow& row, int column) {
  switch (column) {
    case 0: return row.err_u_L2;
    case 1: return row.err_p_L2;
    case 2: return row.err_u_H1;
    case 3: return row.err_p_H1;
    case 4: return row.err_p_full_H1;
  }
  throw std::invalid_argument("order_fit: column out of range");
}
}  // namespace

double order_fit(const std::vector<ErrorRow>& rows, int column, int window) {
  const int n = static_cast<int>(rows.size());
  const int k = std::min(window, n);
  if (k < 2) return kNan;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = n - k; i < n; ++i) {
    const double e = column_value(rows[i], column);
    const double h = rows[i].H_Gamma;
    if (e <= 0.0 || h <= 0.0) return kNan;
    const double x = std::log(h);
    const double y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

RitzResult ritz_projection(const Vec& u_fine_full, const BulkMesh& bulk_fine,
                           const Vec& p_fine_full, const PdaeSystem& sys,
                           const Coefficient& c, bool enforce_localization) {
  if (!sys.fine.has_value() || sys.basis.nonZeros() == 0)
    throw std::invalid_argument("ritz_projection: needs a pglod system");
  const BoundaryMesh& fine = *sys.fine;

  // The projection target uses the shifted surface form.
  const DofMap fine_dofs = build_boundary_dofs(fine);
  const BoundaryMatrices fine_shift_full =
      assemble_boundary_matrices_full(fine, c, true);
  const SpMat a_shift_free = restrict_matrix(
      fine_shift_full.stiffness, fine_dofs.free_nodes, fine_dofs.free_nodes);
  BoundaryMatrices fine_free;
  fine_free.stiffness = a_shift_free;
  fine_free.mass = restrict_matrix(fine_shift_full.mass, fine_dofs.free_nodes,
                                   fine_dofs.free_nodes);
  const LodMatrices lm =
      lod_boundary_matrices(sys.prolong_fine, sys.basis, fine_free);

  const int nu = sys.n_u();
  const int np = sys.n_p();
  const int nmu = sys.n_mu();

  if (enforce_localization) {
    const double h_gamma = sys.gamma.segment_length(0);
    const int needed =
        static_cast<int>(std::ceil(std::log2(1.0 / h_gamma) - 1e-12));
    if (sys.corrector_m >= 0 && sys.corrector_m < needed)
      throw std::invalid_argument(
          "ritz_projection: patch radius m below the default "
          "ceil(log2(1/H_Gamma)); pass enforce_localization = false to "
          "override");
  }

  // Right-hand side: the fine pair tested against the coarse spaces.
  const BulkMatrices k_fine = assemble_bulk_matrices_full(bulk_fine, sys.kappa);
  const SpMat p_bulk = prolong_bulk(sys.bulk, bulk_fine);
  const Vec rhs_u_full = SpMat(p_bulk.transpose()) * (k_fine.stiffness * u_fine_full);
  const Vec rhs_u = restrict_vector(rhs_u_full, sys.bulk_dofs.free_nodes);

  const SpMat p_gamma = prolong_boundary(sys.gamma, fine);
  const Vec rhs_q_full = SpMat(p_gamma.transpose()) * (fine_shift_full.stiffness * p_fine_full);
  const Vec rhs_q = restrict_vector(rhs_q_full, sys.mu_dofs.free_nodes);

  SaddleBlocks blocks;
  std::vector<Eigen::Triplet<double>> at;
  for (int k = 0; k < sys.k_u.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.k_u, k); it; ++it)
      at.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                      it.value());
  for (int k = 0; k < lm.stiffness.outerSize(); ++k)
    for (SpMat::InnerIterator it(lm.stiffness, k); it; ++it)
      at.emplace_back(nu + static_cast<int>(it.row()),
                      nu + static_cast<int>(it.col()), it.value());
  blocks.a.resize(nu + np, nu + np);
  blocks.a.setFromTriplets(at.begin(), at.end());

  std::vector<Eigen::Triplet<double>> bt;
  for (int k = 0; k < sys.b_u.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.b_u, k); it; ++it)
      bt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                      it.value());
  for (int k = 0; k < sys.b_p.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.b_p, k); it; ++it)
      bt.emplace_back(static_cast<int>(it.row()), nu + static_cast<int>(it.col()),
                      it.value());
  blocks.b.resize(nmu, nu + np);
  blocks.b.setFromTriplets(bt.begin(), bt.end());

  Vec rhs = Vec::Zero(nu + np + nmu);
  rhs.head(nu) = rhs_u;
  rhs.segment(nu, np) = rhs_q;
  const Vec x = solve_saddle(blocks, rhs);

  RitzResult out;
  out.u = x.head(nu);
  out.p = x.segment(nu, np);
  out.lambda = x.tail(nmu);
  return out;
}

double infsup_constant(const BulkMesh& bulk, const BoundaryMesh& gamma) {
  const DofMap bulk_dofs = build_bulk_dofs(bulk);
  const DofMap mu_dofs = build_boundary_dofs(gamma);
  const ConstraintBlocks cb = assemble_constraint(bulk, gamma, gamma);
  const int nmu = static_cast<int>(cb.u.rows());
  if (nmu == 0 || cb.u.cols() + cb.p.cols() == 0) return 0.0;

  const BulkMatrices bm = assemble_bulk_matrices(bulk, 1.0);
  const SpMat g_v = bm.mass + bm.stiffness;
  const Coefficient unit = make_constant_coefficient(1.0);
  const BoundaryMatrices gm = assemble_boundary_matrices(gamma, unit);
  const SpMat g_q = gm.mass + gm.stiffness;

  Eigen::SimplicialLDLT<SpMat> solver_v(g_v);
  Eigen::SimplicialLDLT<SpMat> solver_q(g_q);
  if (solver_v.info() != Eigen::Success || solver_q.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant: Gram factorization failed");

  const Eigen::MatrixXd but = Eigen::MatrixXd(cb.u).transpose();
  const Eigen::MatrixXd bpt = Eigen::MatrixXd(cb.p).transpose();
  const Eigen::MatrixXd xu = solver_v.solve(but);
  const Eigen::MatrixXd xq = solver_q.solve(bpt);
  Eigen::MatrixXd s = Eigen::MatrixXd(cb.u) * xu + Eigen::MatrixXd(cb.p) * xq;
  s = 0.5 * (s + s.transpose()).eval();

  // Dual-norm Gram on the multiplier space from the (A, M) pencil.
  const Eigen::MatrixXd m_mu = Eigen::MatrixXd(gm.mass);
  const Eigen::MatrixXd a_mu = Eigen::MatrixXd(gm.stiffness);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> pencil(a_mu, m_mu);
  if (pencil.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant: pencil decomposition failed");
  const Eigen::VectorXd lambda = pencil.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd v = pencil.eigenvectors();
  const Eigen::VectorXd scale = (lambda.array() + 1.0).rsqrt();
  const Eigen::MatrixXd gram =
      m_mu * v * scale.asDiagonal() * v.transpose() * m_mu;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(s, gram);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant: eigenvalue solve failed");
  const double beta2 = ges.eigenvalues().minCoeff();
  return std::sqrt(std::max(0.0, beta2));
}

}  // namespace lodbs
