#include "lodbs/pdae.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lodbs {

namespace {

using Triplet = Eigen::Triplet<double>;

void append_block(std::vector<Triplet>& trips, const SpMat& a, int row0, int col0,
                  double scale = 1.0, bool transpose = false) {
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      const int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
      const int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
      trips.emplace_back(row0 + r, col0 + c, scale * it.value());
    }
}

bool same_boundary_mesh(const BoundaryMesh& a, const BoundaryMesh& b) {
  return a.topology == b.topology && a.num_nodes() == b.num_nodes() &&
         a.s.isApprox(b.s, 1e-14);
}

SpMat trace_selection(const BoundaryMesh& gamma, const DofMap& p_dofs,
                      const DofMap& bulk_dofs) {
  std::vector<Triplet> trips;
  trips.reserve(p_dofs.count());
  for (int j = 0; j < p_dofs.count(); ++j) {
    const int node = p_dofs.free_nodes[j];
    const int col = bulk_dofs.index[gamma.bulk_nodes[node]];
    if (col < 0)
      throw std::logic_error("trace_selection: free surface node over a "
                             "constrained bulk node");
    trips.emplace_back(j, col, 1.0);
  }
  SpMat t(p_dofs.count(), bulk_dofs.count());
  t.setFromTriplets(trips.begin(), trips.end());
  return t;
}

struct EliminatedOperator {
  SpMat mass;       // m_u + trace^T m_p trace
  SpMat stiffness;  // k_u + trace^T a_p trace
};

EliminatedOperator fold(const PdaeSystem& sys) {
  EliminatedOperator op;
  const SpMat tt = sys.trace.transpose();
  op.mass = sys.m_u + tt * sys.m_p * sys.trace;
  op.stiffness = sys.k_u + tt * sys.a_p * sys.trace;
  return op;
}

double relative_residual(const SpMat& a, const Vec& x, const Vec& rhs) {
  const double scale = std::max(1.0, rhs.norm());
  return (a * x - rhs).norm() / scale;
}

}  // namespace

PdaeSystem assemble_system(const BulkMesh& bulk, const BoundaryMesh& p_space,
                           const Coefficient& c, double kappa, Variant variant,
                           const BoundaryMesh* fine,
                           const CorrectorBasis* correctors) {
  if (kappa <= 0.0) throw std::invalid_argument("assemble_system: kappa <= 0");
  PdaeSystem sys;
  sys.variant = variant;
  sys.kappa = kappa;
  sys.bulk = bulk;
  sys.gamma = restrict_to_boundary(bulk, bulk.dynamic);
  sys.p_space = p_space;

  sys.bulk_dofs = build_bulk_dofs(bulk);
  sys.mu_dofs = build_boundary_dofs(sys.gamma);
  sys.p_dofs = build_boundary_dofs(p_space);

  const BulkMatrices bm = assemble_bulk_matrices(bulk, kappa);
  sys.m_u = bm.mass;
  sys.k_u = bm.stiffness;

  const bool p_is_trace = same_boundary_mesh(sys.gamma, p_space);
  const bool with_basis = correctors != nullptr;

  if (variant == Variant::pglod || (variant == Variant::eliminated && with_basis)) {
    if (fine == nullptr || correctors == nullptr)
      throw std::invalid_argument(
          "assemble_system: pglod variants need the fine mesh and correctors");
    if (!p_is_trace)
      throw std::invalid_argument(
          "assemble_system: the multiscale space lives on the trace mesh");
    sys.fine = *fine;
    sys.corrector_m = correctors->m;
    const DofMap fine_dofs = build_boundary_dofs(*fine);
    sys.basis = lod_basis_matrix(*fine, sys.gamma, *correctors);
    sys.prolong_fine =
        restrict_matrix(prolong_boundary(sys.gamma, *fine), fine_dofs.free_nodes,
                        sys.mu_dofs.free_nodes);
    const BoundaryMatrices fine_free = assemble_boundary_matrices(*fine, c, false);
    const LodMatrices lm = lod_boundary_matrices(sys.prolong_fine, sys.basis, fine_free);
    sys.m_p = lm.mass;
    sys.a_p = lm.stiffness;
  } else {
    const BoundaryMatrices pm = assemble_boundary_matrices(p_space, c, false);
    sys.m_p = pm.mass;
    sys.a_p = pm.stiffness;
    if (variant == Variant::eliminated && !p_is_trace)
      throw std::invalid_argument(
          "assemble_system: the eliminated variant needs p on the trace mesh");
  }

  const ConstraintBlocks cb = assemble_constraint(bulk, sys.gamma, p_space);
  sys.b_u = cb.u;
  sys.b_p = cb.p;
  if (p_is_trace) sys.trace = trace_selection(sys.gamma, sys.p_dofs, sys.bulk_dofs);
  return sys;
}

Trajectory implicit_euler(const PdaeSystem& sys, const ProblemData& data,
                          double tau, double t_end) {
  if (tau <= 0.0 || t_end <= 0.0)
    throw std::invalid_argument("implicit_euler: tau and t_end must be positive");
  const int nsteps = static_cast<int>(std::llround(t_end / tau));
  if (nsteps < 1 || std::abs(nsteps * tau - t_end) > 1e-10 * t_end)
    throw std::invalid_argument("implicit_euler: t_end must be a multiple of tau");

  const int nu = sys.n_u();
  const int np = sys.n_p();
  const int nmu = sys.n_mu();

  Trajectory traj;
  traj.times.reserve(nsteps + 1);
  traj.u.reserve(nsteps + 1);
  traj.p.reserve(nsteps + 1);

  Vec u0(nu);
  for (int i = 0; i < nu; ++i) {
    const int node = sys.bulk_dofs.free_nodes[i];
    u0[i] = data.u0(sys.bulk.nodes(node, 0), sys.bulk.nodes(node, 1));
  }
  Vec p0(np);
  for (int j = 0; j < np; ++j) {
    const int node = sys.p_dofs.free_nodes[j];
    p0[j] = data.u0(sys.p_space.xy(node, 0), sys.p_space.xy(node, 1));
  }

  traj.times.push_back(0.0);
  traj.u.push_back(u0);
  traj.p.push_back(p0);
  traj.lambda.push_back(Vec::Zero(nmu));
  traj.constraint_residual.push_back(
      nmu > 0 ? (sys.b_u * u0 + sys.b_p * p0).lpNorm<Eigen::Infinity>() : 0.0);
  traj.solve_residual.push_back(0.0);

  const bool eliminated = sys.variant == Variant::eliminated;

  if (eliminated) {
    const EliminatedOperator op = fold(sys);
    const SpMat system = op.mass + tau * op.stiffness;
    const bool spd = sys.basis.nonZeros() == 0;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    Eigen::SparseLU<SpMat> lu;
    if (spd) {
      ldlt.compute(system);
      if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("implicit_euler: factorization failed");
    } else {
      lu.compute(system);
      if (lu.info() != Eigen::Success)
        throw std::runtime_error("implicit_euler: factorization failed");
    }
    const SpMat trace_t = sys.trace.transpose();
    Vec u = u0;
    for (int step = 1; step <= nsteps; ++step) {
      const double t = step * tau;
      const Vec fu = restrict_vector(assemble_bulk_load(sys.bulk, data.f, t),
                                     sys.bulk_dofs.free_nodes);
      const Vec fp = restrict_vector(assemble_boundary_load(sys.p_space, data.g, t),
                                     sys.p_dofs.free_nodes);
      const Vec rhs = op.mass * u + tau * (fu + trace_t * fp);
      const Vec next = spd ? ldlt.solve(rhs).eval() : lu.solve(rhs).eval();
      const Vec p = sys.trace * next;
      traj.times.push_back(t);
      traj.u.push_back(next);
      traj.p.push_back(p);
      traj.lambda.push_back(Vec());
      traj.constraint_residual.push_back(
          nmu > 0 ? (sys.b_u * next + sys.b_p * p).lpNorm<Eigen::Infinity>() : 0.0);
      traj.solve_residual.push_back(relative_residual(system, next, rhs));
      u = next;
    }
    return traj;
  }

  // Saddle formulation: unknowns [u; p; tau * lambda].
  const int n = nu + np + nmu;
  std::vector<Triplet> trips;
  const SpMat au = sys.m_u + tau * sys.k_u;
  const SpMat ap = sys.m_p + tau * sys.a_p;
  append_block(trips, au, 0, 0);
  append_block(trips, ap, nu, nu);
  append_block(trips, sys.b_u, 0, nu + np, tau, true);
  append_block(trips, sys.b_p, nu, nu + np, tau, true);
  append_block(trips, sys.b_u, nu + np, 0);
  append_block(trips, sys.b_p, nu + np, nu);
  SpMat system(n, n);
  system.setFromTriplets(trips.begin(), trips.end());
  system.makeCompressed();

  Eigen::SparseLU<SpMat> lu(system);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("implicit_euler: saddle factorization failed");

  Vec u = u0, p = p0;
  for (int step = 1; step <= nsteps; ++step) {
    const double t = step * tau;
    const Vec fu = restrict_vector(assemble_bulk_load(sys.bulk, data.f, t),
                                   sys.bulk_dofs.free_nodes);
    Vec fp;
    if (sys.variant == Variant::pglod) {
      // Coarse test functions: the load pairs g with the hats on gamma.
      fp = restrict_vector(assemble_boundary_load(sys.gamma, data.g, t),
                           sys.p_dofs.free_nodes);
    } else {
      fp = restrict_vector(assemble_boundary_load(sys.p_space, data.g, t),
                           sys.p_dofs.free_nodes);
    }
    Vec rhs = Vec::Zero(n);
    rhs.head(nu) = sys.m_u * u + tau * fu;
    rhs.segment(nu, np) = sys.m_p * p + tau * fp;
    const Vec x = lu.solve(rhs);
    u = x.head(nu);
    p = x.segment(nu, np);
    traj.times.push_back(t);
    traj.u.push_back(u);
    traj.p.push_back(p);
    traj.lambda.push_back(x.tail(nmu) / tau);
    traj.constraint_residual.push_back(
        (sys.b_u * u + sys.b_p * p).lpNorm<Eigen::Infinity>());
    traj.solve_residual.push_back(relative_residual(system, x, rhs));
  }
  return traj;
}

std::vector<double> lagrange_multiplier_report(const PdaeSystem& sys,
                                               const Trajectory& traj) {
  const SpMat m_mu = restrict_matrix(
      assemble_boundary_matrices_full(sys.gamma, make_constant_coefficient(1.0)).mass,
      sys.mu_dofs.free_nodes, sys.mu_dofs.free_nodes);
  std::vector<double> norms;
  for (std::size_t k = 1; k < traj.lambda.size(); ++k) {
    const Vec& l = traj.lambda[k];
    norms.push_back(l.size() == 0 ? 0.0 : std::sqrt(l.dot(m_mu * l)));
  }
  return norms;
}

Vec solve_saddle(const SaddleBlocks& blocks, const Vec& rhs) {
  const int na = static_cast<int>(blocks.a.rows());
  const int nb = static_cast<int>(blocks.b.rows());
  if (rhs.size() != na + nb)
    throw std::invalid_argument("solve_saddle: rhs size mismatch");
  std::vector<Triplet> trips;
  append_block(trips, blocks.a, 0, 0);
  if (nb > 0) {
    append_block(trips, blocks.b, na, 0);
    append_block(trips, blocks.b, 0, na, 1.0, true);
  }
  SpMat system(na + nb, na + nb);
  system.setFromTriplets(trips.begin(), trips.end());
  system.makeCompressed();
  Eigen::SparseLU<SpMat> lu(system);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_saddle: singular system");
  const Vec x = lu.solve(rhs);
  if (relative_residual(system, x, rhs) > 1e-10)
    throw std::runtime_error("solve_saddle: residual above tolerance");
  return x;
}

void write_matrix_market(const SpMat& a, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_matrix_market: cannot open " + path);
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(f, "%d %d %d\n", static_cast<int>(a.rows()),
               static_cast<int>(a.cols()), static_cast<int>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      std::fprintf(f, "%d %d %.17g\n", static_cast<int>(it.row()) + 1,
                   static_cast<int>(it.col()) + 1, it.value());
  std::fclose(f);
}

}  // namespace lodbs
