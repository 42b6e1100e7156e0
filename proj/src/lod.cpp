#include "lodbs/lod.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

#include "lodbs/parallel.hpp"

namespace lodbs {

namespace {

using Triplet = Eigen::Triplet<double>;

int refinement_ratio(const BoundaryMesh& coarse, const BoundaryMesh& fine) {
  if (!is_dyadic_refinement(coarse, fine))
    throw std::invalid_argument("lod: fine mesh must be a refinement of coarse");
  return fine.num_segments() / coarse.num_segments();
}

// (P^T M_f) on full node sets; kernel of its free restriction is W.
SpMat cross_mass_full(const BoundaryMesh& fine, const BoundaryMesh& coarse) {
  const SpMat p = prolong_boundary(coarse, fine);
  const SpMat mf =
      assemble_boundary_matrices_full(fine, make_constant_coefficient(1.0)).mass;
  return SpMat(p.transpose()) * mf;
}

/// Patch solve context shared by compute_correctors and the decay profile.
struct CorrectorWorkspace {
  int r = 0;
  DofMap fine_dofs, coarse_dofs;
  SpMat form_free;   // corrector bilinear form on free fine dofs
  SpMat cross_free;  // moment constraints (coarse free x fine free)
  // Per fine segment: length and coefficient integral.
  std::vector<double> seg_len, seg_a;
  double alpha = 0.0;
};

CorrectorWorkspace make_workspace(const BoundaryMesh& fine,
                                  const BoundaryMesh& coarse,
                                  const Coefficient& c, CorrectorForm form) {
  CorrectorWorkspace ws;
  ws.r = refinement_ratio(coarse, fine);
  ws.fine_dofs = build_boundary_dofs(fine);
  ws.coarse_dofs = build_boundary_dofs(coarse);
  ws.alpha = form == CorrectorForm::shifted ? c.lower : 0.0;
  const BoundaryMatrices full = assemble_boundary_matrices_full(
      fine, c, form == CorrectorForm::shifted);
  ws.form_free = restrict_matrix(full.stiffness, ws.fine_dofs.free_nodes,
                                 ws.fine_dofs.free_nodes);
  ws.cross_free = restrict_matrix(cross_mass_full(fine, coarse),
                                  ws.coarse_dofs.free_nodes, ws.fine_dofs.free_nodes);
  ws.seg_len.resize(fine.num_segments());
  ws.seg_a.resize(fine.num_segments());
  for (int e = 0; e < fine.num_segments(); ++e) {
    ws.seg_len[e] = fine.segment_length(e);
    const double left = fine.segment_left(e);
    ws.seg_a[e] = integrate_coefficient(c, left, left + ws.seg_len[e]);
  }
  return ws;
}

/// Element load ws-form_T(lambda, .) for the hat at the left or right node of
/// coarse element t, as (fine node, value) pairs local to t.
std::vector<std::pair<int, double>> element_hat_load(
    const BoundaryMesh& fine, const CorrectorWorkspace& ws, int t, bool right) {
  const int r = ws.r;
  const int nf = fine.num_nodes();
  const bool loop = fine.topology == BoundaryMesh::Topology::loop;
  std::vector<double> rhs(r + 1, 0.0);
  for (int j = 0; j < r; ++j) {
    const int e = t * r + j;
    const double len = ws.seg_len[e];
    const double d = ws.seg_a[e] / (len * len);
    const double m0 = ws.alpha * len / 3.0;
    const double m1 = ws.alpha * len / 6.0;
    // Hat values at the segment endpoints.
    double v0 = static_cast<double>(j) / r;
    double v1 = static_cast<double>(j + 1) / r;
    if (!right) {
      v0 = 1.0 - v0;
      v1 = 1.0 - v1;
    }
    rhs[j] += (d + m0) * v0 + (-d + m1) * v1;
    rhs[j + 1] += (-d + m1) * v0 + (d + m0) * v1;
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(r + 1);
  for (int j = 0; j <= r; ++j) {
    int node = t * r + j;
    if (loop) node %= nf;
    out.emplace_back(node, rhs[static_cast<std::size_t>(j)]);
  }
  return out;
}

/// Fine free dofs whose hat support lies entirely inside the patch.
std::vector<int> patch_fine_dofs(const BoundaryMesh& fine,
                                 const CorrectorWorkspace& ws,
                                 const std::vector<int>& patch,
                                 InterpolationKind kind) {
  const int r = ws.r;
  const int nfs = fine.num_segments();
  const bool loop = fine.topology == BoundaryMesh::Topology::loop;
  std::vector<char> in_patch(nfs, 0);
  for (int q : patch)
    for (int j = 0; j < r; ++j) in_patch[q * r + j] = 1;

  std::vector<int> dofs;
  for (int k = 0; k < ws.fine_dofs.count(); ++k) {
    const int node = ws.fine_dofs.free_nodes[k];
    if (kind == InterpolationKind::nodal && node % r == 0) continue;
    const int seg_right = node;
    const int seg_left = node - 1;
    bool inside = true;
    if (loop) {
      inside = in_patch[seg_right % nfs] && in_patch[(seg_left + nfs) % nfs];
    } else {
      if (seg_right < nfs && !in_patch[seg_right]) inside = false;
      if (seg_left >= 0 && !in_patch[seg_left]) inside = false;
    }
    if (inside) dofs.push_back(k);
  }
  return dofs;
}

struct PatchSolution {
  // One column per adjacent coarse free dof.
  std::vector<int> coarse_cols;
  std::vector<Eigen::VectorXd> values;  // on patch dofs
  std::vector<int> dofs;                // fine free indices
};

PatchSolution solve_patch(const BoundaryMesh& fine, const BoundaryMesh& coarse,
                          const CorrectorWorkspace& ws, int t, int m,
                          InterpolationKind kind) {
  PatchSolution sol;
  const std::vector<int> patch =
      kind == InterpolationKind::nodal ? std::vector<int>{t}
                                       : element_patch(coarse, t, m);
  sol.dofs = patch_fine_dofs(fine, ws, patch, kind);
  const int nd = static_cast<int>(sol.dofs.size());
  if (nd == 0) return sol;

  std::vector<int> local_of(ws.fine_dofs.count(), -1);
  for (int i = 0; i < nd; ++i) local_of[sol.dofs[i]] = i;

  // Moment constraints restricted to the patch (Clement only).
  std::vector<int> crows;
  if (kind == InterpolationKind::clement) {
    std::vector<char> seen(ws.coarse_dofs.count(), 0);
    for (int i = 0; i < nd; ++i)
      for (SpMat::InnerIterator it(ws.cross_free, sol.dofs[i]); it; ++it)
        if (!seen[it.row()]) {
          seen[it.row()] = 1;
          crows.push_back(static_cast<int>(it.row()));
        }
    std::sort(crows.begin(), crows.end());
  }
  const int nc = static_cast<int>(crows.size());

  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(nd + nc, nd + nc);
  for (int i = 0; i < nd; ++i)
    for (SpMat::InnerIterator it(ws.form_free, sol.dofs[i]); it; ++it) {
      const int row = local_of[it.row()];
      if (row >= 0) sys(row, i) = it.value();
    }
  std::vector<int> crow_local(ws.coarse_dofs.count(), -1);
  for (int q = 0; q < nc; ++q) crow_local[crows[q]] = q;
  for (int i = 0; i < nd; ++i)
    for (SpMat::InnerIterator it(ws.cross_free, sol.dofs[i]); it; ++it) {
      const int q = crow_local[it.row()];
      if (q >= 0) {
        sys(nd + q, i) = it.value();
        sys(i, nd + q) = it.value();
      }
    }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);

  const int zl = coarse.segments(t, 0);
  const int zr = coarse.segments(t, 1);
  for (int side = 0; side < 2; ++side) {
    const int zn = side == 0 ? zl : zr;
    const int zdof = ws.coarse_dofs.index[zn];
    if (zdof < 0) continue;  // Dirichlet coarse node carries no basis function
    const auto load = element_hat_load(fine, ws, t, side == 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd + nc);
    for (const auto& [node, value] : load) {
      const int fdof = ws.fine_dofs.index[node];
      if (fdof < 0) continue;
      const int loc = local_of[fdof];
      if (loc >= 0) rhs[loc] = value;
    }
    Eigen::VectorXd x = lu.solve(rhs);
    const double res = (sys * x - rhs).norm();
    const double scale = std::max(1.0, rhs.norm());
    if (!(res <= 1e-8 * scale)) {
      x = Eigen::FullPivLU<Eigen::MatrixXd>(sys).solve(rhs);
      if (!((sys * x - rhs).norm() <= 1e-6 * scale))
        throw std::runtime_error("compute_correctors: singular patch system");
    }
    sol.coarse_cols.push_back(zdof);
    sol.values.emplace_back(x.head(nd));
  }
  return sol;
}

}  // namespace

Vec L2Projection::apply(const Vec& fine_values) const {
  return solver->solve(cross * fine_values);
}

InterpolationOperator build_interpolation(const BoundaryMesh& fine,
                                          const BoundaryMesh& coarse,
                                          InterpolationKind kind) {
  const int r = refinement_ratio(coarse, fine);
  const DofMap fine_dofs = build_boundary_dofs(fine);
  const DofMap coarse_dofs = build_boundary_dofs(coarse);

  InterpolationOperator op;
  op.kind = kind;
  if (kind == InterpolationKind::nodal) {
    std::vector<Triplet> trips;
    trips.reserve(coarse_dofs.count());
    for (int zi = 0; zi < coarse_dofs.count(); ++zi) {
      const int fn = coarse_dofs.free_nodes[zi] * r;
      const int fdof = fine_dofs.index[fn];
      if (fdof < 0)
        throw std::logic_error("build_interpolation: free coarse node maps to "
                               "a constrained fine node");
      trips.emplace_back(zi, fdof, 1.0);
    }
    op.matrix.resize(coarse_dofs.count(), fine_dofs.count());
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    return op;
  }

  const SpMat cross = cross_mass_full(fine, coarse);
  Vec weights = cross * Vec::Ones(cross.cols());
  SpMat scaled = cross;
  for (int k = 0; k < scaled.outerSize(); ++k)
    for (SpMat::InnerIterator it(scaled, k); it; ++it)
      it.valueRef() /= weights[it.row()];
  op.matrix = restrict_matrix(scaled, coarse_dofs.free_nodes, fine_dofs.free_nodes);
  return op;
}

L2Projection build_l2_projection(const BoundaryMesh& fine,
                                 const BoundaryMesh& coarse) {
  refinement_ratio(coarse, fine);
  const DofMap fine_dofs = build_boundary_dofs(fine);
  const DofMap coarse_dofs = build_boundary_dofs(coarse);
  L2Projection proj;
  proj.cross = restrict_matrix(cross_mass_full(fine, coarse),
                               coarse_dofs.free_nodes, fine_dofs.free_nodes);
  proj.coarse_mass =
      assemble_boundary_matrices(coarse, make_constant_coefficient(1.0)).mass;
  proj.solver = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(proj.coarse_mass);
  if (proj.solver->info() != Eigen::Success)
    throw std::runtime_error("build_l2_projection: coarse mass factorization failed");
  return proj;
}

CorrectorBasis compute_correctors(const BoundaryMesh& fine,
                                  const BoundaryMesh& coarse,
                                  const Coefficient& c, int m,
                                  CorrectorForm form, InterpolationKind kind) {
  if (m < 0) throw std::invalid_argument("compute_correctors: m < 0");
  const CorrectorWorkspace ws = make_workspace(fine, coarse, c, form);
  if (kind == InterpolationKind::clement && ws.r < 4)
    throw std::invalid_argument(
        "compute_correctors: Clement correctors need refinement ratio >= 4");

  CorrectorBasis cb;
  cb.kind = kind;
  cb.form = form;
  cb.m = m;

  const int ne = coarse.num_segments();
  std::vector<PatchSolution> per_element(ne);
  parallel_for(ne, [&](int t) {
    per_element[t] = solve_patch(fine, coarse, ws, t, m, kind);
  });

  std::vector<Triplet> trips;
  cb.support.assign(ws.coarse_dofs.count(), {});
  for (int t = 0; t < ne; ++t) {
    const PatchSolution& sol = per_element[t];
    for (std::size_t col = 0; col < sol.coarse_cols.size(); ++col) {
      const int z = sol.coarse_cols[col];
      for (std::size_t i = 0; i < sol.dofs.size(); ++i) {
        const double v = sol.values[col][static_cast<Eigen::Index>(i)];
        if (v != 0.0) trips.emplace_back(sol.dofs[i], z, v);
      }
      const std::vector<int> patch = kind == InterpolationKind::nodal
                                         ? std::vector<int>{t}
                                         : element_patch(coarse, t, m);
      auto& sup = cb.support[static_cast<std::size_t>(z)];
      sup.insert(sup.end(), patch.begin(), patch.end());
    }
  }
  for (auto& sup : cb.support) {
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
  }
  cb.correctors.resize(ws.fine_dofs.count(), ws.coarse_dofs.count());
  cb.correctors.setFromTriplets(trips.begin(), trips.end());
  cb.correctors.makeCompressed();
  return cb;
}

SpMat lod_basis_matrix(const BoundaryMesh& fine, const BoundaryMesh& coarse,
                       const CorrectorBasis& cb) {
  const DofMap fine_dofs = build_boundary_dofs(fine);
  const DofMap coarse_dofs = build_boundary_dofs(coarse);
  const SpMat p = restrict_matrix(prolong_boundary(coarse, fine),
                                  fine_dofs.free_nodes, coarse_dofs.free_nodes);
  SpMat basis = p - cb.correctors;
  basis.prune(0.0);
  basis.makeCompressed();
  return basis;
}

LodMatrices lod_boundary_matrices(const SpMat& prolong_free, const SpMat& basis,
                                  const BoundaryMatrices& fine_free) {
  LodMatrices out;
  const SpMat pt = prolong_free.transpose();
  out.mass = pt * fine_free.mass * basis;
  out.stiffness = pt * fine_free.stiffness * basis;
  out.mass.makeCompressed();
  out.stiffness.makeCompressed();
  return out;
}

std::vector<DecayRow> corrector_decay_profile(const BoundaryMesh& fine,
                                              const BoundaryMesh& coarse,
                                              const Coefficient& c,
                                              CorrectorForm form, int max_m) {
  const CorrectorWorkspace ws = make_workspace(fine, coarse, c, form);
  const int nd = ws.fine_dofs.count();
  const int nc = ws.coarse_dofs.count();

  // Global correctors: one sparse saddle solve per coarse hat, with the full
  // moment constraints. form(G q, w) = form(q, w) tested with all w in W.
  std::vector<Triplet> trips;
  for (int k = 0; k < ws.form_free.outerSize(); ++k)
    for (SpMat::InnerIterator it(ws.form_free, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
  for (int k = 0; k < ws.cross_free.outerSize(); ++k)
    for (SpMat::InnerIterator it(ws.cross_free, k); it; ++it) {
      trips.emplace_back(nd + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()),
                         nd + static_cast<int>(it.row()), it.value());
    }
  SpMat saddle(nd + nc, nd + nc);
  saddle.setFromTriplets(trips.begin(), trips.end());
  saddle.makeCompressed();
  Eigen::SparseLU<SpMat> lu(saddle);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("corrector_decay_profile: global saddle is singular");

  const DofMap fine_dofs = ws.fine_dofs;
  const DofMap coarse_dofs = ws.coarse_dofs;
  const SpMat p_free = restrict_matrix(prolong_boundary(coarse, fine),
                                       fine_dofs.free_nodes, coarse_dofs.free_nodes);
  // Errors are reported in the coefficient-free H1 norm on the boundary.
  const BoundaryMatrices unit =
      assemble_boundary_matrices_full(fine, make_constant_coefficient(1.0));
  const SpMat h1_free = restrict_matrix(SpMat(unit.stiffness + unit.mass),
                                        fine_dofs.free_nodes, fine_dofs.free_nodes);
  Eigen::MatrixXd global(nd, nc);
  Vec hat_norm(nc);
  for (int z = 0; z < nc; ++z) {
    const Vec hat = p_free.col(z);
    Vec rhs = Vec::Zero(nd + nc);
    rhs.head(nd) = ws.form_free * hat;
    const Vec x = lu.solve(rhs);
    global.col(z) = x.head(nd);
    hat_norm[z] = std::sqrt(hat.dot(h1_free * hat));
  }

  std::vector<DecayRow> profile;
  profile.reserve(static_cast<std::size_t>(max_m) + 1);
  for (int m = 0; m <= max_m; ++m) {
    const CorrectorBasis cb =
        compute_correctors(fine, coarse, c, m, form, InterpolationKind::clement);
    double worst = 0.0;
    for (int z = 0; z < nc; ++z) {
      const Vec local = cb.correctors.col(z);
      const Vec diff = global.col(z) - local;
      const double err = std::sqrt(diff.dot(h1_free * diff)) / hat_norm[z];
      worst = std::max(worst, err);
    }
    profile.push_back({m, worst});
  }
  return profile;
}

}  // namespace lodbs
