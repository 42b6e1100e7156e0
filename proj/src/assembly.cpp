#include "lodbs/assembly.hpp"

#include <array>
#include <stdexcept>

#include "lodbs/gauss.hpp"

namespace lodbs {

namespace {

using Triplet = Eigen::Triplet<double>;

SpMat from_triplets(int rows, int cols, std::vector<Triplet>& trips) {
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

// Q1 element matrices on an axis-aligned square of side h, corners
// counterclockwise from the lower left.
Eigen::Matrix4d element_mass(double h) {
  Eigen::Matrix4d m;
  m << 4, 2, 1, 2, 2, 4, 2, 1, 1, 2, 4, 2, 2, 1, 2, 4;
  return m * (h * h / 36.0);
}

Eigen::Matrix4d element_stiffness(double kappa) {
  Eigen::Matrix4d k;
  k << 4, -1, -2, -1, -1, 4, -1, -2, -2, -1, 4, -1, -1, -2, -1, 4;
  return k * (kappa / 6.0);
}

}  // namespace

DofMap build_bulk_dofs(const BulkMesh& mesh) {
  DofMap map;
  map.index.assign(mesh.num_nodes(), -1);
  for (int k = 0; k < mesh.num_nodes(); ++k)
    if (!mesh.dirichlet[k]) {
      map.index[k] = static_cast<int>(map.free_nodes.size());
      map.free_nodes.push_back(k);
    }
  return map;
}

DofMap build_boundary_dofs(const BoundaryMesh& mesh) {
  DofMap map;
  const int nn = mesh.num_nodes();
  map.index.assign(nn, -1);
  const bool interval = mesh.topology == BoundaryMesh::Topology::interval;
  for (int k = 0; k < nn; ++k) {
    if (interval && ((k == 0 && mesh.endpoint_dirichlet[0]) ||
                     (k == nn - 1 && mesh.endpoint_dirichlet[1])))
      continue;
    map.index[k] = static_cast<int>(map.free_nodes.size());
    map.free_nodes.push_back(k);
  }
  return map;
}

SpMat restrict_matrix(const SpMat& a, const std::vector<int>& rows,
                      const std::vector<int>& cols) {
  std::vector<int> row_of(a.rows(), -1), col_of(a.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_of[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_of[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> trips;
  trips.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      const int i = row_of[it.row()];
      const int j = col_of[it.col()];
      if (i >= 0 && j >= 0) trips.emplace_back(i, j, it.value());
    }
  return from_triplets(static_cast<int>(rows.size()), static_cast<int>(cols.size()),
                       trips);
}

Vec restrict_vector(const Vec& v, const std::vector<int>& nodes) {
  Vec r(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) r[i] = v[nodes[i]];
  return r;
}

Vec extend_vector(const Vec& v, const std::vector<int>& nodes, int full_size) {
  Vec r = Vec::Zero(full_size);
  for (std::size_t i = 0; i < nodes.size(); ++i) r[nodes[i]] = v[i];
  return r;
}

BulkMatrices assemble_bulk_matrices_full(const BulkMesh& mesh, double kappa) {
  const Eigen::Matrix4d me = element_mass(mesh.h);
  const Eigen::Matrix4d ke = element_stiffness(kappa);
  std::vector<Triplet> mt, kt;
  mt.reserve(16 * mesh.num_cells());
  kt.reserve(16 * mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        mt.emplace_back(mesh.cells(c, i), mesh.cells(c, j), me(i, j));
        kt.emplace_back(mesh.cells(c, i), mesh.cells(c, j), ke(i, j));
      }
  BulkMatrices out;
  out.mass = from_triplets(mesh.num_nodes(), mesh.num_nodes(), mt);
  out.stiffness = from_triplets(mesh.num_nodes(), mesh.num_nodes(), kt);
  return out;
}

BulkMatrices assemble_bulk_matrices(const BulkMesh& mesh, double kappa) {
  BulkMatrices full = assemble_bulk_matrices_full(mesh, kappa);
  const DofMap dofs = build_bulk_dofs(mesh);
  if (dofs.count() == mesh.num_nodes()) return full;
  BulkMatrices out;
  out.mass = restrict_matrix(full.mass, dofs.free_nodes, dofs.free_nodes);
  out.stiffness = restrict_matrix(full.stiffness, dofs.free_nodes, dofs.free_nodes);
  return out;
}

BoundaryMatrices assemble_boundary_matrices_full(const BoundaryMesh& mesh,
                                                 const Coefficient& c,
                                                 bool with_alpha_shift) {
  std::vector<Triplet> mt, at;
  mt.reserve(4 * mesh.num_segments());
  at.reserve(4 * mesh.num_segments());
  const double alpha = with_alpha_shift ? c.lower : 0.0;
  for (int t = 0; t < mesh.num_segments(); ++t) {
    const int n0 = mesh.segments(t, 0);
    const int n1 = mesh.segments(t, 1);
    const double len = mesh.segment_length(t);
    const double left = mesh.segment_left(t);
    const double a_int = integrate_coefficient(c, left, left + len);
    const double d = a_int / (len * len);
    const double m_diag = len / 3.0;
    const double m_off = len / 6.0;
    mt.emplace_back(n0, n0, m_diag);
    mt.emplace_back(n1, n1, m_diag);
    mt.emplace_back(n0, n1, m_off);
    mt.emplace_back(n1, n0, m_off);
    at.emplace_back(n0, n0, d + alpha * m_diag);
    at.emplace_back(n1, n1, d + alpha * m_diag);
    at.emplace_back(n0, n1, -d + alpha * m_off);
    at.emplace_back(n1, n0, -d + alpha * m_off);
  }
  BoundaryMatrices out;
  out.mass = from_triplets(mesh.num_nodes(), mesh.num_nodes(), mt);
  out.stiffness = from_triplets(mesh.num_nodes(), mesh.num_nodes(), at);
  return out;
}

BoundaryMatrices assemble_boundary_matrices(const BoundaryMesh& mesh,
                                            const Coefficient& c,
                                            bool with_alpha_shift) {
  BoundaryMatrices full = assemble_boundary_matrices_full(mesh, c, with_alpha_shift);
  const DofMap dofs = build_boundary_dofs(mesh);
  if (dofs.count() == mesh.num_nodes()) return full;
  BoundaryMatrices out;
  out.mass = restrict_matrix(full.mass, dofs.free_nodes, dofs.free_nodes);
  out.stiffness = restrict_matrix(full.stiffness, dofs.free_nodes, dofs.free_nodes);
  return out;
}

ConstraintBlocks assemble_constraint(const BulkMesh& mesh,
                                     const BoundaryMesh& mu_mesh,
                                     const BoundaryMesh& p_mesh) {
  if (mu_mesh.bulk_nodes.empty())
    throw std::invalid_argument(
        "assemble_constraint: multiplier mesh must be a bulk trace mesh");
  const Coefficient unit = make_constant_coefficient(1.0);
  const DofMap bulk_dofs = build_bulk_dofs(mesh);
  const DofMap mu_dofs = build_boundary_dofs(mu_mesh);
  const DofMap p_dofs = build_boundary_dofs(p_mesh);

  // u block: -(v|_Gamma, mu) through the trace map of the multiplier mesh.
  const SpMat m_mu = assemble_boundary_matrices_full(mu_mesh, unit).mass;
  std::vector<Triplet> ut;
  for (int k = 0; k < m_mu.outerSize(); ++k)
    for (SpMat::InnerIterator it(m_mu, k); it; ++it) {
      const int row = mu_dofs.index[it.row()];
      const int col = bulk_dofs.index[mu_mesh.bulk_nodes[it.col()]];
      if (row >= 0 && col >= 0) ut.emplace_back(row, col, -it.value());
    }

  ConstraintBlocks out;
  out.u = from_triplets(mu_dofs.count(), bulk_dofs.count(), ut);

  if (&p_mesh == &mu_mesh || (p_mesh.num_nodes() == mu_mesh.num_nodes() &&
                              p_mesh.s.isApprox(mu_mesh.s))) {
    out.p = restrict_matrix(m_mu, mu_dofs.free_nodes, mu_dofs.free_nodes);
    return out;
  }
  if (!is_dyadic_refinement(mu_mesh, p_mesh))
    throw std::invalid_argument(
        "assemble_constraint: p mesh must refine the multiplier mesh");
  const SpMat prolong = prolong_boundary(mu_mesh, p_mesh);
  const SpMat m_p = assemble_boundary_matrices_full(p_mesh, unit).mass;
  const SpMat cross = SpMat(prolong.transpose()) * m_p;
  out.p = restrict_matrix(cross, mu_dofs.free_nodes, p_dofs.free_nodes);
  return out;
}

Vec assemble_bulk_load(const BulkMesh& mesh, const BulkSource& f, double t) {
  Vec b = Vec::Zero(mesh.num_nodes());
  const double h = mesh.h;
  // 2x2 tensor Gauss on each cell; shape values at the quadrature points.
  std::array<std::array<double, 4>, 4> shape{};
  std::array<std::array<double, 2>, 4> qp{};
  int q = 0;
  for (int qy = 0; qy < 2; ++qy)
    for (int qx = 0; qx < 2; ++qx) {
      const double x = 0.5 * (1.0 + gauss::kX2[qx]);
      const double y = 0.5 * (1.0 + gauss::kX2[qy]);
      qp[q] = {x, y};
      shape[q] = {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
      ++q;
    }
  const double w = h * h / 4.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double x0 = mesh.nodes(mesh.cells(c, 0), 0);
    const double y0 = mesh.nodes(mesh.cells(c, 0), 1);
    for (int k = 0; k < 4; ++k) {
      const double fv = f(t, x0 + h * qp[k][0], y0 + h * qp[k][1]);
      for (int i = 0; i < 4; ++i) b[mesh.cells(c, i)] += w * fv * shape[k][i];
    }
  }
  return b;
}

Vec assemble_boundary_load(const BoundaryMesh& mesh, const SurfaceSource& g,
                           double t) {
  Vec b = Vec::Zero(mesh.num_nodes());
  for (int e = 0; e < mesh.num_segments(); ++e) {
    const double left = mesh.segment_left(e);
    const double len = mesh.segment_length(e);
    for (int q = 0; q < 3; ++q) {
      const double theta = 0.5 * (1.0 + gauss::kX3[q]);
      const double gv = g(t, left + theta * len);
      const double w = 0.5 * len * gauss::kW3[q];
      b[mesh.segments(e, 0)] += w * gv * (1.0 - theta);
      b[mesh.segments(e, 1)] += w * gv * theta;
    }
  }
  return b;
}

SpMat prolong_boundary(const BoundaryMesh& coarse, const BoundaryMesh& fine) {
  if (!is_dyadic_refinement(coarse, fine))
    throw std::invalid_argument("prolong_boundary: meshes are not nested");
  const int r = fine.num_segments() / coarse.num_segments();
  std::vector<Triplet> trips;
  trips.reserve(fine.num_nodes() * 2);
  for (int tc = 0; tc < coarse.num_segments(); ++tc) {
    const int n0 = coarse.segments(tc, 0);
    const int n1 = coarse.segments(tc, 1);
    for (int j = 0; j < r; ++j) {
      const int fk = tc * r + j;
      const double theta = static_cast<double>(j) / r;
      if (theta == 0.0) {
        trips.emplace_back(fk, n0, 1.0);
      } else {
        trips.emplace_back(fk, n0, 1.0 - theta);
        trips.emplace_back(fk, n1, theta);
      }
    }
  }
  if (fine.topology == BoundaryMesh::Topology::interval)
    trips.emplace_back(fine.num_nodes() - 1, coarse.num_nodes() - 1, 1.0);
  return from_triplets(fine.num_nodes(), coarse.num_nodes(), trips);
}

SpMat prolong_bulk(const BulkMesh& coarse, const BulkMesh& fine) {
  if (fine.n % coarse.n != 0)
    throw std::invalid_argument("prolong_bulk: resolutions do not divide");
  const int r = fine.n / coarse.n;
  std::vector<Triplet> trips;
  trips.reserve(fine.num_nodes() * 4);
  for (int iy = 0; iy <= fine.n; ++iy)
    for (int ix = 0; ix <= fine.n; ++ix) {
      int cx = ix / r, lx = ix % r;
      int cy = iy / r, ly = iy % r;
      if (cx == coarse.n) { cx -= 1; lx = r; }
      if (cy == coarse.n) { cy -= 1; ly = r; }
      const double fx = static_cast<double>(lx) / r;
      const double fy = static_cast<double>(ly) / r;
      const int row = fine.node_index(ix, iy);
      const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), fx * fy,
                           (1 - fx) * fy};
      const int col[4] = {coarse.node_index(cx, cy), coarse.node_index(cx + 1, cy),
                          coarse.node_index(cx + 1, cy + 1),
                          coarse.node_index(cx, cy + 1)};
      for (int i = 0; i < 4; ++i)
        if (w[i] != 0.0) trips.emplace_back(row, col[i], w[i]);
    }
  return from_triplets(fine.num_nodes(), coarse.num_nodes(), trips);
}

}  // namespace lodbs
