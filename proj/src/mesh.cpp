#include "lodbs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lodbs {

double BoundaryMesh::segment_length(int t) const {
  const int a = segments(t, 0);
  const int b = segments(t, 1);
  if (b == 0 && topology == Topology::loop) return length - s[a];
  return s[b] - s[a];
}

Eigen::Vector2d gamma_point(double s_pos, BoundaryMesh::Topology topology) {
  if (topology == BoundaryMesh::Topology::interval) return {s_pos, 0.0};
  double t = s_pos - 4.0 * std::floor(s_pos / 4.0);
  if (t < 1.0) return {t, 0.0};
  if (t < 2.0) return {1.0, t - 1.0};
  if (t < 3.0) return {3.0 - t, 1.0};
  return {0.0, 4.0 - t};
}

BulkMesh build_bulk_mesh(int n, DynamicBoundary dynamic) {
  if (n < 1) throw std::invalid_argument("build_bulk_mesh: n must be positive");
  BulkMesh mesh;
  mesh.n = n;
  mesh.h = 1.0 / n;
  mesh.dynamic = dynamic;

  const int nn = n + 1;
  mesh.nodes.resize(nn * nn, 2);
  for (int iy = 0; iy < nn; ++iy)
    for (int ix = 0; ix < nn; ++ix) {
      const int k = mesh.node_index(ix, iy);
      mesh.nodes(k, 0) = static_cast<double>(ix) / n;
      mesh.nodes(k, 1) = static_cast<double>(iy) / n;
    }

  mesh.cells.resize(n * n, 4);
  for (int cy = 0; cy < n; ++cy)
    for (int cx = 0; cx < n; ++cx) {
      const int c = cy * n + cx;
      mesh.cells(c, 0) = mesh.node_index(cx, cy);
      mesh.cells(c, 1) = mesh.node_index(cx + 1, cy);
      mesh.cells(c, 2) = mesh.node_index(cx + 1, cy + 1);
      mesh.cells(c, 3) = mesh.node_index(cx, cy + 1);
    }

  mesh.boundary_loop.reserve(4 * n);
  mesh.boundary_cell.reserve(4 * n);
  for (int ix = 0; ix < n; ++ix) {  // bottom, left to right
    mesh.boundary_loop.push_back(mesh.node_index(ix, 0));
    mesh.boundary_cell.push_back(0 * n + ix);
  }
  for (int iy = 0; iy < n; ++iy) {  // right, bottom to top
    mesh.boundary_loop.push_back(mesh.node_index(n, iy));
    mesh.boundary_cell.push_back(iy * n + (n - 1));
  }
  for (int ix = n; ix > 0; --ix) {  // top, right to left
    mesh.boundary_loop.push_back(mesh.node_index(ix, n));
    mesh.boundary_cell.push_back((n - 1) * n + (ix - 1));
  }
  for (int iy = n; iy > 0; --iy) {  // left, top to bottom
    mesh.boundary_loop.push_back(mesh.node_index(0, iy));
    mesh.boundary_cell.push_back((iy - 1) * n + 0);
  }

  mesh.dirichlet.assign(nn * nn, 0);
  if (dynamic == DynamicBoundary::bottom) {
    for (int k : mesh.boundary_loop) {
      const double x = mesh.nodes(k, 0);
      const double y = mesh.nodes(k, 1);
      const bool on_open_bottom = (y == 0.0) && (x > 0.0) && (x < 1.0);
      if (!on_open_bottom) mesh.dirichlet[k] = 1;
    }
  }
  return mesh;
}

BoundaryMesh restrict_to_boundary(const BulkMesh& mesh, DynamicBoundary selector) {
  if (selector != mesh.dynamic)
    throw std::invalid_argument(
        "restrict_to_boundary: selector does not match the dynamic boundary "
        "the bulk mesh was built with");
  BoundaryMesh bm;
  const int n = mesh.n;
  if (selector == DynamicBoundary::full) {
    bm.topology = BoundaryMesh::Topology::loop;
    bm.length = 4.0;
    const int nb = 4 * n;
    bm.s.resize(nb);
    bm.xy.resize(nb, 2);
    bm.segments.resize(nb, 2);
    bm.bulk_nodes.resize(nb);
    for (int k = 0; k < nb; ++k) {
      // Arclength along the edge currently being walked; each edge has
      // length 1 so the offset is the edge index.
      const int edge = k / n;
      const int j = k % n;
      bm.s[k] = edge + static_cast<double>(j) / n;
      bm.bulk_nodes[k] = mesh.boundary_loop[k];
      bm.xy.row(k) = mesh.nodes.row(mesh.boundary_loop[k]);
      bm.segments(k, 0) = k;
      bm.segments(k, 1) = (k + 1) % nb;
    }
  } else {
    bm.topology = BoundaryMesh::Topology::interval;
    bm.length = 1.0;
    bm.s.resize(n + 1);
    bm.xy.resize(n + 1, 2);
    bm.segments.resize(n, 2);
    bm.bulk_nodes.resize(n + 1);
    for (int ix = 0; ix <= n; ++ix) {
      bm.s[ix] = static_cast<double>(ix) / n;
      bm.bulk_nodes[ix] = mesh.node_index(ix, 0);
      bm.xy.row(ix) = mesh.nodes.row(bm.bulk_nodes[ix]);
    }
    for (int t = 0; t < n; ++t) {
      bm.segments(t, 0) = t;
      bm.segments(t, 1) = t + 1;
    }
    bm.endpoint_dirichlet = {true, true};
  }
  return bm;
}

BoundaryMesh refine_boundary(const BoundaryMesh& mesh, int levels) {
  if (levels < 0) throw std::invalid_argument("refine_boundary: levels < 0");
  BoundaryMesh fine;
  fine.topology = mesh.topology;
  fine.length = mesh.length;
  fine.endpoint_dirichlet = mesh.endpoint_dirichlet;
  fine.parent = std::make_shared<BoundaryMesh>(mesh);
  fine.refinement_levels = levels;

  const int r = 1 << levels;
  const int nseg = mesh.num_segments();
  const bool loop = mesh.topology == BoundaryMesh::Topology::loop;
  const int nf_nodes = loop ? nseg * r : nseg * r + 1;

  fine.s.resize(nf_nodes);
  fine.xy.resize(nf_nodes, 2);
  fine.segments.resize(nseg * r, 2);
  for (int t = 0; t < nseg; ++t) {
    const double left = mesh.segment_left(t);
    const double len = mesh.segment_length(t);
    for (int j = 0; j < r; ++j) {
      const int k = t * r + j;
      fine.s[k] = (j == 0) ? left : left + len * j / r;
      fine.xy.row(k) = gamma_point(fine.s[k], fine.topology);
    }
  }
  if (!loop) {
    fine.s[nf_nodes - 1] = mesh.s[mesh.num_nodes() - 1];
    fine.xy.row(nf_nodes - 1) = gamma_point(fine.s[nf_nodes - 1], fine.topology);
  }
  // Restriction meshes keep their exact node coordinates under refinement.
  if (!mesh.bulk_nodes.empty()) {
    for (int t = 0; t < mesh.num_nodes(); ++t) fine.xy.row(t * r) = mesh.xy.row(t);
    if (!loop) fine.xy.row(nf_nodes - 1) = mesh.xy.row(mesh.num_nodes() - 1);
  }
  for (int k = 0; k < nseg * r; ++k) {
    fine.segments(k, 0) = k;
    fine.segments(k, 1) = loop ? (k + 1) % nf_nodes : k + 1;
  }
  return fine;
}

std::vector<int> element_patch(const BoundaryMesh& mesh, int t, int m) {
  const int ne = mesh.num_segments();
  if (t < 0 || t >= ne) throw std::out_of_range("element_patch: element index");
  if (m < 0) throw std::invalid_argument("element_patch: m < 0");

  std::set<int> patch{t};
  const bool loop = mesh.topology == BoundaryMesh::Topology::loop;
  for (int round = 0; round < m; ++round) {
    std::set<int> next = patch;
    for (int e : patch) {
      if (loop) {
        next.insert((e + 1) % ne);
        next.insert((e - 1 + ne) % ne);
      } else {
        if (e + 1 < ne) next.insert(e + 1);
        if (e - 1 >= 0) next.insert(e - 1);
      }
    }
    if (next.size() == patch.size()) break;
    patch.swap(next);
  }
  return {patch.begin(), patch.end()};
}

bool is_dyadic_refinement(const BoundaryMesh& coarse, const BoundaryMesh& fine) {
  if (coarse.topology != fine.topology) return false;
  if (coarse.length != fine.length) return false;
  const int nc = coarse.num_segments();
  const int nf = fine.num_segments();
  if (nf < nc || nf % nc != 0) return false;
  const int r = nf / nc;
  if ((r & (r - 1)) != 0) return false;
  for (int i = 0; i < coarse.num_nodes(); ++i)
    if (std::abs(fine.s[i * r] - coarse.s[i]) > 1e-12) return false;
  return true;
}

}  // namespace lodbs
