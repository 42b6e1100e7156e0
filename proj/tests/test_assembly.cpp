#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "lodbs/assembly.hpp"
#include "lodbs/coefficient.hpp"
#include "lodbs/mesh.hpp"

using namespace lodbs;

namespace {

Eigen::MatrixXd dense(const SpMat& a) { return Eigen::MatrixXd(a); }

// Q1 element matrices on a square cell of size h, corners counterclockwise.
Eigen::Matrix4d q1_element_mass(double h) {
  Eigen::Matrix4d m;
  m << 4, 2, 1, 2, 2, 4, 2, 1, 1, 2, 4, 2, 2, 1, 2, 4;
  return m * (h * h / 36.0);
}

Eigen::Matrix4d q1_element_stiffness(double kappa) {
  Eigen::Matrix4d k;
  k << 4, -1, -2, -1, -1, 4, -1, -2, -2, -1, 4, -1, -1, -2, -1, 4;
  return k * (kappa / 6.0);
}

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("bulk matrices reproduce the Q1 element integrals") {
  const double kappa = 0.37;
  const BulkMesh one = build_bulk_mesh(1);
  const BulkMatrices full = assemble_bulk_matrices_full(one, kappa);
  const Eigen::Matrix4d me = q1_element_mass(one.h);
  const Eigen::Matrix4d ke = q1_element_stiffness(kappa);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const int a = one.cells(0, i), b = one.cells(0, j);
      CHECK(full.mass.coeff(a, b) == doctest::Approx(me(i, j)).epsilon(1e-14));
      CHECK(full.stiffness.coeff(a, b) == doctest::Approx(ke(i, j)).epsilon(1e-14));
    }

  const BulkMesh mesh = build_bulk_mesh(8);
  const BulkMatrices m = assemble_bulk_matrices_full(mesh, kappa);
  const Vec ones = Vec::Ones(mesh.num_nodes());
  // Total mass is the domain area; constants are in the stiffness kernel.
  CHECK(ones.dot(m.mass * ones) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK((m.stiffness * ones).lpNorm<Eigen::Infinity>() < 1e-13);
  CHECK(dense(m.mass).isApprox(dense(m.mass).transpose(), 1e-14));
  CHECK(dense(m.stiffness).isApprox(dense(m.stiffness).transpose(), 1e-14));

  // Free restriction drops the Dirichlet rows and columns.
  const BulkMesh mixed = build_bulk_mesh(8, DynamicBoundary::bottom);
  const DofMap dofs = build_bulk_dofs(mixed);
  const BulkMatrices red = assemble_bulk_matrices(mixed, kappa);
  CHECK(red.mass.rows() == dofs.count());
  const BulkMatrices mixed_full = assemble_bulk_matrices_full(mixed, kappa);
  CHECK((dense(red.mass) -
         dense(restrict_matrix(mixed_full.mass, dofs.free_nodes, dofs.free_nodes)))
            .norm() == 0.0);
}

TEST_CASE("boundary matrices: P1 stencils, total mass, alpha shift") {
  const BulkMesh bulk = build_bulk_mesh(8);
  const BoundaryMesh gamma = restrict_to_boundary(bulk, DynamicBoundary::full);
  const double len = 1.0 / 8.0;
  const Coefficient unit = make_constant_coefficient(1.0);
  const BoundaryMatrices bm = assemble_boundary_matrices_full(gamma, unit);

  const int n = gamma.num_nodes();
  for (int i = 0; i < n; ++i) {
    CHECK(bm.mass.coeff(i, i) == doctest::Approx(2.0 * len / 3.0).epsilon(1e-14));
    CHECK(bm.mass.coeff(i, (i + 1) % n) == doctest::Approx(len / 6.0).epsilon(1e-14));
    CHECK(bm.stiffness.coeff(i, i) == doctest::Approx(2.0 / len).epsilon(1e-13));
    CHECK(bm.stiffness.coeff(i, (i + 1) % n) ==
          doctest::Approx(-1.0 / len).epsilon(1e-13));
  }
  const Vec ones = Vec::Ones(n);
  CHECK(ones.dot(bm.mass * ones) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK((bm.stiffness * ones).lpNorm<Eigen::Infinity>() < 1e-12);

  // Shifted form is exactly stiffness + lower * mass.
  const Coefficient c = make_smooth_coefficient(1.0 / 32.0);
  const BoundaryMatrices plain = assemble_boundary_matrices_full(gamma, c);
  const BoundaryMatrices shifted = assemble_boundary_matrices_full(gamma, c, true);
  const Eigen::MatrixXd diff =
      dense(shifted.stiffness) - dense(plain.stiffness) - c.lower * dense(plain.mass);
  CHECK(diff.lpNorm<Eigen::Infinity>() < 1e-14 * dense(shifted.stiffness).norm());
  CHECK((dense(shifted.mass) - dense(plain.mass)).norm() == 0.0);
}

TEST_CASE("constraint rows annihilate matched traces and have full rank") {
  for (const DynamicBoundary dyn : {DynamicBoundary::full, DynamicBoundary::bottom}) {
    const BulkMesh bulk = build_bulk_mesh(8, dyn);
    const BoundaryMesh gamma = restrict_to_boundary(bulk, dyn);
    const DofMap bulk_dofs = build_bulk_dofs(bulk);
    const DofMap p_dofs = build_boundary_dofs(gamma);

    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vec u(bulk_dofs.count());
    for (int k = 0; k < u.size(); ++k) u[k] = dist(rng);

    // Trace of u on the free boundary nodes.
    Vec tr(p_dofs.count());
    for (int k = 0; k < p_dofs.count(); ++k) {
      const int node = gamma.bulk_nodes[static_cast<std::size_t>(p_dofs.free_nodes[k])];
      tr[k] = bulk_dofs.index[node] >= 0 ? u[bulk_dofs.index[node]] : 0.0;
    }

    SUBCASE("p on the trace mesh") {
      const ConstraintBlocks b = assemble_constraint(bulk, gamma, gamma);
      CHECK(b.u.rows() == b.p.rows());
      const Vec res = b.u * u + b.p * tr;
      CHECK(res.lpNorm<Eigen::Infinity>() < 1e-13);

      Eigen::MatrixXd stacked(b.u.rows(), b.u.cols() + b.p.cols());
      stacked << dense(b.u), dense(b.p);
      CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(stacked).rank() == b.u.rows());
    }

    SUBCASE("p on a refined boundary mesh") {
      const BoundaryMesh fine = refine_boundary(gamma, 2);
      const DofMap fine_dofs = build_boundary_dofs(fine);
      const ConstraintBlocks b = assemble_constraint(bulk, gamma, fine);
      CHECK(b.p.cols() == fine_dofs.count());

      const SpMat prol = restrict_matrix(prolong_boundary(gamma, fine),
                                         fine_dofs.free_nodes, p_dofs.free_nodes);
      const Vec res = b.u * u + b.p * (prol * tr);
      CHECK(res.lpNorm<Eigen::Infinity>() < 1e-13);

      Eigen::MatrixXd stacked(b.u.rows(), b.u.cols() + b.p.cols());
      stacked << dense(b.u), dense(b.p);
      CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(stacked).rank() == b.u.rows());
    }
  }
}

TEST_CASE("load vectors agree with mass matrices for unit data") {
  const BulkMesh bulk = build_bulk_mesh(8, DynamicBoundary::bottom);
  const BulkMatrices bm = assemble_bulk_matrices_full(bulk, 1.0);
  const Vec load = assemble_bulk_load(bulk, [](double, double, double) { return 1.0; },
                                      0.0);
  const Vec expect = bm.mass * Vec::Ones(bulk.num_nodes());
  CHECK((load - expect).lpNorm<Eigen::Infinity>() < 1e-14);

  const BoundaryMesh gamma = restrict_to_boundary(bulk, DynamicBoundary::bottom);
  const BoundaryMatrices gm =
      assemble_boundary_matrices_full(gamma, make_constant_coefficient(1.0));
  const Vec gload =
      assemble_boundary_load(gamma, [](double, double) { return 1.0; }, 0.0);
  CHECK((gload - gm.mass * Vec::Ones(gamma.num_nodes())).lpNorm<Eigen::Infinity>() <
        1e-14);

  // Time and space dependence reach the quadrature points.
  const Vec lt = assemble_bulk_load(bulk, [](double t, double x, double) { return t * x; },
                                    2.0);
  Vec xs(bulk.num_nodes());
  for (int k = 0; k < bulk.num_nodes(); ++k) xs[k] = bulk.nodes(k, 0);
  CHECK((lt - 2.0 * (bm.mass * xs)).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("prolongation interpolates exactly") {
  const BulkMesh bulk = build_bulk_mesh(4);
  const BoundaryMesh coarse = restrict_to_boundary(bulk, DynamicBoundary::full);
  const BoundaryMesh fine = refine_boundary(coarse, 3);
  const SpMat p = prolong_boundary(coarse, fine);
  REQUIRE(p.rows() == fine.num_nodes());
  REQUIRE(p.cols() == coarse.num_nodes());

  // Piecewise-linear evaluator over the coarse nodes, built independently.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Vec vc(coarse.num_nodes());
  for (int k = 0; k < vc.size(); ++k) vc[k] = dist(rng);
  const auto eval_coarse = [&](double s) {
    const int nc = coarse.num_segments();
    for (int t = 0; t < nc; ++t) {
      const double s0 = coarse.segment_left(t);
      const double s1 = s0 + coarse.segment_length(t);
      if (s < s0 - 1e-12 || s > s1 + 1e-12) continue;
      const double w = (s - s0) / (s1 - s0);
      return (1.0 - w) * vc[coarse.segments(t, 0)] + w * vc[coarse.segments(t, 1)];
    }
    return (1.0 - 0.0) * vc[0];
  };
  const Vec vf = p * vc;
  for (int j = 0; j < fine.num_nodes(); ++j)
    CHECK(vf[j] == doctest::Approx(eval_coarse(fine.s[j])).epsilon(1e-13));
  CHECK(((p * Vec::Ones(coarse.num_nodes())) - Vec::Ones(fine.num_nodes()))
            .lpNorm<Eigen::Infinity>() < 1e-14);

  // Bulk prolongation reproduces bilinear functions nodally.
  const BulkMesh bc = build_bulk_mesh(4);
  const BulkMesh bf = build_bulk_mesh(16);
  const SpMat pb = prolong_bulk(bc, bf);
  const auto bilinear = [](double x, double y) {
    return (0.4 + 1.3 * x) * (2.0 - 0.7 * y);
  };
  Vec wc(bc.num_nodes()), wf(bf.num_nodes());
  for (int k = 0; k < bc.num_nodes(); ++k)
    wc[k] = bilinear(bc.nodes(k, 0), bc.nodes(k, 1));
  for (int k = 0; k < bf.num_nodes(); ++k)
    wf[k] = bilinear(bf.nodes(k, 0), bf.nodes(k, 1));
  CHECK((pb * wc - wf).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("nested meshes satisfy the Galerkin identity") {
  const BulkMesh bulk = build_bulk_mesh(4);
  const BoundaryMesh coarse = restrict_to_boundary(bulk, DynamicBoundary::full);
  const BoundaryMesh fine = refine_boundary(coarse, 4);
  const SpMat p = prolong_boundary(coarse, fine);

  const Coefficient c = make_smooth_coefficient(1.0 / 16.0);
  const BoundaryMatrices mc = assemble_boundary_matrices_full(coarse, c);
  const BoundaryMatrices mf = assemble_boundary_matrices_full(fine, c);
  const Eigen::MatrixXd da = dense(SpMat(p.transpose() * mf.stiffness * p)) -
                             dense(mc.stiffness);
  const Eigen::MatrixXd dm = dense(SpMat(p.transpose() * mf.mass * p)) -
                             dense(mc.mass);
  CHECK(da.lpNorm<Eigen::Infinity>() < 1e-10 * dense(mc.stiffness).norm());
  CHECK(dm.lpNorm<Eigen::Infinity>() < 1e-12);

  const BulkMesh bf = build_bulk_mesh(16);
  const SpMat pb = prolong_bulk(bulk, bf);
  const BulkMatrices kc = assemble_bulk_matrices_full(bulk, 0.1);
  const BulkMatrices kf = assemble_bulk_matrices_full(bf, 0.1);
  const Eigen::MatrixXd dk = dense(SpMat(pb.transpose() * kf.stiffness * pb)) -
                             dense(kc.stiffness);
  CHECK(dk.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("restriction and extension round-trip") {
  const BulkMesh bulk = build_bulk_mesh(6, DynamicBoundary::bottom);
  const DofMap dofs = build_bulk_dofs(bulk);
  REQUIRE(dofs.count() < bulk.num_nodes());

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec w(dofs.count());
  for (int k = 0; k < w.size(); ++k) w[k] = dist(rng);

  const Vec full = extend_vector(w, dofs.free_nodes, bulk.num_nodes());
  CHECK((restrict_vector(full, dofs.free_nodes) - w).norm() == 0.0);
  for (int node = 0; node < bulk.num_nodes(); ++node)
    if (dofs.index[node] < 0) CHECK(full[node] == 0.0);

  // restrict_matrix against a dense gather.
  SpMat a(4, 4);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) trips.emplace_back(i, j, 10.0 * i + j);
  a.setFromTriplets(trips.begin(), trips.end());
  const std::vector<int> rows{1, 3}, cols{0, 2};
  const SpMat sub = restrict_matrix(a, rows, cols);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(sub.coeff(i, j) == 10.0 * rows[static_cast<std::size_t>(i)] +
                                   cols[static_cast<std::size_t>(j)]);
}

TEST_CASE("free matrices are positive definite") {
  const BulkMesh bulk = build_bulk_mesh(8, DynamicBoundary::bottom);
  const BulkMatrices bm = assemble_bulk_matrices(bulk, 0.1);
  const BoundaryMesh gamma = restrict_to_boundary(bulk, DynamicBoundary::bottom);
  const Coefficient c = make_smooth_coefficient(1.0 / 8.0);
  const BoundaryMatrices gm = assemble_boundary_matrices(gamma, c, true);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int probe = 0; probe < 25; ++probe) {
    Vec x(bm.mass.rows());
    for (int k = 0; k < x.size(); ++k) x[k] = dist(rng);
    CHECK(x.dot(bm.mass * x) > 0.0);
    CHECK(x.dot(bm.stiffness * x) > 0.0);
    Vec y(gm.mass.rows());
    for (int k = 0; k < y.size(); ++k) y[k] = dist(rng);
    CHECK(y.dot(gm.mass * y) > 0.0);
    CHECK(y.dot(gm.stiffness * y) > 0.0);
  }
}

}  // TEST_SUITE
