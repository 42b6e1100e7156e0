#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "lodbs/errors.hpp"

using namespace lodbs;

namespace {

ProblemData smooth_data() {
  ProblemData d;
  d.f = [](double, double, double) { return 1.0; };
  d.g = [](double t, double) { return t; };
  d.u0 = [](double x, double y) { return std::sin(3.14159 * x) * std::cos(2.0 * y); };
  return d;
}

ErrorRow synthetic_row(double h, double err) {
  ErrorRow row;
  row.H_Omega = h;
  row.H_Gamma = h;
  row.err_u_L2 = err;
  row.err_p_L2 = err * 0.5;
  row.err_u_H1 = std::sqrt(err);
  row.err_p_H1 = std::sqrt(err) * 0.5;
  row.err_p_full_H1 = std::sqrt(err) * 0.25;
  return row;
}

}  // namespace

TEST_SUITE("errors") {

TEST_CASE("reference resolves the coefficient scale") {
  const Coefficient c = make_smooth_coefficient(1.0 / 16.0);
  const ReferenceSolution ref = compute_reference(8, DynamicBoundary::full, c,
                                                  smooth_data(), 0.1, 0.01, 0.02);
  CHECK(ref.gamma.segment_length(0) == 0.125);
  CHECK(ref.p_mesh.segment_length(0) <= c.epsilon / 4.0 + 1e-14);
  CHECK(is_dyadic_refinement(ref.gamma, ref.p_mesh));
  REQUIRE(ref.traj.times.size() == 3);

  // Constant coefficients need no boundary refinement.
  const Coefficient k = make_constant_coefficient(1.0);
  const ReferenceSolution rk = compute_reference(8, DynamicBoundary::full, k,
                                                 smooth_data(), 0.1, 0.01, 0.02);
  CHECK(rk.p_mesh.num_segments() == rk.gamma.num_segments());
}

TEST_CASE("self comparison vanishes") {
  const Coefficient c = make_constant_coefficient(0.8);
  const ProblemData data = smooth_data();
  const ReferenceSolution ref = compute_reference(8, DynamicBoundary::full, c,
                                                  data, 0.1, 0.01, 0.05);
  const PdaeSystem sys = assemble_system(ref.bulk, ref.gamma, c, 0.1,
                                         Variant::standard_fem);
  const Trajectory traj = implicit_euler(sys, data, 0.01, 0.05);
  const ErrorRow row = error_norms(sys, traj, ref, 0);
  CHECK(row.err_u_L2 < 1e-12);
  CHECK(row.err_p_L2 < 1e-12);
  CHECK(row.err_u_H1 < 1e-11);
  CHECK(row.err_p_H1 < 1e-11);
  CHECK(row.err_p_full_H1 < 1e-11);
  CHECK(row.H_Omega == 0.125);
  CHECK(row.H_Gamma == 0.125);
}

TEST_CASE("observed orders and fits on synthetic sequences") {
  // Exactly second-order u_L2 and half-order slower companions.
  std::vector<ErrorRow> rows;
  for (int k = 2; k <= 5; ++k) {
    const double h = std::pow(2.0, -k);
    rows.push_back(synthetic_row(h, 0.64 * h * h));
  }
  const auto orders = observed_orders(rows);
  REQUIRE(orders.size() == rows.size());
  CHECK(std::isnan(orders.front().u_L2));
  for (std::size_t k = 1; k < orders.size(); ++k) {
    CHECK(orders[k].u_L2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(orders[k].p_L2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(orders[k].u_H1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(orders[k].p_H1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(orders[k].p_full_H1 == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(order_fit(rows, 0, 3) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(order_fit(rows, 2, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)order_fit(rows, 9, 3), std::invalid_argument);

  // Boundary-only refinement: H_Omega constant, H_Gamma drives the order.
  std::vector<ErrorRow> brows;
  for (int k = 2; k <= 4; ++k) {
    ErrorRow row = synthetic_row(std::pow(2.0, -k), 1.0);
    row.H_Omega = 0.125;
    row.err_p_L2 = std::pow(row.H_Gamma, 1.5);
    brows.push_back(row);
  }
  const auto borders = observed_orders(brows);
  CHECK(borders[1].p_L2 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(borders[2].p_L2 == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("stationary projection of discrete pairs") {
  const Coefficient c = make_smooth_coefficient(1.0 / 16.0);
  const BulkMesh bulk = build_bulk_mesh(8);
  const BoundaryMesh gamma = restrict_to_boundary(bulk, DynamicBoundary::full);
  const BoundaryMesh fine = refine_boundary(gamma, 3);
  const CorrectorBasis cb = compute_correctors(fine, gamma, c, 3,
                                               CorrectorForm::shifted,
                                               InterpolationKind::clement);
  const PdaeSystem sys =
      assemble_system(bulk, gamma, c, 0.1, Variant::pglod, &fine, &cb);

  const BulkMesh bulk_fine = build_bulk_mesh(32);
  const SpMat p_bulk = prolong_bulk(bulk, bulk_fine);
  const DofMap fine_dofs = build_boundary_dofs(fine);

  SUBCASE("idempotence on a constraint-compatible coarse pair") {
    Vec u_c_full(bulk.num_nodes());
    for (int k = 0; k < bulk.num_nodes(); ++k)
      u_c_full[k] = std::sin(2.0 * bulk.nodes(k, 0)) + bulk.nodes(k, 1);
    const Vec u_c = restrict_vector(u_c_full, sys.bulk_dofs.free_nodes);
    const Vec p_c = sys.trace * u_c;

    const Vec u_fine_full = p_bulk * u_c_full;
    const Vec p_fine_full =
        extend_vector(sys.basis * p_c, fine_dofs.free_nodes, fine.num_nodes());

    const RitzResult r =
        ritz_projection(u_fine_full, bulk_fine, p_fine_full, sys, c);
    CHECK((r.u - u_c).lpNorm<Eigen::Infinity>() <
          1e-9 * u_c.lpNorm<Eigen::Infinity>());
    CHECK((r.p - p_c).lpNorm<Eigen::Infinity>() <
          1e-9 * std::max(1.0, p_c.lpNorm<Eigen::Infinity>()));
    CHECK(r.lambda.lpNorm<Eigen::Infinity>() < 1e-8);
  }

  SUBCASE("orthogonality against constraint-compatible test pairs") {
    Vec u_fine_full(bulk_fine.num_nodes());
    for (int k = 0; k < bulk_fine.num_nodes(); ++k) {
      const double x = bulk_fine.nodes(k, 0), y = bulk_fine.nodes(k, 1);
      u_fine_full[k] = std::sin(3.0 * x + 0.3) * std::cos(2.0 * y) + x * y;
    }
    Vec p_fine_full(fine.num_nodes());
    for (int k = 0; k < fine.num_nodes(); ++k)
      p_fine_full[k] = std::cos(1.5 * fine.s[k]) + 0.2 * std::sin(4.0 * fine.s[k]);

    const RitzResult r =
        ritz_projection(u_fine_full, bulk_fine, p_fine_full, sys, c);

    // Projection output satisfies the constraint.
    CHECK((sys.b_u * r.u + sys.b_p * r.p).lpNorm<Eigen::Infinity>() < 1e-10);

    // Reassemble the stationary blocks the projection solves with.
    const BulkMatrices k_fine = assemble_bulk_matrices_full(bulk_fine, 0.1);
    const Vec rhs_u = restrict_vector(
        Vec(SpMat(p_bulk.transpose()) * (k_fine.stiffness * u_fine_full)),
        sys.bulk_dofs.free_nodes);
    const BoundaryMatrices fine_shift_full =
        assemble_boundary_matrices_full(fine, c, true);
    const SpMat p_gamma = prolong_boundary(gamma, fine);
    const Vec rhs_q = restrict_vector(
        Vec(SpMat(p_gamma.transpose()) * (fine_shift_full.stiffness * p_fine_full)),
        sys.mu_dofs.free_nodes);
    BoundaryMatrices fine_free;
    fine_free.stiffness = restrict_matrix(fine_shift_full.stiffness,
                                          fine_dofs.free_nodes, fine_dofs.free_nodes);
    fine_free.mass = restrict_matrix(fine_shift_full.mass, fine_dofs.free_nodes,
                                     fine_dofs.free_nodes);
    const LodMatrices lm =
        lod_boundary_matrices(sys.prolong_fine, sys.basis, fine_free);

    const Vec res_u = sys.k_u * r.u - rhs_u;
    const Vec res_p = lm.stiffness * r.p - rhs_q;
    const double scale = rhs_u.norm() + rhs_q.norm();

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int probe = 0; probe < 20; ++probe) {
      Vec v(sys.n_u());
      for (int k = 0; k < v.size(); ++k) v[k] = dist(rng);
      const Vec q = sys.trace * v;
      // The multiplier terms cancel when the test pair obeys q = v|_Gamma,
      // leaving plain Galerkin orthogonality.
      const double res = v.dot(res_u) + q.dot(res_p);
      CHECK(std::abs(res) <= 1e-9 * scale * v.norm());
    }
  }

  SUBCASE("under-localized systems are rejected") {
    // H_Gamma = 1/8 asks for m >= 3; build m = 1 correctors.
    const CorrectorBasis small = compute_correctors(fine, gamma, c, 1,
                                                    CorrectorForm::shifted,
                                                    InterpolationKind::clement);
    const PdaeSystem weak =
        assemble_system(bulk, gamma, c, 0.1, Variant::pglod, &fine, &small);
    Vec u_fine_full = Vec::Zero(bulk_fine.num_nodes());
    Vec p_fine_full = Vec::Zero(fine.num_nodes());
    CHECK_THROWS_AS(
        (void)ritz_projection(u_fine_full, bulk_fine, p_fine_full, weak, c),
        std::invalid_argument);
    CHECK_NOTHROW((void)ritz_projection(u_fine_full, bulk_fine, p_fine_full,
                                        weak, c, false));
  }
}

TEST_CASE("inf-sup constants are positive and tame") {
  for (const DynamicBoundary dyn : {DynamicBoundary::full, DynamicBoundary::bottom}) {
    double prev = 0.0;
    for (int n : {4, 8}) {
      const BulkMesh bulk = build_bulk_mesh(n, dyn);
      const BoundaryMesh gamma = restrict_to_boundary(bulk, dyn);
      const double beta = infsup_constant(bulk, gamma);
      CHECK(beta > 0.0);
      CHECK(beta < 2.0);
      if (prev > 0.0) {
        CHECK(beta / prev < 2.0);
        CHECK(prev / beta < 2.0);
      }
      prev = beta;
    }
  }
}

}  // TEST_SUITE
