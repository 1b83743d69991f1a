#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sel/classifier.hpp"
#include "sel/errors.hpp"
#include "sel/rates.hpp"
#include "sel/system_solver.hpp"

using namespace sel;

TEST_CASE("cone shapes for the subcases") {
    const ConeShape a = cone_shape({0.25, 0.25, 0.25, 0.25});
    CHECK(a.subcase == Subcase::III);
    CHECK(a.u_lo == 1.0);
    CHECK(a.v_hi == 1.0);
    const ConeShape b = cone_shape({0.1, 0.3, 1.2, 0.2});
    CHECK(b.subcase == Subcase::I);
    CHECK(b.v_lo == doctest::Approx(2.0 / 3.0));
    CHECK(cone_shape({0.5, 0.5, 0.3, 0.3}).subcase == Subcase::IV);
}

TEST_CASE("cone constants satisfy the inequalities and match the search oracle") {
    const ExponentQuad x{0.25, 0.25, 0.25, 0.25};
    const ConeConstants k = choose_cone_constants(0.5, 2.0, x);
    CHECK(cone_constant_violation(k, 0.5, 2.0, x) <= 0.0);
    CHECK(oracle::cone_point_ok(k.m1, k.M1, k.m2, k.M2, 0.5, 2.0, x.p, x.q, x.r, x.s));
    CHECK(oracle::grid_search_cone(0.5, 2.0, x.p, x.q, x.r, x.s).feasible);
    CHECK_THROWS_AS(choose_cone_constants(1.5, 1.5, x), PreconditionError);
    CHECK_THROWS_AS(choose_cone_constants(0.5, 2.0, {0, 1.2, 1.2, 0}), Infeasible);
}

TEST_CASE("cone margin collapses as det goes to zero") {
    const ExponentQuad loose{0, 0.5, 0.5, 0}, tight{0, 0.99, 0.99, 0};
    const double m0 = choose_cone_constants(0.5, 2.0, loose).margin;
    const double m1 = choose_cone_constants(0.5, 2.0, tight).margin;
    CHECK(m1 < m0);
    CHECK(m1 < 0.05);
    CHECK(oracle::grid_search_cone(0.5, 2.0, 0, 0.99, 0.99, 0).best_slack < oracle::grid_search_cone(0.5, 2.0, 0, 0.5, 0.5, 0).best_slack);
}

TEST_CASE("symmetric instance gives u = v and linear rates") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 401, Grading::boundary_graded(2.0));
    const ExponentQuad x{0.25, 0.25, 0.25, 0.25};
    const ConeSpec cone = build_cone(OperatorSpec::laplacian(), g, x);
    const SystemResult r = picard_iterate(OperatorSpec::laplacian(), g, x, cone);
    CHECK((r.u.values - r.v.values).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.all_in_cone());
    CHECK(r.residual_u < 1e-6);
    CHECK(std::abs(fit_rate(r.u, RateSpec{}).fitted_power - 1.0) < 0.05);

    const SystemResidual base = system_residual(OperatorSpec::laplacian(), r.u, r.v, x);
    GridFunction bumped = r.u;
    bumped[200] += 1e-3;
    const SystemResidual hit = system_residual(OperatorSpec::laplacian(), bumped, r.v, x);
    const double h = g->point(201).x() - g->point(200).x();
    CHECK(hit.raw_u > 0.5 * 2e-3 / (h * h));
    CHECK(base.raw_u < 1e-4);
}

TEST_CASE("swapping a non-symmetric pair breaks the residual") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 401, Grading::boundary_graded(2.0));
    const ExponentQuad x{0.1, 0.3, 1.2, 0.2};
    const ConeSpec cone = build_cone(OperatorSpec::laplacian(), g, x);
    const SystemResult r = picard_iterate(OperatorSpec::laplacian(), g, x, cone);
    const SystemResidual sw = system_residual(OperatorSpec::laplacian(), r.v, r.u, x);
    CHECK(std::max(sw.u, sw.v) > 1e3 * std::max(r.residual_u, r.residual_v));
}

TEST_CASE("uniqueness probe") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 401, Grading::boundary_graded(2.0));
    const ExponentQuad x{0, 0.5, 0.5, 0};
    const ConeSpec cone = build_cone(OperatorSpec::laplacian(), g, x);
    const UniquenessReport u = uniqueness_probe(OperatorSpec::laplacian(), g, x, cone);
    CHECK(u.predicted == doctest::Approx(0.25));
    CHECK(u.distance < 1e-9);
    CHECK(u.contraction <= u.predicted + 0.05);

    PicardOptions same;
    same.u0 = cone.u_lower.coef * Eigen::VectorXd::Ones(g->size());
    const SystemResult a = picard_iterate(OperatorSpec::laplacian(), g, x, cone);
    const SystemResult b = picard_iterate(OperatorSpec::laplacian(), g, x, cone);
    CHECK((a.u.values - b.u.values).cwiseAbs().maxCoeff() == 0.0);
}
