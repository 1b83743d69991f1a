#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sel/eigensolver.hpp"
#include "sel/errors.hpp"
#include "sel/rates.hpp"
#include "sel/scalar_solver.hpp"

using namespace sel;

TEST_CASE("eigenpair on (0, pi) against the dense oracle and sine") {
    const auto g = build_grid(Domain::interval(0.0, M_PI), 400);
    const EigenPair e = principal_eigenpair(OperatorSpec::laplacian(), g);
    const auto d = oracle::dense_laplacian_eigen(0.0, M_PI, 400);
    CHECK(std::abs(e.mu - 1.0) < 1e-3);
    CHECK(e.mu == doctest::Approx(d.mu).epsilon(1e-8));
    for (int i = 0; i < g->size(); ++i) {
        CHECK(std::abs(e.phi[i] - std::sin(g->point(i).x())) < 1e-3);
        CHECK(std::abs(e.phi[i] - d.phi[i]) < 1e-7);
    }
    CHECK(e.residual_norm < 1e-8);
    const EigenBounds b = verify_eigen_bounds(e);
    CHECK(b.C_low == doctest::Approx(2.0 / M_PI).epsilon(1e-2));
    CHECK(b.C_high == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(b.hopf_c > 0.0);
}

TEST_CASE("Pucci eigenvalue scales with Lambda on a concave eigenfunction") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 400);
    const EigenPair e = principal_eigenpair(OperatorSpec::pucci(PucciSign::plus, 1.0, 2.0), g);
    CHECK(e.mu == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-2));
    const EigenPair m = principal_eigenpair(OperatorSpec::pucci(PucciSign::minus, 1.0, 2.0), g);
    CHECK(m.mu == doctest::Approx(M_PI * M_PI).epsilon(1e-2));
}

TEST_CASE("disk eigenvalue near j0^2") {
    const auto g = build_grid(Domain::disk(1.0), 30);
    const EigenPair e = principal_eigenpair(OperatorSpec::laplacian(), g);
    CHECK(e.mu == doctest::Approx(5.7832).epsilon(2e-2));
    CHECK(e.phi.values.minCoeff() >= -1e-14);
}

TEST_CASE("scalar solve with p = 0 and k = 1 is exact on quadratics") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 41);
    const SolveResult r = solve_scalar_singular(OperatorSpec::laplacian(), g, 0.0, WeightSpec::power(0.0));
    CHECK(r.converged);
    for (int i = 0; i < g->size(); ++i) {
        const double x = g->point(i).x();
        CHECK(r.u[i] == doctest::Approx(x * (1 - x) / 2).epsilon(1e-9));
    }
}

TEST_CASE("-u'' = 1/u against the shooting oracle") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 801);
    const SolveResult r = solve_scalar_singular(OperatorSpec::laplacian(), g, 1.0, WeightSpec::power(0.0));
    const oracle::ShootingSolution ref(1.0, 0.0);
    CHECK(r.u[400] == doctest::Approx(ref.center()).epsilon(1e-3));
    // first integral: u'^2 / 2 = ln(U/u) gives U = 1/sqrt(2 pi)
    CHECK(ref.center() == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-4));
}

TEST_CASE("q >= 2 never converges silently") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 200, Grading::boundary_graded(2.0));
    for (double q : {2.0, 2.5}) CHECK_THROWS_AS(solve_scalar_singular(OperatorSpec::laplacian(), g, 0.0, WeightSpec::power(q)), SolverError);
}

TEST_CASE("solutions are positive and the residual is small") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 201, Grading::boundary_graded(1.0));
    const SolveResult r = solve_scalar_singular(OperatorSpec::pucci(PucciSign::minus, 1.0, 2.0), g, 0.7, WeightSpec::power(0.8));
    for (int i = 0; i < g->size(); ++i) CHECK((g->interior[i] ? r.u[i] > 0.0 : r.u[i] == 0.0));
    CHECK(r.final_residual < 1e-9);
    CHECK(r.epsilon_path.back() == 0.0);
}

TEST_CASE("comparison check") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 41);
    const SolveResult r = solve_scalar_singular(OperatorSpec::laplacian(), g, 0.0, WeightSpec::power(0.0));
    const GridFunction lo(g, 0.5 * r.u.values), hi(g, 2.0 * r.u.values);
    CHECK(comparison_check(OperatorSpec::laplacian(), lo, hi, 0.0, WeightSpec::power(0.0)).holds);
    const auto same = comparison_check(OperatorSpec::laplacian(), r.u, r.u, 0.0, WeightSpec::power(0.0));
    CHECK(same.holds);
    CHECK(same.min_gap == doctest::Approx(0.0));
}

TEST_CASE("integral criterion") {
    CHECK(integral_criterion(WeightSpec::power(2.0)).infinite);
    CHECK(integral_criterion(WeightSpec::power(2.0)).agree);
    CHECK_FALSE(integral_criterion(WeightSpec::power_log(2.0, 1.5, 2.0)).infinite);
    CHECK(integral_criterion(WeightSpec::power_log(2.0, 1.5, 2.0)).agree);
    for (double a : {-1.0, 0.0, 2.0}) CHECK_FALSE(integral_criterion(WeightSpec::power_log(1.0, a, 2.0)).infinite);
}

TEST_CASE("lower bound constants") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 101);
    const auto d = delta_function(g);
    CHECK(lower_bound_check(d, LowerBoundKind::linear).c == doctest::Approx(1.0));
    const auto ll = sample(g, [&](const Eigen::Vector2d& x) {
        const double t = distance_to_boundary(g->domain, x);
        return t > 0 ? 0.5 * t * std::log(std::log(10.0 / t)) : 0.0;
    });
    CHECK(lower_bound_check(ll, LowerBoundKind::loglog, 0.0, 10.0).c == doctest::Approx(0.5));
}

TEST_CASE("rate fits on synthetic data") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 801, Grading::boundary_graded(2.0));
    const auto pw = sample(g, [&](const Eigen::Vector2d& x) { return std::pow(distance_to_boundary(g->domain, x), 0.6); });
    RateSpec s;
    s.model = RateModel::power;
    const RateFit f = fit_rate(pw, s);
    CHECK(f.fitted_power == doctest::Approx(0.6));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.n_points >= 8);

    const auto lp = sample(g, [&](const Eigen::Vector2d& x) {
        const double t = distance_to_boundary(g->domain, x);
        return t > 0 ? t * std::pow(std::log(2.0 / t), 2.0 / 3.0) : 0.0;
    });
    RateSpec l;
    l.model = RateModel::linear_logpow;
    l.logpow = 2.0 / 3.0;
    CHECK(std::abs(fit_rate(lp, l).fitted_logpow - 2.0 / 3.0) < 0.02);
    CHECK(compare(fit_rate(pw, s), [] { RateSpec r; r.model = RateModel::power; r.power = 0.6; return r; }(), 1e-9, 0).pass);
    CHECK_FALSE(compare(fit_rate(pw, RateSpec{}), s, 0.05, 0.05).pass);
}

TEST_CASE("normal derivative probe") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 801, Grading::boundary_graded(2.0));
    const ProbeResult lin = normal_derivative_probe(delta_function(g));
    CHECK(lin.finite);
    CHECK(lin.magnitude == doctest::Approx(1.0).epsilon(1e-6));
    const auto sq = sample(g, [&](const Eigen::Vector2d& x) { return std::sqrt(distance_to_boundary(g->domain, x)); });
    CHECK_FALSE(normal_derivative_probe(sq).finite);
}

TEST_CASE("fitting layer needs enough points") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 9);
    CHECK_THROWS_AS(fit_rate(delta_function(g), RateSpec{}), LayerError);
}
