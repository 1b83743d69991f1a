#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sel/barrier.hpp"
#include "sel/eigensolver.hpp"
#include "sel/errors.hpp"

using namespace sel;

TEST_CASE("linear barrier matches nested quadrature") {
    const BarrierSolution s = solve_barrier_ode(0.5, 0.0, 0.5, 200);
    for (std::size_t i = 0; i < s.ts.size(); i += 7)
        if (s.ts[i] > 1e-10) CHECK(s.H[i] == doctest::Approx(oracle::nested_quadrature_H(0.5, 0.5, s.ts[i])).epsilon(1e-6));
    CHECK(s(0.5) == doctest::Approx(1.0));
}

TEST_CASE("barrier properties below the diagonal") {
    const BarrierSolution s = solve_barrier_ode(0.3, 0.4, 0.5, 2000);
    CHECK(s.props.positive_ok);
    CHECK(s.props.concave_ok);
    CHECK(s.props.chord_ok);
    CHECK(s.props.linear_bounds_ok);
    CHECK(s.props.c1 <= s.props.c2);
    const BarrierSolution h = solve_barrier_ode(0.5, 0.5, 0.5, 2000);
    CHECK(h.props.hp_bound_ok);
    CHECK(h.props.theta == doctest::Approx(1.0 / 1.5).epsilon(0.05));
}

TEST_CASE("forward and backward shooting agree on the slope") {
    BarrierOptions bw;
    bw.route = ShootingRoute::backward;
    const BarrierSolution f = solve_barrier_ode(0.3, 0.4, 0.5, 400);
    const BarrierSolution b = solve_barrier_ode(0.3, 0.4, 0.5, 400, bw);
    CHECK(f.slope_b == doctest::Approx(b.slope_b).epsilon(1e-5));
}

TEST_CASE("interpolant is out of range past b") {
    const BarrierSolution s = solve_barrier_ode(0.3, 0.4, 0.5, 200);
    CHECK_THROWS_AS(s(0.6), RangeError);
    CHECK(s(1e-200) >= 0.0);
}

TEST_CASE("composite barrier") {
    const auto g = build_grid(Domain::interval(0.0, M_PI), 101);
    const auto phi = sample(g, [](const Eigen::Vector2d& x) { return std::sin(x[0]); });
    const BarrierSolution s = solve_barrier_ode(0.3, 0.4, 0.5, 400);
    const auto w1 = composite_barrier(1.0, 0.5, s, phi), w2 = composite_barrier(2.0, 0.5, s, phi);
    for (int i = 0; i < g->size(); ++i) {
        CHECK(w2[i] >= w1[i]);
        if (g->interior[i]) {
            CHECK(w1[i] >= 0.5 * s.props.c1 * phi[i] * (1 - 1e-9));
            CHECK(w1[i] <= 0.5 * s.props.c2 * phi[i] * (1 + 1e-9));
        }
    }
    const auto w0 = composite_barrier(1.0, 1e-12, s, phi);
    CHECK(w0.values.maxCoeff() < 1e-9);
    CHECK_THROWS_AS(composite_barrier(1.0, 0.6, s, phi), RangeError);
}

TEST_CASE("log barriers") {
    const auto g = build_grid(Domain::interval(0.0, M_PI), 101);
    auto phi = sample(g, [](const Eigen::Vector2d& x) { return std::sin(x[0]); });
    const auto same = log_barrier(LogBarrierKind::phi_logpow, phi, 10.0, 0.0);
    for (int i = 0; i < g->size(); ++i) CHECK(same[i] == doctest::Approx(phi[i]));
    GridFunction one(g, Eigen::VectorXd::Constant(g->size(), 0.1));
    const auto v = log_barrier(LogBarrierKind::phi_logpow, one, 10.0, 0.5);
    CHECK(v[50] == doctest::Approx(0.1 * std::sqrt(std::log(100.0))));

    const auto ll = log_barrier(LogBarrierKind::phi_loglog, phi, 10.0 * M_PI, 0.0);
    for (int i = 1; i < 10; ++i) {
        CHECK(ll[i] > 0.0);
        CHECK(ll[i + 1] > ll[i]);
    }
}

TEST_CASE("exact discrete solution has zero barrier margin") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 21);
    const auto w = sample(g, [](const Eigen::Vector2d& x) { return x[0] * (1 - x[0]); });
    const GridFunction rhs(g, Eigen::VectorXd::Constant(g->size(), 2.0));
    for (auto side : {MarginSide::sub, MarginSide::super}) {
        const auto m = barrier_margin(OperatorSpec::laplacian(), w, rhs, side);
        for (int i = 0; i < g->size(); ++i)
            if (g->interior[i]) CHECK(std::abs(m[i]) < 1e-9);
    }
}
