#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sel/errors.hpp"
#include "sel/operators.hpp"

using namespace sel;

TEST_CASE("Pucci values on hand examples") {
    const Eigen::Matrix2d Z = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d M;
    M << 1, 0, 0, -1;
    CHECK(pucci_plus(Z, 1.0, 2.0) == 0.0);
    CHECK(pucci_minus(Z, 1.0, 2.0) == 0.0);
    CHECK(pucci_plus(M, 1.0, 2.0) == doctest::Approx(1.0));
    CHECK(pucci_minus(M, 1.0, 2.0) == doctest::Approx(-1.0));
    CHECK(pucci_plus(-3.0, 1.0, 2.0) == doctest::Approx(6.0));
}

TEST_CASE("Pucci agrees with brute force over sampled coefficient matrices") {
    // the sampled sup misses the true rotation by up to a quarter degree
    std::mt19937_64 rng(7);
    for (int k = 0; k < 40; ++k) {
        const Eigen::Matrix2d M = oracle::random_symmetric(rng);
        const auto bf = oracle::brute_force_pucci(M, 0.5, 2.5);
        CHECK(pucci_plus(M, 0.5, 2.5) == doctest::Approx(bf.sup).epsilon(1e-4));
        CHECK(pucci_minus(M, 0.5, 2.5) == doctest::Approx(bf.inf).epsilon(1e-4));
    }
}

TEST_CASE("duality, ordering and subadditivity on random matrices") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 500; ++k) {
        const Eigen::Matrix2d M = oracle::random_symmetric(rng), N = oracle::random_symmetric(rng);
        CHECK(pucci_minus(M, 1.0, 3.0) == doctest::Approx(-pucci_plus(Eigen::Matrix2d(-M), 1.0, 3.0)));
        CHECK(pucci_minus(M, 1.0, 3.0) <= pucci_plus(M, 1.0, 3.0) + 1e-12);
        CHECK(pucci_plus(Eigen::Matrix2d(M + N), 1.0, 3.0) <= pucci_plus(M, 1.0, 3.0) + pucci_plus(N, 1.0, 3.0) + 1e-12);
        CHECK(pucci_minus(Eigen::Matrix2d(M + N), 1.0, 3.0) >= pucci_minus(M, 1.0, 3.0) + pucci_minus(N, 1.0, 3.0) - 1e-12);
    }
}

TEST_CASE("policy reproduces the operator value") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        const Eigen::Matrix2d M = oracle::random_symmetric(rng);
        for (auto s : {PucciSign::plus, PucciSign::minus}) {
            const Eigen::Matrix2d A = pucci_policy(M, 1.0, 2.0, s);
            const double v = s == PucciSign::plus ? pucci_plus(M, 1.0, 2.0) : pucci_minus(M, 1.0, 2.0);
            CHECK(-(A * M).trace() == doctest::Approx(v));
        }
    }
}

TEST_CASE("non-symmetric input is a contract violation") {
    Eigen::Matrix2d M;
    M << 1, 2, 0, 1;
    CHECK_THROWS_AS(pucci_plus(M, 1.0, 2.0), ContractViolation);
}

TEST_CASE("evaluate_F of the Laplacian is minus the trace") {
    HessianData h{Eigen::MatrixXd::Constant(1, 1, -2.0), Eigen::VectorXd::Zero(1), 5.0, Eigen::Vector2d::Zero()};
    CHECK(evaluate_F(OperatorSpec::laplacian(), h) == doctest::Approx(2.0));
}

TEST_CASE("evaluate_F is positively homogeneous") {
    std::mt19937_64 rng(5);
    OperatorSpec F = OperatorSpec::pucci(PucciSign::minus, 1.0, 4.0);
    F.Gamma = 1.0;
    F.gamma = 0.5;
    F.drift = [](const Eigen::Vector2d& x) { return Eigen::Vector2d(std::sin(x[0]), 0.3); };
    F.zeroth = [](const Eigen::Vector2d& x) { return 0.25 * (1.0 + std::cos(x[1])); };
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Matrix2d M = oracle::random_symmetric(rng);
        const Eigen::Vector2d g(U(rng), U(rng)), x(U(rng), U(rng));
        const double r = U(rng);
        const double f = evaluate_F(F, {M, g, r, x});
        CHECK(evaluate_F(F, {3.5 * M, 3.5 * g, 3.5 * r, x}) == doctest::Approx(3.5 * f));
    }
}

TEST_CASE("operator validation rejects bad ellipticity constants") {
    CHECK_THROWS(OperatorSpec::pucci(PucciSign::plus, 2.0, 1.0).validate());
    CHECK_THROWS(OperatorSpec::pucci(PucciSign::plus, 0.0, 1.0).validate());
}

TEST_CASE("discrete operator on affine and quadratic functions") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 21);
    const auto lin = sample(g, [](const Eigen::Vector2d& x) { return 3.0 * x[0] - 1.0; });
    const auto quad = sample(g, [](const Eigen::Vector2d& x) { return x[0] * (1.0 - x[0]); });
    const auto r0 = discretize(OperatorSpec::laplacian(), lin);
    const auto r2 = discretize(OperatorSpec::laplacian(), quad);
    for (int i = 0; i < g->size(); ++i)
        if (g->interior[i]) {
            CHECK(std::abs(r0[i]) < 1e-10);
            CHECK(r2[i] == doctest::Approx(2.0));
        }
}

TEST_CASE("graded interval stencil is exact on quadratics") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 31, Grading::boundary_graded(2.0));
    const auto quad = sample(g, [](const Eigen::Vector2d& x) { return x[0] * (1.0 - x[0]); });
    const auto r = discretize(OperatorSpec::laplacian(), quad);
    for (int i = 0; i < g->size(); ++i)
        if (g->interior[i]) CHECK(r[i] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("disk stencil on 1 - x^2 - y^2") {
    const auto g = build_grid(Domain::disk(1.0), 12);
    const auto u = sample(g, [](const Eigen::Vector2d& x) { return 1.0 - x.squaredNorm(); });
    const auto r = discretize(OperatorSpec::laplacian(), u);
    for (int i = 0; i < g->size(); ++i)
        if (g->interior[i]) CHECK(r[i] == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("linearization reproduces apply") {
    const auto g = build_grid(Domain::rectangle(0, 1, 0, 1), 9);
    const DiscreteOperator op(OperatorSpec::pucci(PucciSign::plus, 1.0, 3.0), g);
    const auto u = sample(g, [](const Eigen::Vector2d& x) { return std::sin(3 * x[0]) * x[1] * (1 - x[1]) + x[0] * x[1]; });
    const Eigen::SparseMatrix<double> L = op.linearize(u.values);
    const Eigen::VectorXd a = op.apply(u.values), b = L * u.values;
    for (int i = 0; i < g->size(); ++i)
        if (g->interior[i]) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("sum margins") {
    const auto g = build_grid(Domain::rectangle(0, 1, 0, 1), 9);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    GridFunction u(g), v(g), z(g);
    for (int i = 0; i < g->size(); ++i)
        if (g->interior[i]) {
            u[i] = U(rng);
            v[i] = U(rng);
        }
    const auto lap = OperatorSpec::laplacian();
    CHECK(std::abs(check_subsolution_sum(lap, lap, lap, u, v, z, z).max_margin) < 1e-9);
    CHECK(std::abs(check_subsolution_sum(lap, lap, lap, u, v, z, z).min_margin) < 1e-9);
    const auto pp = OperatorSpec::pucci(PucciSign::plus, 1.0, 2.0);
    CHECK(check_subsolution_sum(pp, pp, pp, u, v, z, z).min_margin >= -1e-9);
    const auto pm = OperatorSpec::pucci(PucciSign::minus, 1.0, 2.0);
    CHECK(check_subsolution_sum(pm, pm, pm, u, v, z, z).max_margin <= 1e-9);
}
