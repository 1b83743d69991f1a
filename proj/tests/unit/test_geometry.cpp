#include "doctest.h"

#include <cmath>
#include <sstream>

#include "sel/errors.hpp"
#include "sel/geometry.hpp"

using namespace sel;

TEST_CASE("uniform interval nodes and distances") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 9);
    REQUIRE(g->size() == 9);
    for (int i = 0; i < 9; ++i) {
        CHECK(g->point(i).x() == doctest::Approx(i / 8.0));
        CHECK(g->delta[i] == doctest::Approx(std::min(i, 8 - i) / 8.0));
    }
    CHECK(g->interior_count() == 7);
    CHECK(!g->interior[0]);
    CHECK(!g->interior[8]);
}

TEST_CASE("disk centre sits at distance R") {
    for (int n : {8, 12}) {
        const auto g = build_grid(Domain::disk(1.0), n);
        CHECK(g->delta[0] == doctest::Approx(1.0));
        CHECK(g->point(0).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("graded interval follows the grading map") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 9, Grading::boundary_graded(1.0));
    // s -> (2s)^2/2 on the left half
    const double s = 1.0 / 8.0;
    CHECK(g->point(1).x() == doctest::Approx(std::pow(2.0 * s, 2.0) / 2.0));
    CHECK(grading_map(s, 1.0) == doctest::Approx(s * s * 2.0));
    CHECK(grading_map(0.3, 0.0) == doctest::Approx(0.3));
    for (int i = 0; i + 1 < g->size(); ++i) CHECK(g->point(i + 1).x() > g->point(i).x());
    for (int i = 0; i < g->size(); ++i) CHECK(g->point(i).x() + g->point(g->size() - 1 - i).x() == doctest::Approx(1.0));
}

TEST_CASE("distance to the boundary") {
    CHECK(distance_to_boundary(Domain::rectangle(0, 1, 0, 2), Eigen::Vector2d(0.3, 1.0)) == doctest::Approx(0.3));
    CHECK(distance_to_boundary(Domain::disk(2.0), Eigen::Vector2d(0, 0)) == doctest::Approx(2.0));
    CHECK(distance_to_boundary(Domain::interval(0, 1), 0.9) == doctest::Approx(0.1));
}

TEST_CASE("delta is 1-Lipschitz and vanishes only on the boundary") {
    for (const auto& dom : {Domain::interval(-1, 2), Domain::rectangle(0, 1, 0, 2), Domain::disk(1.5)}) {
        const auto g = build_grid(dom, 9);
        for (int i = 0; i < g->size(); ++i) {
            CHECK((g->delta[i] > 0.0) == static_cast<bool>(g->interior[i]));
            for (int j = 0; j < g->size(); ++j)
                CHECK(std::abs(g->delta[i] - g->delta[j]) <= (g->point(i) - g->point(j)).norm() + 1e-12);
        }
    }
}

TEST_CASE("bad domains and resolutions are rejected") {
    CHECK_THROWS_AS(build_grid(Domain::interval(1.0, 0.0), 5), DomainError);
    CHECK_THROWS_AS(build_grid(Domain::disk(-1.0), 5), DomainError);
    CHECK_THROWS_AS(build_grid(Domain::interval(0.0, 1.0), 5), ResolutionError);
}

TEST_CASE("control volumes sum to the measure") {
    const auto g = build_grid(Domain::interval(0.0, 2.0), 33, Grading::boundary_graded(2.0));
    CHECK(control_volumes(*g).sum() == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("grid csv has one row per node") {
    const auto g = build_grid(Domain::interval(0.0, 1.0), 11);
    std::ostringstream os;
    write_grid_csv(os, *g);
    const std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 12);
}
