#include "doctest.h"

#include <cmath>

#include "regflow/operator.hpp"
#include "test_support.hpp"

using namespace regflow;
using regflow::testing::near;

namespace {

const auto x_axis = PrimitiveSet::hyperplane(make_point({0, 1}), 0.0);
const auto y_axis = PrimitiveSet::hyperplane(make_point({1, 0}), 0.0);
const std::vector<PrimitiveSet> orthant{PrimitiveSet::halfspace(make_point({1, 0}), 0.0),
                                        PrimitiveSet::halfspace(make_point({0, 1}), 0.0)};

} // namespace

TEST_CASE("residual") {
    CHECK(residual(identity(3), make_point({1, -2, 3})) == 0.0);
    CHECK(residual(zero_map(2), make_point({3, 4})) == 5.0);
    CHECK(residual(projector(x_axis), make_point({1, 2})) == 2.0);
}

TEST_CASE("dykstra_project") {
    const auto r = dykstra_project(orthant, make_point({1, 1}), 1e-12, 1000);
    CHECK(near(r.witness, make_point({0, 0}), 1e-10));
    CHECK(r.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.certified_tol < 1e-12);

    const auto inside = dykstra_project(orthant, make_point({-1, -1}));
    CHECK(inside.witness == make_point({-1, -1}));
    CHECK(inside.distance == 0.0);

    const auto origin = dykstra_project({x_axis, y_axis}, make_point({3, 4}));
    CHECK(near(origin.witness, Point::Zero(2), 1e-12));
    CHECK(origin.distance == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("dykstra_project: witness lies in every set up to certified_tol") {
    const std::vector<PrimitiveSet> sets{PrimitiveSet::ball(make_point({0, 0, 0}), 2.0),
                                        PrimitiveSet::halfspace(make_point({1, 1, 1}), 1.0),
                                        PrimitiveSet::box(make_point({-1, -1, -1}), make_point({3, 3, 0.5}))};
    for (const auto& x : regflow::testing::random_points(50, 3, 8.0, 3)) {
        const auto r = dykstra_project(sets, x, 1e-12, 100000);
        for (const auto& s : sets) CHECK(distance(s, r.witness) <= r.certified_tol + 1e-15);
        CHECK(r.distance == (x - r.witness).norm());
    }
}

TEST_CASE("dykstra_project: convergence error carries the best iterate") {
    const std::vector<PrimitiveSet> disjoint{PrimitiveSet::halfspace(make_point({1, 0}), -1.0),
                                             PrimitiveSet::halfspace(make_point({-1, 0}), -1.0)};
    try {
        (void)dykstra_project(disjoint, make_point({0, 0}), 1e-12, 50);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.best().witness.size() == 2);
        CHECK(e.best().certified_tol > 1e-12);
    }
    CHECK_THROWS_AS((void)dykstra_project(orthant, make_point({1, 1}), 0.0, 10), UsageError);
}

TEST_CASE("distance_to_fix") {
    const auto ball = FixSetOracle::exact(PrimitiveSet::ball(Point::Zero(2), 1.0));
    CHECK(distance_to_fix(ball, make_point({2, 0})).distance == 1.0);
    CHECK(distance_to_fix(FixSetOracle::point(make_point({1, 1})), make_point({1, 1})).distance == 0.0);
    const auto inter = FixSetOracle::intersection(orthant);
    CHECK(distance_to_fix(inter, make_point({1, 1})).distance == doctest::Approx(1.41421356).epsilon(1e-8));
}

TEST_CASE("intersection oracle construction") {
    CHECK_THROWS_AS(FixSetOracle::intersection({}), ConstructionError);
    CHECK_THROWS_AS(FixSetOracle::intersection({PrimitiveSet::ball(make_point({0, 0}), 1.0),
                                                PrimitiveSet::ball(make_point({5, 0}), 1.0)},
                                               1e-12, 2000),
                    ConstructionError);
    CHECK_THROWS_AS(FixSetOracle::intersection({x_axis, PrimitiveSet::hyperplane(make_point({0, 1}), 1.0)}),
                    ConstructionError);
    CHECK_THROWS_AS(FixSetOracle::intersection({x_axis, PrimitiveSet::ball(Point::Zero(3), 1.0)}), ConstructionError);
}

TEST_CASE("projector: distance to its fixed set equals the residual") {
    const std::vector<PrimitiveSet> sets{PrimitiveSet::ball(make_point({1, 0, 0}), 2.0),
                                         PrimitiveSet::box(make_point({0, 0, 0}), make_point({1, 2, 3})),
                                         PrimitiveSet::halfspace(make_point({1, -1, 2}), 0.5)};
    for (const auto& s : sets) {
        const auto P = projector(s);
        REQUIRE(P.fix_oracle());
        for (const auto& x : regflow::testing::random_points(200, 3, 10.0, 17)) {
            CHECK(std::abs(distance_to_fix(*P.fix_oracle(), x).distance - residual(P, x)) <= 1e-12);
        }
    }
}

TEST_CASE("hyperplane intersections: Dykstra agrees with the exact affine solve") {
    const double tol = 1e-12;
    const std::vector<std::vector<PrimitiveSet>> cases{
        {x_axis, y_axis},
        {PrimitiveSet::hyperplane(make_point({1, 1, 0}), 1.0), PrimitiveSet::hyperplane(make_point({0, 1, -1}), 2.0)},
        {PrimitiveSet::hyperplane(make_point({1, 2, 3}), 0.5), PrimitiveSet::hyperplane(make_point({-1, 0, 1}), 0.0),
         PrimitiveSet::hyperplane(make_point({0, 2, 4}), 0.5)},
    };
    for (const auto& sets : cases) {
        const auto exact = FixSetOracle::intersection(sets, tol);
        const auto n = sets.front().dim();
        for (const auto& x : regflow::testing::random_points(50, n, 10.0, 23)) {
            const auto a = exact.distance(x);
            const auto b = dykstra_project(sets, x, tol, 100000);
            CHECK((a.witness - b.witness).norm() <= 10 * tol);
            CHECK(std::abs(a.distance - b.distance) <= 10 * tol);
        }
    }
}

TEST_CASE("distance to a fixed set is nonexpansive") {
    const auto inter = FixSetOracle::intersection(
        {PrimitiveSet::ball(Point::Zero(2), 2.0), PrimitiveSet::halfspace(make_point({1, 1}), 0.5)});
    const auto pts = regflow::testing::random_points(400, 2, 10.0, 31);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double dx = inter.distance(pts[i]).distance;
        const double dy = inter.distance(pts[i + 1]).distance;
        CHECK(std::abs(dx - dy) <= (pts[i] - pts[i + 1]).norm() + 1e-10);
    }
}

TEST_CASE("with_tolerance rebuilds intersection oracles only") {
    const auto inter = FixSetOracle::intersection(orthant);
    const auto loose = inter.with_tolerance(1e-6, 10);
    CHECK(std::get<IntersectionOracle>(loose.variant()).tol == 1e-6);
    CHECK(std::get<IntersectionOracle>(loose.variant()).max_iter == 10);
    const auto pt = FixSetOracle::point(make_point({1, 2}));
    CHECK(std::holds_alternative<SinglePointOracle>(pt.with_tolerance(1e-3, 1).variant()));
}
