#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "stiga/tensor_space.hpp"

using namespace stiga;

namespace {

TensorSpace square_space(int spans, int p, bool transient = true) {
    std::vector<KnotVector> axes;
    axes.push_back(KnotVector::open_uniform(1.0, spans, p));
    axes.push_back(KnotVector::open_uniform(1.0, spans, p));
    return TensorSpace(std::move(axes), transient);
}

}  // namespace

TEST_CASE("neighbor and support counts") {
    const TensorSpace sp = square_space(6, 1);  // 7x7 control points
    CHECK(sp.neighbors({3, 3, 0}).size() == 9);
    CHECK(sp.neighbors({0, 0, 0}).size() == 4);
    CHECK(sp.support_set({3, 3, 0}).size() == 9);  // p = 1: support == neighbors

    const TensorSpace sp2 = square_space(6, 2);
    CHECK(sp2.support_set({4, 4, 0}).size() == 25);
    CHECK(sp2.support_set({1, 4, 0}).size() == 20);  // clipped at the low side

    std::vector<KnotVector> axes3;
    for (int a = 0; a < 3; ++a) axes3.push_back(KnotVector::open_uniform(1.0, 4, 1));
    const TensorSpace sp3(std::move(axes3), true);
    CHECK(sp3.neighbors({2, 2, 2}).size() == 27);

    CHECK_THROWS_AS(sp.neighbors({-1, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(sp.neighbors({7, 0, 0}), std::invalid_argument);
}

TEST_CASE("neighbors are contained in the support set") {
    std::mt19937 rng(3);
    for (int p = 1; p <= 3; ++p) {
        const TensorSpace sp = square_space(5, p);
        std::uniform_int_distribution<int> pick(0, sp.size(0) - 1);
        for (int trial = 0; trial < 20; ++trial) {
            const MultiIndex i{pick(rng), pick(rng), 0};
            std::set<std::int64_t> support;
            for (const auto& j : sp.support_set(i)) support.insert(sp.flatten(j));
            for (const auto& j : sp.neighbors(i)) {
                CHECK(support.count(sp.flatten(j)) == 1);
            }
        }
    }
}

TEST_CASE("flatten is lexicographic with time slowest") {
    const TensorSpace sp = square_space(3, 1);  // 4x4
    CHECK(sp.flatten({0, 0, 0}) == 0);
    CHECK(sp.flatten({1, 0, 0}) == 1);
    CHECK(sp.flatten({0, 1, 0}) == 4);
    CHECK(sp.flatten({3, 3, 0}) == 15);
    for (std::int64_t f = 0; f < sp.total_points(); ++f) {
        CHECK(sp.flatten(sp.unflatten(f)) == f);
    }
}

TEST_CASE("greville points compose per direction") {
    std::vector<KnotVector> axes;
    axes.push_back(KnotVector({0, 0, 0.5, 1, 1}, 1));
    axes.push_back(KnotVector({0, 0, 0.5, 1, 1}, 1));
    const TensorSpace sp(std::move(axes), true);
    const Point mid = sp.greville_point({1, 1, 0});
    CHECK(mid[0] == doctest::Approx(0.5));
    CHECK(mid[1] == doctest::Approx(0.5));
    const Point corner = sp.greville_point({0, 0, 0});
    CHECK(corner[0] == doctest::Approx(0.0));
    CHECK(corner[1] == doctest::Approx(0.0));

    std::vector<KnotVector> axes2;
    axes2.push_back(KnotVector({0, 0, 0, 1, 2, 2, 2}, 2));
    axes2.push_back(KnotVector({0, 0, 0, 1, 2, 2, 2}, 2));
    const TensorSpace sp2(std::move(axes2), true);
    const Point x = sp2.greville_point({2, 1, 0});
    CHECK(x[0] == doctest::Approx(1.5));
    CHECK(x[1] == doctest::Approx(0.5));
}

TEST_CASE("symmetric point reflects through the center on uniform grids") {
    const TensorSpace sp = square_space(8, 1);
    const MultiIndex i{4, 4, 0};

    SUBCASE("axis direction") {
        const SymmetricPoint s = sp.symmetric_point(i, {5, 4, 0});
        REQUIRE(s.available);
        const Point expect = sp.greville_point({3, 4, 0});
        CHECK(s.x[0] == doctest::Approx(expect[0]));
        CHECK(s.x[1] == doctest::Approx(expect[1]));
        double w_at_opposite = 0.0;
        for (int k = 0; k < s.count; ++k) {
            if (s.index[k] == sp.flatten({3, 4, 0})) w_at_opposite += s.weight[k];
        }
        CHECK(w_at_opposite == doctest::Approx(1.0));
    }

    SUBCASE("diagonal direction") {
        const SymmetricPoint s = sp.symmetric_point(i, {5, 5, 0});
        REQUIRE(s.available);
        const Point expect = sp.greville_point({3, 3, 0});
        CHECK(s.x[0] == doctest::Approx(expect[0]));
        CHECK(s.x[1] == doctest::Approx(expect[1]));
        double w_at_opposite = 0.0;
        for (int k = 0; k < s.count; ++k) {
            if (s.index[k] == sp.flatten({3, 3, 0})) w_at_opposite += s.weight[k];
        }
        CHECK(w_at_opposite == doctest::Approx(1.0));
    }
}

TEST_CASE("symmetric point near a boundary lands inside a facet") {
    // p = 2 in x gives the nonuniform Greville spacing {0, 0.5, 1.5, 2}.
    std::vector<KnotVector> axes;
    axes.push_back(KnotVector({0, 0, 0, 1, 2, 2, 2}, 2));
    axes.push_back(KnotVector::open_uniform(2.0, 2, 2));  // same in time
    const TensorSpace sp(std::move(axes), true);

    // From i = (1, 1), direction j = (2, 2): ray exits towards smaller
    // coordinates.  Distances: x side 0.5 with ray slope 1 (u = (-1, -1)
    // after normalization by the grid), time side 0.5; both hit together at
    // the corner (0, 0) = greville (0, 0).
    const SymmetricPoint s = sp.symmetric_point({1, 1, 0}, {2, 2, 0});
    REQUIRE(s.available);
    CHECK(s.x[0] == doctest::Approx(0.0));
    CHECK(s.x[1] == doctest::Approx(0.0));

    // From i = (2, 1), direction j = (1, 2): u = x_i - x_j = (1, -1).
    // Exit at the x high side: distance to x=2 is 0.5; time side distance
    // 0.5; tie again -> vertex (3, 0) at (2, 0).
    const SymmetricPoint s2 = sp.symmetric_point({2, 1, 0}, {1, 2, 0});
    REQUIRE(s2.available);
    CHECK(s2.x[0] == doctest::Approx(2.0));
    CHECK(s2.x[1] == doctest::Approx(0.0));

    // From i = (1, 1), direction j = (0, 2): ray direction u = (0.5, -1).
    // The time side t = 0 is hit at s = 0.5 before the x side (s = 2), so
    // the exit point (0.75, 0) lies strictly inside the bottom facet,
    // between greville x = 0.5 and x = 1.5 (weights 0.75 and 0.25).
    const SymmetricPoint s3 = sp.symmetric_point({1, 1, 0}, {0, 2, 0});
    REQUIRE(s3.available);
    CHECK(s3.x[0] == doctest::Approx(0.75));
    CHECK(s3.x[1] == doctest::Approx(0.0));
    // Interpolation reproduces coordinates: sum w_a x_a = x_sym.
    double xi = 0.0;
    double eta = 0.0;
    double wsum = 0.0;
    for (int k = 0; k < s3.count; ++k) {
        const Point xa = sp.greville_point(sp.unflatten(s3.index[k]));
        xi += s3.weight[k] * xa[0];
        eta += s3.weight[k] * xa[1];
        wsum += s3.weight[k];
        CHECK(s3.weight[k] >= -1e-15);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(xi == doctest::Approx(s3.x[0]).epsilon(1e-13));
    CHECK(eta == doctest::Approx(s3.x[1]).epsilon(1e-13));
}

TEST_CASE("symmetric point stencil properties on random meshes") {
    std::mt19937 rng(17);
    for (int p = 1; p <= 3; ++p) {
        const TensorSpace sp = square_space(6, p);
        std::uniform_int_distribution<int> pick(0, sp.size(0) - 1);
        for (int trial = 0; trial < 60; ++trial) {
            const MultiIndex i{pick(rng), pick(rng), 0};
            std::uniform_int_distribution<int> d(-1, 1);
            MultiIndex j = i;
            j[0] += d(rng);
            j[1] += d(rng);
            if ((j[0] == i[0] && j[1] == i[1]) || !sp.valid(j)) continue;
            const SymmetricPoint s = sp.symmetric_point(i, j);
            const MultiIndex opposite{2 * i[0] - j[0], 2 * i[1] - j[1], 0};
            if (!sp.valid(opposite)) {
                CHECK_FALSE(s.available);
                continue;
            }
            REQUIRE(s.available);
            double wsum = 0.0;
            Point interp{0.0, 0.0, 0.0};
            for (int k = 0; k < s.count; ++k) {
                CHECK(s.weight[k] >= -1e-15);
                wsum += s.weight[k];
                const Point xa = sp.greville_point(sp.unflatten(s.index[k]));
                interp[0] += s.weight[k] * xa[0];
                interp[1] += s.weight[k] * xa[1];
            }
            CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(interp[0] == doctest::Approx(s.x[0]).epsilon(1e-13));
            CHECK(interp[1] == doctest::Approx(s.x[1]).epsilon(1e-13));
        }
    }
}

TEST_CASE("symmetric point rejects non-neighbors") {
    const TensorSpace sp = square_space(6, 1);
    CHECK_THROWS_AS(sp.symmetric_point({3, 3, 0}, {3, 3, 0}), std::invalid_argument);
    CHECK_THROWS_AS(sp.symmetric_point({3, 3, 0}, {5, 3, 0}), std::invalid_argument);
}

TEST_CASE("boundary classification") {
    ProblemData prob;
    prob.d = 1;
    prob.transient = true;

    std::vector<KnotVector> axes;
    axes.push_back(KnotVector::open_uniform(1.0, 4, 1));  // 5 points in x
    axes.push_back(KnotVector::open_uniform(1.0, 3, 1));  // 4 points in t
    const TensorSpace sp(std::move(axes), true);

    SUBCASE("diffusive: both spatial columns constrained") {
        prob.mu = 1.0;
        const auto labels = sp.classify_boundary(prob);
        for (int it = 1; it < sp.size(1); ++it) {
            CHECK(labels[sp.flatten({0, it, 0})] == PointClass::dirichlet);
            CHECK(labels[sp.flatten({4, it, 0})] == PointClass::dirichlet);
            CHECK(labels[sp.flatten({2, it, 0})] == PointClass::free_point);
        }
    }

    SUBCASE("pure transport: only the inflow column constrained") {
        prob.mu = 0.0;
        prob.beta = [](const SpatialPoint&) { return Velocity{1.0, 0.0}; };
        const auto labels = sp.classify_boundary(prob);
        for (int it = 1; it < sp.size(1); ++it) {
            CHECK(labels[sp.flatten({0, it, 0})] == PointClass::dirichlet);
            CHECK(labels[sp.flatten({4, it, 0})] == PointClass::free_point);
        }
    }

    SUBCASE("initial layer wins over the spatial boundary") {
        prob.mu = 1.0;
        const auto labels = sp.classify_boundary(prob);
        for (int ix = 0; ix < sp.size(0); ++ix) {
            CHECK(labels[sp.flatten({ix, 0, 0})] == PointClass::initial);
        }
    }

    SUBCASE("every index labeled exactly once") {
        prob.mu = 0.0;
        prob.beta = [](const SpatialPoint&) { return Velocity{1.0, 0.0}; };
        const auto labels = sp.classify_boundary(prob);
        CHECK(labels.size() == static_cast<std::size_t>(sp.total_points()));
        std::int64_t initial = 0, dirichlet = 0, free_count = 0;
        for (const PointClass c : labels) {
            if (c == PointClass::initial) ++initial;
            if (c == PointClass::dirichlet) ++dirichlet;
            if (c == PointClass::free_point) ++free_count;
        }
        CHECK(initial == 5);
        CHECK(dirichlet == 3);  // inflow column above the initial layer
        CHECK(initial + dirichlet + free_count == sp.total_points());
    }
}

TEST_CASE("steady space has no initial layer") {
    ProblemData prob;
    prob.d = 2;
    prob.transient = false;
    prob.mu = 1.0;
    const TensorSpace sp = square_space(4, 1, false);
    const auto labels = sp.classify_boundary(prob);
    for (const PointClass c : labels) CHECK(c != PointClass::initial);
    CHECK(labels[sp.flatten({0, 2, 0})] == PointClass::dirichlet);
    CHECK(labels[sp.flatten({2, 2, 0})] == PointClass::free_point);
}
