#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "couplab/convex_prob.hpp"

using namespace couplab;

namespace {

ConvexSetSpec unit_ball(int dim, double r = 1.0) {
    ConvexSetSpec s;
    s.kind = SetKind::ball;
    s.dim = dim;
    s.center = Vec(dim, 0.0);
    s.radius = r;
    return s;
}

ConvexSetSpec box2(double lo, double hi) {
    ConvexSetSpec s;
    s.kind = SetKind::box;
    s.dim = 2;
    s.lo = {lo, lo};
    s.hi = {hi, hi};
    return s;
}

ConvexSetSpec simplex2() {
    // { x >= 0, y >= 0, x + y <= 1 }
    ConvexSetSpec s;
    s.kind = SetKind::polytope;
    s.dim = 2;
    s.normals = Matrix(3, 2);
    s.normals(0, 0) = -1.0;
    s.normals(1, 1) = -1.0;
    const double r = std::sqrt(0.5);
    s.normals(2, 0) = r;
    s.normals(2, 1) = r;
    s.offsets = {0.0, 0.0, r};
    return s;
}

Vec unit2(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

TEST_CASE("support_function: closed forms per kind") {
    auto rng = make_rng(83, 1);
    std::uniform_real_distribution<double> unit(0.0, 2.0 * std::numbers::pi);

    // unit ball at the origin: V = 1 in every unit direction
    const ConvexSetSpec ball = unit_ball(2);
    for (int i = 0; i < 50; ++i)
        CHECK(support_function(ball, unit2(unit(rng))) == doctest::Approx(1.0).epsilon(1e-12));

    // translated ball: V = v.c + r
    ConvexSetSpec moved = unit_ball(2, 0.5);
    moved.center = {0.3, -0.7};
    const Vec v = unit2(0.9);
    CHECK(support_function(moved, v) ==
          doctest::Approx(v[0] * 0.3 + v[1] * (-0.7) + 0.5).epsilon(1e-12));

    // box corner maximizer
    const Vec diag = {std::sqrt(0.5), std::sqrt(0.5)};
    CHECK(support_function(box2(-1.0, 1.0), diag) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // halfspace: finite along the normal, +inf elsewhere
    ConvexSetSpec half;
    half.kind = SetKind::halfspace;
    half.dim = 2;
    half.normal = {1.0, 0.0};
    half.offset = 0.75;
    CHECK(support_function(half, Vec{1.0, 0.0}) == doctest::Approx(0.75));
    CHECK(std::isinf(support_function(half, unit2(0.3))));

    CHECK_THROWS_AS(support_function(ball, Vec{2.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(support_function(ball, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("support_function: polytope vertex enumeration against explicit vertices") {
    const ConvexSetSpec tri = simplex2();
    const std::vector<Vec> vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    auto rng = make_rng(89, 1);
    std::uniform_real_distribution<double> unit(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 200; ++i) {
        const Vec v = unit2(unit(rng));
        double expected = -1e300;
        for (const auto& x : vertices) expected = std::max(expected, v[0] * x[0] + v[1] * x[1]);
        CHECK(support_function(tri, v) == doctest::Approx(expected).epsilon(1e-9));
    }

    // unbounded polytope: single halfplane x <= 1
    ConvexSetSpec open;
    open.kind = SetKind::polytope;
    open.dim = 2;
    open.normals = Matrix(1, 2);
    open.normals(0, 0) = 1.0;
    open.offsets = {1.0};
    CHECK(std::isinf(support_function(open, unit2(0.5))));
    CHECK(std::isinf(support_function(open, Vec{0.0, 1.0})));
    CHECK(std::isinf(support_function(open, Vec{-1.0, 0.0})));  // recession along -x
    CHECK(support_function(open, Vec{1.0, 0.0}) == doctest::Approx(1.0));

    // quadrant corner {x <= 1, y <= 1}: bounded only in the positive cone
    ConvexSetSpec corner;
    corner.kind = SetKind::polytope;
    corner.dim = 2;
    corner.normals = Matrix(2, 2);
    corner.normals(0, 0) = 1.0;
    corner.normals(1, 1) = 1.0;
    corner.offsets = {1.0, 1.0};
    CHECK(support_function(corner, unit2(std::numbers::pi / 4.0)) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::isinf(support_function(corner, unit2(std::numbers::pi))));

    // 3d simplex-like box via polytope
    ConvexSetSpec cube;
    cube.kind = SetKind::polytope;
    cube.dim = 3;
    cube.normals = Matrix(6, 3);
    cube.offsets = Vec(6, 1.0);
    for (int k = 0; k < 3; ++k) {
        cube.normals(2 * k, k) = 1.0;
        cube.normals(2 * k + 1, k) = -1.0;
    }
    const Vec d3 = {1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
    CHECK(support_function(cube, d3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("support_function: positive homogeneity and subadditivity (raw hook)") {
    auto rng = make_rng(97, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::vector<ConvexSetSpec> sets = {unit_ball(2, 0.8), box2(-0.5, 1.2), simplex2()};
    for (const auto& set : sets) {
        for (int i = 0; i < 1000; ++i) {
            Vec u = {gauss(rng), gauss(rng)};
            Vec w = {gauss(rng), gauss(rng)};
            const double c = 0.1 + 3.0 * std::abs(gauss(rng));
            Vec cu = {c * u[0], c * u[1]};
            CHECK(support_function_raw(set, cu) ==
                  doctest::Approx(c * support_function_raw(set, u)).epsilon(1e-9));
            Vec uw = {u[0] + w[0], u[1] + w[1]};
            CHECK(support_function_raw(set, uw) <=
                  support_function_raw(set, u) + support_function_raw(set, w) + 1e-9);
        }
    }
}

TEST_CASE("convex_probability: halfspace matches the normal CDF") {
    ConvexSetSpec half;
    half.kind = SetKind::halfspace;
    half.dim = 2;
    half.normal = {1.0, 0.0};
    half.offset = 0.5;
    const auto r = convex_probability(half, DistributionTag::standard_gaussian, 256, 0.05,
                                      ConvexMethod::gaussian, 20000, 11);
    CHECK(r.net_size == 1);
    CHECK(r.net_bias == 0.0);
    CHECK(std::abs(r.prob - norm_cdf(0.5)) <= 4.0 * r.se);

    // direct MC agrees (halfspace probability is exact at any n under gaussian data)
    const auto rmc = convex_probability(half, DistributionTag::standard_gaussian, 256, 0.05,
                                        ConvexMethod::direct_mc, 20000, 13);
    CHECK(std::abs(rmc.prob - norm_cdf(0.5)) <= 4.0 * rmc.se);
}

TEST_CASE("convex_probability: containment monotonicity and r -> infinity limit") {
    const auto small = convex_probability(unit_ball(2, 1.0), DistributionTag::standard_gaussian,
                                          256, 0.05, ConvexMethod::gaussian, 5000, 17);
    const auto large = convex_probability(unit_ball(2, 1.5), DistributionTag::standard_gaussian,
                                          256, 0.05, ConvexMethod::gaussian, 5000, 17);
    CHECK(small.prob <= large.prob + 3.0 * (small.se + large.se));
    CHECK(small.prob < large.prob);  // 0.39 vs 0.67, far beyond noise

    const auto whole = convex_probability(unit_ball(2, 40.0), DistributionTag::standard_gaussian,
                                          256, 0.05, ConvexMethod::gaussian, 2000, 19);
    CHECK(whole.prob == doctest::Approx(1.0));
}

TEST_CASE("convex_sup_stats: refining the net never lowers a sup, so prob never rises") {
    const ConvexSetSpec ball = unit_ball(2, 1.2);
    auto coarse = sphere_directions(2, 0.3, 101);
    auto refined = coarse;
    const auto extra = sphere_directions(2, 0.15, 202);
    refined.insert(refined.end(), extra.begin(), extra.end());

    for (ConvexMethod method :
         {ConvexMethod::gaussian, ConvexMethod::direct_mc, ConvexMethod::multiplier_bootstrap}) {
        const Vec a = convex_sup_stats(ball, coarse, DistributionTag::standard_gaussian, 64, method,
                                       500, 23);
        const Vec b = convex_sup_stats(ball, refined, DistributionTag::standard_gaussian, 64, method,
                                       500, 23);
        std::size_t le_a = 0, le_b = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(b[i] >= a[i] - 1e-12);
            if (a[i] <= 0.0) ++le_a;
            if (b[i] <= 0.0) ++le_b;
        }
        CHECK(le_b <= le_a);
    }
}

TEST_CASE("convex_probability: configuration errors") {
    // unbounded support directions on a non-halfspace set
    ConvexSetSpec open;
    open.kind = SetKind::polytope;
    open.dim = 2;
    open.normals = Matrix(1, 2);
    open.normals(0, 0) = 1.0;
    open.offsets = {1.0};
    CHECK_THROWS_AS(convex_probability(open, DistributionTag::standard_gaussian, 64, 0.3,
                                       ConvexMethod::gaussian, 100, 1),
                    config_error);

    ConvexSetSpec bad = unit_ball(2, -1.0);
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("sphere_directions: mesh and separation on the circle, p=3 cover sanity") {
    const auto net = sphere_directions(2, 0.2, 0);
    for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            CHECK(std::hypot(net[i][0] - net[j][0], net[i][1] - net[j][1]) >= 0.2 * (1.0 - 1e-9));

    const auto fib = sphere_directions(3, 0.3, 0);
    auto rng = make_rng(101, 4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 3000; ++i) {
        Vec v = {gauss(rng), gauss(rng), gauss(rng)};
        const double nn = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (auto& x : v) x /= nn;
        double best = 2.0;
        for (const auto& m : fib)
            best = std::min(best, std::hypot(std::hypot(v[0] - m[0], v[1] - m[1]), v[2] - m[2]));
        worst = std::max(worst, best);
    }
    CHECK(worst <= 0.3);
}
