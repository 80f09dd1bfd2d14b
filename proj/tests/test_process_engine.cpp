#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "couplab/process_engine.hpp"

using namespace couplab;

namespace {

FunctionClassSpec tabulated_class(std::vector<Vec> rows) {
    FunctionClassSpec cls;
    cls.kind = ClassKind::tabulated;
    cls.dim = 1;
    cls.tabulated_values = std::move(rows);
    return cls;
}

Net tabulated_net(std::vector<Vec> rows, Vec drift) {
    Net net;
    net.class_ref = tabulated_class(std::move(rows));
    for (std::size_t j = 0; j < net.class_ref.tabulated_values.size(); ++j)
        net.members.push_back({static_cast<double>(j)});
    net.drift = std::move(drift);
    net.epsilon = 0.0;
    return net;
}

Matrix index_points(std::size_t n) {
    Matrix pts(n, 1);
    for (std::size_t i = 0; i < n; ++i) pts(i, 0) = static_cast<double>(i);
    return pts;
}

}  // namespace

TEST_CASE("mean_vector: closed forms and reference fallbacks") {
    // ball covering the whole uniform support -> Pf = 1 (reference path)
    FunctionClassSpec cls;
    cls.kind = ClassKind::ball_indicators;
    cls.dim = 2;
    Net net;
    net.class_ref = cls;
    net.members = {{0.5, 0.5, 2.0}};
    net.drift = {0.0};
    Population pop;
    pop.tag = DistributionTag::uniform_cube;
    pop.dim = 2;
    pop.reference_size = 20000;
    CHECK(mean_vector(net, pop)[0] == 1.0);

    // linear member under standard gaussian -> 0 by symmetry (closed form)
    FunctionClassSpec lin;
    lin.kind = ClassKind::linear_sphere;
    lin.dim = 2;
    Net lnet;
    lnet.class_ref = lin;
    lnet.members = {{std::sqrt(0.5), std::sqrt(0.5)}};
    lnet.drift = {0.0};
    Population gpop;
    gpop.tag = DistributionTag::standard_gaussian;
    gpop.dim = 2;
    CHECK(mean_vector(lnet, gpop)[0] == 0.0);

    // interior ball: area formula, cross-checked by a large MC sample
    net.members = {{0.5, 0.5, 0.25}};
    const double exact = std::numbers::pi * 0.25 * 0.25;
    CHECK(mean_vector(net, pop)[0] == doctest::Approx(exact).epsilon(1e-12));

    const std::size_t mc_n = 10'000'000;
    const Matrix mc = draw_data(DistributionTag::uniform_cube, mc_n, 2, 99).points;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < mc_n; ++i) {
        const double dx = mc(i, 0) - 0.5, dy = mc(i, 1) - 0.5;
        if (dx * dx + dy * dy <= 0.0625) ++hits;
    }
    const double est = static_cast<double>(hits) / static_cast<double>(mc_n);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(mc_n));
    CHECK(std::abs(est - exact) <= 3.0 * se);
}

TEST_CASE("empirical_sup: single member formula and vanishing centered terms") {
    // N=1, drift 0: value = sqrt(n) (P_n f - Pf)
    Net net = tabulated_net({{1.0, 0.0, 1.0, 1.0}}, {0.0});
    const Matrix pts = index_points(4);
    PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, pts);
    const double z = empirical_sup(prep, {0.5}, 1).value;
    CHECK(z == doctest::Approx(std::sqrt(4.0) * (0.75 - 0.5)).epsilon(1e-15));

    // every f_j(X_i) equal to Pf_j exactly -> value = max drift
    Net cnet = tabulated_net({Vec(6, 0.3), Vec(6, -0.2)}, {0.25, 0.75});
    PreparedSample cprep = prepare_sample(cnet.class_ref, cnet.members, cnet.drift, index_points(6));
    CHECK(empirical_sup(cprep, {0.3, -0.2}, 1).value == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("empirical_sup: N=3, n=4 matches exhaustive enumeration") {
    const std::vector<Vec> rows = {{0.2, 1.4, -0.3, 0.9}, {1.0, 1.0, 1.0, 0.0}, {-2.0, 0.5, 0.25, 0.75}};
    const Vec drift = {0.1, -0.4, 0.05};
    const Vec means = {0.5, 0.6, -0.1};
    Net net = tabulated_net(rows, drift);
    PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, index_points(4));
    const double got = empirical_sup(prep, means, 1).value;

    double expected = -1e300;
    for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 4; ++i) s += rows[j][i] - means[j];
        expected = std::max(expected, drift[j] + s / 2.0);
    }
    CHECK(got == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("multiplier bootstrap: forced multipliers and constant members") {
    Net net = tabulated_net({{0.2, 1.4, -0.3}, {1.0, 0.5, 0.0}}, {0.15, -0.6});
    PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, index_points(3));

    // all multipliers zero -> process vanishes -> max drift
    CHECK(multiplier_sup_value(prep, Vec(3, 0.0)) == 0.15);

    // constant member: centered column is zero -> drift regardless of weights
    Net cnet = tabulated_net({Vec(3, 0.7)}, {0.4});
    PreparedSample cprep = prepare_sample(cnet.class_ref, cnet.members, cnet.drift, index_points(3));
    CHECK(multiplier_sup_value(cprep, Vec{1.3, -0.2, 5.0}) == doctest::Approx(0.4).epsilon(1e-12));

    // n=3, N=2 with explicit multipliers vs hand enumeration
    const Vec e = {0.5, -1.0, 2.0};
    double expected = -1e300;
    const std::vector<Vec>& rows = net.class_ref.tabulated_values;
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = (rows[j][0] + rows[j][1] + rows[j][2]) / 3.0;
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) s += e[i] * (rows[j][i] - mean);
        expected = std::max(expected, net.drift[j] + s / std::sqrt(3.0));
    }
    CHECK(multiplier_sup_value(prep, e) == doctest::Approx(expected).epsilon(1e-15));

    CHECK_THROWS_AS(multiplier_sup_value(prep, Vec(2, 0.0)), std::invalid_argument);
}

TEST_CASE("multinomial_weights: constraint, edge case, and moments") {
    CHECK(multinomial_weights(1, 9) == std::vector<std::uint32_t>{1});
    CHECK_THROWS_AS(multinomial_weights(0, 9), std::invalid_argument);

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto w = multinomial_weights(977, seed);
        std::size_t total = 0;
        for (auto c : w) total += c;
        CHECK(total == 977);
    }

    // Binomial(n, 1/n) marginals: mean 1, variance 1 - 1/n
    const std::size_t n = 10000, draws = 10000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto w = multinomial_weights(n, 1000 + d);
        const double x = w[0];
        s1 += x;
        s2 += x * x;
    }
    const double mean1 = s1 / draws;
    const double var1 = s2 / draws - mean1 * mean1;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto w = multinomial_weights(n, 1000 + d);
        const double c = w[0] - mean1;
        s4 += c * c * c * c;
    }
    const double se_mean = std::sqrt(var1 / draws);
    const double se_var = std::sqrt(std::max(0.0, s4 / draws - var1 * var1) / draws);
    CHECK(std::abs(mean1 - 1.0) <= 3.0 * se_mean);
    CHECK(std::abs(var1 - (1.0 - 1.0 / n)) <= 3.0 * se_var);
}

TEST_CASE("empirical bootstrap: forced weights and hand enumeration") {
    Net net = tabulated_net({{0.2, 1.4, -0.3}, {1.0, 0.5, 0.0}}, {0.15, -0.6});
    PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, index_points(3));

    // all weights one -> N_i - 1 = 0 -> max drift
    CHECK(empirical_bootstrap_sup_value(prep, std::vector<std::uint32_t>{1, 1, 1}) == 0.15);

    // constant members -> weight-sum constraint kills the sum
    Net cnet = tabulated_net({Vec(3, 0.7), Vec(3, -0.1)}, {0.05, 0.3});
    PreparedSample cprep = prepare_sample(cnet.class_ref, cnet.members, cnet.drift, index_points(3));
    CHECK(empirical_bootstrap_sup_value(cprep, std::vector<std::uint32_t>{3, 0, 0}) == 0.3);

    // n=3, N=2 vs direct formula max_j drift_j + sum_i (N_i - 1) f_j(X_i) / sqrt(n)
    const std::vector<std::uint32_t> w = {2, 0, 1};
    const std::vector<Vec>& rows = net.class_ref.tabulated_values;
    double expected = -1e300;
    for (std::size_t j = 0; j < 2; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            s += (static_cast<double>(w[i]) - 1.0) * rows[j][i];
        expected = std::max(expected, net.drift[j] + s / std::sqrt(3.0));
    }
    CHECK(empirical_bootstrap_sup_value(prep, w) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("bootstrap sups are invariant to shifting every member by a constant") {
    auto rng = make_rng(31, 8);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Vec> rows(3, Vec(10));
        std::vector<Vec> shifted(3, Vec(10));
        const double c = 5.0 * unit(rng);
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < 10; ++i) {
                rows[j][i] = unit(rng);
                shifted[j][i] = rows[j][i] + c;
            }
        const Vec drift = {unit(rng), unit(rng), unit(rng)};
        Net a = tabulated_net(rows, drift);
        Net b = tabulated_net(shifted, drift);
        PreparedSample pa = prepare_sample(a.class_ref, a.members, a.drift, index_points(10));
        PreparedSample pb = prepare_sample(b.class_ref, b.members, b.drift, index_points(10));

        Vec e(10);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& x : e) x = gauss(rng);
        CHECK(multiplier_sup_value(pa, e) == doctest::Approx(multiplier_sup_value(pb, e)).epsilon(1e-12));

        const auto w = multinomial_weights(10, 100 + rep);
        std::int64_t wsum = 0;
        for (auto cnt : w) wsum += cnt;
        CHECK(wsum == 10);  // weight conservation: sum (N_i - 1) = 0
        CHECK(empirical_bootstrap_sup_value(pa, w) ==
              doctest::Approx(empirical_bootstrap_sup_value(pb, w)).epsilon(1e-12));
    }
}

TEST_CASE("adding a net member never decreases any sup value") {
    auto rng = make_rng(37, 8);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Vec> rows(4, Vec(12));
    for (auto& r : rows)
        for (auto& x : r) x = unit(rng);
    const Vec drift = {0.1, -0.2, 0.0, 0.3};
    const Vec means = {0.0, 0.1, -0.1, 0.2};
    const Matrix pts = index_points(12);

    Vec e(12);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : e) x = gauss(rng);
    const auto w = multinomial_weights(12, 5);

    double prev_z = -1e300, prev_e = -1e300, prev_b = -1e300;
    for (std::size_t k = 1; k <= 4; ++k) {
        std::vector<Vec> sub(rows.begin(), rows.begin() + k);
        Net net = tabulated_net(sub, Vec(drift.begin(), drift.begin() + k));
        PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, pts);
        const double z = empirical_sup(prep, Vec(means.begin(), means.begin() + k), 1).value;
        const double ze = multiplier_sup_value(prep, e);
        const double zb = empirical_bootstrap_sup_value(prep, w);
        CHECK(z >= prev_z);
        CHECK(ze >= prev_e);
        CHECK(zb >= prev_b);
        prev_z = z;
        prev_e = ze;
        prev_b = zb;
    }
}

TEST_CASE("identical seeds give bitwise-identical sup samples") {
    FunctionClassSpec cls;
    cls.kind = ClassKind::ball_indicators;
    cls.dim = 2;
    Net net;
    net.class_ref = cls;
    net.members = {{0.4, 0.4, 0.2}, {0.6, 0.6, 0.3}};
    net.drift = {0.0, 0.1};

    const DataSample data = draw_data(DistributionTag::uniform_cube, 50, 2, 42);
    const DataSample data2 = draw_data(DistributionTag::uniform_cube, 50, 2, 42);
    CHECK(data.points.data() == data2.points.data());

    const SupSample a = multiplier_bootstrap_sup(data, net, 7);
    const SupSample b = multiplier_bootstrap_sup(data2, net, 7);
    CHECK(a.value == b.value);
    CHECK(a.conditioning_seed == data.seed);

    const SupSample c = empirical_bootstrap_sup(data, net, 11);
    const SupSample d = empirical_bootstrap_sup(data2, net, 11);
    CHECK(c.value == d.value);
}
