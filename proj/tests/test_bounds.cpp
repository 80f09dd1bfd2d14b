#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "couplab/bounds.hpp"

using namespace couplab;

namespace {

ClassParams params(double v, double A, double b, double sigma, double q, long long n,
                   long long NB, double gamma) {
    ClassParams p;
    p.v = v;
    p.A_const = A;
    p.b = b;
    p.sigma = sigma;
    p.q = q;
    p.n = n;
    p.N_B_eta = NB;
    p.gamma = gamma;
    p.eta = 0.1;
    return p;
}

constexpr double kE = std::numbers::e;

}  // namespace

TEST_CASE("compute_Kn: direct evaluations and log N_B additivity") {
    CHECK(compute_Kn(params(1, kE, 1, 1, 4, 100, 1, 0.5)) ==
          doctest::Approx(4.605170185988092).epsilon(1e-12));
    CHECK(compute_Kn(params(2, kE, 2, 1, 4, 100, 1, 0.5)) ==
          doctest::Approx(9.210340371976184).epsilon(1e-12));
    // adding drift states only shifts K_n by log N_B
    CHECK(compute_Kn(params(2, kE, 2, 1, 4, 100, 3, 0.5)) ==
          doctest::Approx(9.210340371976184 + std::log(3.0)).epsilon(1e-12));

    // small n: the log(Ab/sigma) branch takes over and K_n >= v log n still holds
    const ClassParams small = params(1.5, kE, 4, 0.5, 4, 2, 1, 0.5);
    CHECK(compute_Kn(small) == doctest::Approx(1.5 * std::log(kE * 8.0)));
    CHECK(compute_Kn(small) >= small.v * std::log(static_cast<double>(small.n)));

    // property: A >= e and b >= sigma force K_n >= v log n for any valid params
    auto rng = make_rng(111, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 500; ++rep) {
        ClassParams p = params(1.0 + 4.0 * unit(rng), kE * (1.0 + unit(rng)), 1.0, 1.0,
                               4.0 + 4.0 * unit(rng), 1 + static_cast<long long>(unit(rng) * 1e6),
                               1 + static_cast<long long>(unit(rng) * 20), 0.5);
        p.sigma = 0.1 + unit(rng);
        p.b = p.sigma * (1.0 + 3.0 * unit(rng));
        p.validate();
        CHECK(compute_Kn(p) >= p.v * std::log(static_cast<double>(p.n)) - 1e-12);
    }
}

TEST_CASE("ClassParams validation") {
    CHECK_NOTHROW(params(1, kE, 1, 1, 4, 10, 1, 0.5).validate());
    CHECK_THROWS_AS(params(0.5, kE, 1, 1, 4, 10, 1, 0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(1, 1.0, 1, 1, 4, 10, 1, 0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(1, kE, 0.5, 1, 4, 10, 1, 0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(1, kE, 1, 1, 3.5, 10, 1, 0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(1, kE, 1, 1, 4, 10, 1, 1.5).validate(), std::invalid_argument);
}

TEST_CASE("delta_rate: unit test hook and the bootstrap display arithmetic") {
    // all factors unity: K_n = 1, n = 1, b = sigma = gamma = 1 -> d1 = 2
    CHECK(delta_rate_value(1.0, 1.0, 1.0, 4.0, 1.0, 1, RateKind::d1) == doctest::Approx(2.0));

    // hand arithmetic: b = sigma = 1, gamma = 0.5, K_n = 4, n = 256, q = 4
    //   d2 = 2^{5/4} + 2^{3/4}
    CHECK(delta_rate_value(4.0, 1.0, 1.0, 4.0, 0.5, 256, RateKind::d2) ==
          doctest::Approx(4.060207060512871).epsilon(1e-10));

    // d3 = d2-style first and quarter terms plus the d1 sixth-root term
    const double d3 = delta_rate_value(4.0, 1.0, 1.0, 4.0, 0.5, 256, RateKind::d3);
    const double d2 = delta_rate_value(4.0, 1.0, 1.0, 4.0, 0.5, 256, RateKind::d2);
    const double sixth = std::cbrt(16.0) / (std::cbrt(0.5) * std::pow(256.0, 1.0 / 6.0));
    CHECK(d3 == doctest::Approx(d2 + sixth).epsilon(1e-12));
}

TEST_CASE("delta_rate: indicator-class reduction when sigma = b = 1") {
    // with F == 1 the display collapses to
    //   gamma^{-1/q} K_n n^{-1/2+1/q} + gamma^{-1/3} K_n^{2/3} n^{-1/6}
    for (long long n : {128LL, 1024LL, 65536LL}) {
        for (double gamma : {0.1, 0.5, 0.9}) {
            for (double q : {4.0, 6.0}) {
                ClassParams p = params(4, kE, 1, 1, q, n, 1, gamma);
                const double kn = compute_Kn(p);
                const double reduced =
                    std::pow(gamma, -1.0 / q) * kn * std::pow(static_cast<double>(n), -0.5 + 1.0 / q) +
                    std::pow(gamma, -1.0 / 3.0) * std::pow(kn, 2.0 / 3.0) *
                        std::pow(static_cast<double>(n), -1.0 / 6.0);
                CHECK(delta_rate(p, RateKind::d1).value == doctest::Approx(reduced).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("delta_rate: five frozen parameter sets to ten significant digits") {
    struct Case {
        ClassParams p;
        RateKind kind;
        double kn, value;
    };
    const std::vector<Case> cases = {
        {params(1.0, kE, 1.0, 1.0, 4.0, 100, 1, 0.5), RateKind::d1, 4.605170185988092,
         3.3505493858495017},
        {params(2.0, kE, 2.0, 1.0, 4.0, 1024, 1, 0.1), RateKind::d1, 13.862943611198906,
         13.649839732130381},
        {params(1.5, kE * kE, 3.0, 1.5, 6.0, 4096, 4, 0.25), RateKind::d2, 13.862943611198904,
         22.700544037559574},
        {params(4.0, kE, 1.0, 1.0, 4.0, 2048, 1, 0.1), RateKind::d3, 30.498475944637594,
         120.82852498673195},
        {params(1.0, kE, 1.0, 1.0, 8.0, 1000000, 2, 0.9), RateKind::d2, 14.508657738524219,
         0.35652100553860366},
    };
    for (const auto& c : cases) {
        CHECK(compute_Kn(c.p) == doctest::Approx(c.kn).epsilon(1e-10));
        CHECK(delta_rate(c.p, c.kind).value == doctest::Approx(c.value).epsilon(1e-10));
    }
}

TEST_CASE("delta_rate: strictly decreasing in n and side-condition flags") {
    for (RateKind kind : {RateKind::d1, RateKind::d2, RateKind::d3}) {
        double prev = 1e300;
        for (int e = 7; e <= 20; ++e) {
            ClassParams p = params(4, kE, 1, 1, 4, 1LL << e, 1, 0.1);
            const double val = delta_rate(p, kind).value;
            CHECK(val < prev);
            prev = val;
        }
    }
    // K_n <= n vs K_n^3 <= n
    ClassParams p = params(4, kE, 1, 1, 4, 2048, 1, 0.1);
    CHECK(delta_rate(p, RateKind::d2).side_condition_ok);
    CHECK_FALSE(delta_rate(p, RateKind::d1).side_condition_ok);
    CHECK_FALSE(delta_rate(p, RateKind::d3).side_condition_ok);
    ClassParams big = params(1, kE, 1, 1, 4, 1LL << 20, 1, 0.1);
    CHECK(delta_rate(big, RateKind::d1).side_condition_ok);
}

TEST_CASE("third_moment_terms: enumerated examples and delta monotonicity") {
    // all entries +-1 -> L_n = 1
    Matrix pm(4, 3);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) pm(i, j) = (i + j) % 2 == 0 ? 1.0 : -1.0;
    // delta sqrt(n)/log p > 1: indicator never fires
    const double delta_hi = 1.2 * std::log(3.0) / 2.0;
    const auto t1 = third_moment_terms(pm, delta_hi);
    CHECK(t1.L_n == doctest::Approx(1.0));
    CHECK(t1.M_nX == 0.0);

    // 2x2 matrix [[2,0],[0,-2]] with threshold exactly 1
    Matrix m2(2, 2);
    m2(0, 0) = 2.0;
    m2(1, 1) = -2.0;
    const double delta1 = std::log(2.0) / std::sqrt(2.0);
    const auto t2 = third_moment_terms(m2, delta1);
    CHECK(t2.threshold == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t2.L_n == doctest::Approx(4.0));
    CHECK(t2.M_nX == doctest::Approx(8.0));

    // M_nX is nonincreasing in delta, L_n does not depend on it
    auto rng = make_rng(61, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix r(50, 6);
    for (auto& x : r.data()) x = gauss(rng);
    double prev = 1e300;
    const double l0 = third_moment_terms(r, 0.05).L_n;
    for (double d : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        const auto t = third_moment_terms(r, d);
        CHECK(t.M_nX <= prev + 1e-15);
        CHECK(t.L_n == l0);
        prev = t.M_nX;
    }

    CHECK_THROWS_AS(third_moment_terms(Matrix(3, 1), 0.1), std::invalid_argument);
}

TEST_CASE("gaussian_tail_term: degenerate thresholds and MC against closed forms") {
    CovarianceModel one;
    one.mean = {0.0};
    one.cov = Matrix(1, 1, 1.0);
    one.factor = Matrix(1, 1, 1.0);

    // threshold infinity: indicator never fires
    CHECK(gaussian_tail_term(one, std::numeric_limits<double>::infinity(), 100, 10000, 3).value ==
          0.0);

    // threshold zero: E|N(0,1)|^3 = 2 sqrt(2/pi)
    const auto full = gaussian_tail_term(one, 0.0, 100, 200000, 5);
    CHECK(std::abs(full.value - 1.5957691216057308) <= 3.0 * full.se);

    // p = 2 independent standard normals, threshold 3, against a larger
    // independently coded MC oracle
    CovarianceModel two;
    two.mean = {0.0, 0.0};
    two.cov = Matrix(2, 2);
    two.cov(0, 0) = two.cov(1, 1) = 1.0;
    two.factor = two.cov;
    const long long n = 64;
    const double delta = 3.0 * std::log(2.0) / std::sqrt(64.0);  // threshold = 3
    const auto est = gaussian_tail_term(two, delta, n, 100000, 7);

    auto rng = make_rng(301, 9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sum = 0.0, sum2 = 0.0;
    const std::size_t oracle_n = 10'000'000;
    for (std::size_t i = 0; i < oracle_n; ++i) {
        const double a = std::abs(gauss(rng)), b = std::abs(gauss(rng));
        const double mx = std::max(a, b);
        const double term = mx > 3.0 ? mx * mx * mx : 0.0;
        sum += term;
        sum2 += term * term;
    }
    const double oracle = sum / static_cast<double>(oracle_n);
    const double oracle_se =
        std::sqrt((sum2 / oracle_n - oracle * oracle) / static_cast<double>(oracle_n));
    CHECK(std::abs(est.value - oracle) <= 3.0 * (est.se + oracle_se));
}

TEST_CASE("cov_discrepancy: exact scan") {
    Matrix a(3, 3), b(3, 3);
    CHECK(cov_discrepancy(a, b) == 0.0);
    b(0, 1) = 0.3;
    b(1, 0) = 0.3;
    CHECK(cov_discrepancy(a, b) == doctest::Approx(0.3));

    auto rng = make_rng(67, 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : a.data()) x = gauss(rng);
    for (auto& x : b.data()) x = gauss(rng);
    double brute = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) brute = std::max(brute, std::abs(a(i, j) - b(i, j)));
    CHECK(cov_discrepancy(a, b) == brute);

    CHECK_THROWS_AS(cov_discrepancy(Matrix(2, 2), Matrix(3, 3)), std::invalid_argument);
}

TEST_CASE("nazarov_density_bound: values and dominance of true concentration") {
    CHECK(nazarov_density_bound(1, 1.0, 0.1) == doctest::Approx(0.4).epsilon(1e-12));
    // p = 100, sigma_min = 2, eps = 0.05: (2 * 0.05 / 2)(sqrt(2 log 100) + 2)
    CHECK(nazarov_density_bound(100, 2.0, 0.05) ==
          doctest::Approx(0.2517427129385147).epsilon(1e-10));

    // one-dimensional truth: sup_t P(|X - t| <= 0.1) = Phi(0.1) - Phi(-0.1)
    const double truth = norm_cdf(0.1) - norm_cdf(-0.1);
    CHECK(truth == doctest::Approx(0.0797).epsilon(1e-3));
    CHECK(truth <= nazarov_density_bound(1, 1.0, 0.1));

    // random configurations: MC concentration stays below the bound
    for (int c = 0; c < 5; ++c) {
        const std::size_t p = 2 + 9 * c;
        const auto model = random_gaussian_model(p, 0.5, 2.0, 900 + c);
        const auto mc = gaussian_max_concentration(model, 0.05, 40000, 150, 700 + c);
        const double bound = nazarov_density_bound(p, min_coordinate_sigma(model), 0.05);
        CHECK(mc.value <= bound + 3.0 * mc.se);
    }
}

TEST_CASE("anticoncentration_bound: hand value, vanishing terms, monotonicity") {
    const Vec r6 = {6.0};
    CHECK(anticoncentration_bound(1.0, 0.1, 0.0, 1, 1e-6, r6) ==
          doctest::Approx(0.40002401522997977).epsilon(1e-9));

    // eps = phi = 0 and tiny delta: the exponential term dominates
    Vec grid;
    for (double r = 0.5; r <= 6.0; r += 0.5) grid.push_back(r);
    double best_exp = 1e300;
    for (double r : grid) best_exp = std::min(best_exp, std::exp(-r * r / 2.0));
    CHECK(anticoncentration_bound(1.0, 0.0, 0.0, 20, 1e-13, grid) ==
          doctest::Approx(best_exp).epsilon(1e-6));

    // monotone in eps
    double prev = 0.0;
    for (double eps : {0.01, 0.05, 0.1, 0.2}) {
        const double v = anticoncentration_bound(1.0, eps, 0.01, 50, 0.01, grid);
        CHECK(v >= prev);
        prev = v;
    }

    CHECK_THROWS_AS(anticoncentration_bound(1.0, 0.1, 0.0, 1, 1e-6, Vec{}), std::invalid_argument);
}
