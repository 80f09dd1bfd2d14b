#include "couplab/coupling_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace couplab {

double kolmogorov_distance(const Vec& a, const Vec& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("kolmogorov_distance: empty sample");
    if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
        throw std::invalid_argument("kolmogorov_distance: inputs must be sorted");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

double coupling_to_kolmogorov(double r1, double r2, double levy_concentration) {
    if (r1 < 0.0 || r2 < 0.0 || r2 > 1.0 || levy_concentration < 0.0 || levy_concentration > 1.0)
        throw std::invalid_argument("coupling_to_kolmogorov: r2 and levy must lie in [0,1], r1 >= 0");
    return levy_concentration + r2;
}

void ExperimentConfig::validate() const {
    if (n_grid.empty()) throw config_error("experiment: n_grid must be nonempty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1) throw config_error("experiment: sample sizes must be >= 1");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw config_error("experiment: n_grid must be strictly increasing");
    }
    if (reps_outer < 1 || reps_inner < 1) throw config_error("experiment: reps must be >= 1");
    if (probe_size < 1) throw config_error("experiment: probe_size must be >= 1");
    if (net_epsilon <= 0.0) throw config_error("experiment: net epsilon must be positive");
}

namespace {

struct NetContext {
    Net net;
    Population pop;
    Vec means;
    CovarianceModel model;
};

NetContext build_context(const ExperimentConfig& cfg) {
    NetContext ctx;
    ctx.pop.tag = cfg.data;
    ctx.pop.dim = cfg.cls.dim;
    ctx.pop.reference_size = cfg.reference_size;
    ctx.pop.reference_seed = mix_seed(cfg.seed, 0x726566ULL);  // "ref"
    Matrix probe;
    if (cfg.cls.kind != ClassKind::linear_sphere) {
        probe = draw_data(cfg.data, cfg.probe_size, cfg.cls.dim,
                          mix_seed(cfg.seed, 0x70726f6265ULL))  // "probe"
                    .points;
    }
    ctx.net = build_net(cfg.cls, cfg.net_epsilon, probe, cfg.drift,
                        mix_seed(cfg.seed, 0x6e6574ULL), cfg.net);  // "net"
    if (ctx.net.size() == 0) throw numerical_error("experiment: net construction produced no members");
    ctx.means = mean_vector(ctx.net, ctx.pop);
    ctx.model = estimate_covariance(ctx.net, ctx.pop, cfg.cov_mode);
    return ctx;
}

void attach_rates(ReportRow& row, const ExperimentConfig& cfg, RateKind which) {
    if (!cfg.rate_params) return;
    ClassParams p = *cfg.rate_params;
    p.n = row.n;
    row.K_n = compute_Kn(p);
    const RateResult r = delta_rate(p, which);
    row.delta_n = r.value;
    row.side_ok = r.side_condition_ok;
}

void attach_fit(DistanceReport& report) {
    std::vector<double> ns, ks;
    for (const auto& row : report.rows) {
        if (row.ks > 0.0) {
            ns.push_back(static_cast<double>(row.n));
            ks.push_back(row.ks);
        }
    }
    if (ns.size() >= 3) report.fit = fit_loglog(ns, ks);
}

}  // namespace

DistanceReport run_marginal_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    NetContext ctx = build_context(cfg);

    DistanceReport report;
    report.net_size = ctx.net.size();
    report.probe_size = cfg.probe_size;

    const Vec ref_sorted = gaussian_sup_sample(
        ctx.model, cfg.reps_inner, mix_seed(cfg.seed, 0x7a74696cULL), cfg.threads);  // "ztil"

    for (long long n : cfg.n_grid) {
        Vec zs(cfg.reps_outer);
        parallel_for(cfg.reps_outer, cfg.threads, [&](std::size_t rep) {
            const std::uint64_t data_seed =
                mix_seed(cfg.seed, 0x5a400000ULL + static_cast<std::uint64_t>(n), rep);
            DataSample data = draw_data(cfg.data, static_cast<std::size_t>(n), cfg.cls.dim, data_seed);
            PreparedSample prep =
                prepare_sample(ctx.net.class_ref, ctx.net.members, ctx.net.drift, data.points);
            zs[rep] = empirical_sup(prep, ctx.means, data_seed).value;
        });
        std::sort(zs.begin(), zs.end());

        ReportRow row;
        row.n = n;
        row.kind = ProcessKind::Z;
        row.ks = kolmogorov_distance(zs, ref_sorted);
        row.mc_band = ks_band(cfg.reps_outer, cfg.reps_inner);
        row.sample_sorted = std::move(zs);
        attach_rates(row, cfg, RateKind::d1);
        report.rows.push_back(std::move(row));
    }
    attach_fit(report);
    return report;
}

DistanceReport run_conditional_experiment(const ExperimentConfig& cfg, BootstrapKind kind) {
    cfg.validate();
    NetContext ctx = build_context(cfg);

    DistanceReport report;
    report.net_size = ctx.net.size();
    report.probe_size = cfg.probe_size;

    const Vec ref_sorted = gaussian_sup_sample(
        ctx.model, cfg.reps_inner, mix_seed(cfg.seed, 0x7a74696cULL), cfg.threads);

    const ProcessKind process = kind == BootstrapKind::multiplier ? ProcessKind::Ze : ProcessKind::Zstar;

    for (long long n : cfg.n_grid) {
        Vec per_sample_ks(cfg.reps_outer);
        Vec first_sample;
        for (std::size_t outer = 0; outer < cfg.reps_outer; ++outer) {
            const std::uint64_t data_seed =
                mix_seed(cfg.seed, 0xC0400000ULL + static_cast<std::uint64_t>(n), outer);
            DataSample data = draw_data(cfg.data, static_cast<std::size_t>(n), cfg.cls.dim, data_seed);
            PreparedSample prep =
                prepare_sample(ctx.net.class_ref, ctx.net.members, ctx.net.drift, data.points);

            Vec draws(cfg.reps_inner);
            parallel_for(cfg.reps_inner, cfg.threads, [&](std::size_t rep) {
                const std::uint64_t wseed = mix_seed(data_seed, 0x77656967ULL, rep);  // "weig"
                draws[rep] = kind == BootstrapKind::multiplier
                                 ? multiplier_bootstrap_sup(prep, wseed, data_seed).value
                                 : empirical_bootstrap_sup(prep, wseed, data_seed).value;
            });
            std::sort(draws.begin(), draws.end());
            per_sample_ks[outer] = kolmogorov_distance(draws, ref_sorted);
            if (outer == 0) first_sample = std::move(draws);
        }
        Vec ks_sorted = per_sample_ks;
        std::sort(ks_sorted.begin(), ks_sorted.end());

        ReportRow row;
        row.n = n;
        row.kind = process;
        row.ks_median = quantile_sorted(ks_sorted, 0.5);
        row.ks_p90 = quantile_sorted(ks_sorted, 0.9);
        row.ks = row.ks_median;
        row.mc_band = ks_band(cfg.reps_inner, cfg.reps_inner);
        row.sample_sorted = std::move(first_sample);
        attach_rates(row, cfg, kind == BootstrapKind::multiplier ? RateKind::d2 : RateKind::d3);
        report.rows.push_back(std::move(row));
    }
    attach_fit(report);
    return report;
}

ComparisonResult run_comparison_experiment(const Matrix& covX, const Matrix& covY, const Vec& mean,
                                           std::size_t reps, std::uint64_t seed, unsigned threads) {
    if (covX.rows() != covY.rows() || covX.rows() != mean.size())
        throw std::invalid_argument("run_comparison_experiment: shape mismatch");
    if (reps < 2) throw std::invalid_argument("run_comparison_experiment: reps must be >= 2");

    CovarianceModel mx, my;
    mx.mean = mean;
    mx.cov = covX;
    auto cx = psd_repair(covX);
    mx.factor = std::move(cx.factor);
    mx.jitter = cx.jitter;
    my.mean = mean;
    my.cov = covY;
    auto cy = psd_repair(covY);
    my.factor = std::move(cy.factor);
    my.jitter = cy.jitter;

    const Vec sx = gaussian_sup_sample(mx, reps, mix_seed(seed, 0x636d7058ULL), threads);  // "cmpX"
    const Vec sy = gaussian_sup_sample(my, reps, mix_seed(seed, 0x636d7059ULL), threads);  // "cmpY"

    ComparisonResult out;
    out.ks = kolmogorov_distance(sx, sy);
    out.delta = cov_discrepancy(covX, covY);
    const double p = static_cast<double>(mean.size());
    out.scaled_ratio = out.delta > 0.0 && p >= 2.0
                           ? out.ks / std::sqrt(out.delta * std::log(p))
                           : std::numeric_limits<double>::quiet_NaN();
    out.mc_band = ks_band(reps, reps);
    return out;
}

RegressionFit fit_loglog(const std::vector<double>& n_values, const std::vector<double>& ks_values) {
    if (n_values.size() != ks_values.size() || n_values.size() < 3)
        throw std::invalid_argument("fit_loglog: need at least three (n, ks) pairs");
    const std::size_t m = n_values.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(n_values[i] > 0.0) || !(ks_values[i] > 0.0))
            throw std::invalid_argument("fit_loglog: values must be positive");
        const double x = std::log(n_values[i]);
        const double y = std::log(ks_values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double md = static_cast<double>(m);
    const double denom = md * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_loglog: degenerate n grid");
    RegressionFit fit;
    fit.slope = (md * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / md;
    const double ss_tot = syy - sy * sy / md;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double y = std::log(ks_values[i]);
        const double pred = fit.intercept + fit.slope * std::log(n_values[i]);
        ss_res += (y - pred) * (y - pred);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

RegressionFit rate_regression(const DistanceReport& report) {
    std::vector<double> ns, ks;
    for (const auto& row : report.rows) {
        if (row.ks > 0.0) {
            ns.push_back(static_cast<double>(row.n));
            ks.push_back(row.ks);
        }
    }
    return fit_loglog(ns, ks);
}

}  // namespace couplab
