#pragma once

#include <optional>
#include <vector>

#include "couplab/bounds.hpp"
#include "couplab/gaussian_kernel.hpp"
#include "couplab/process_engine.hpp"

namespace couplab {

/// Exact sup-distance between the right-continuous step CDFs of two sorted
/// samples, evaluated over all jump points.
double kolmogorov_distance(const Vec& sorted1, const Vec& sorted2);

/// KS upper bound from a coupling P(|V - W| > r1) <= r2 and a Levy
/// concentration bound for W at radius r1: levy + r2.
double coupling_to_kolmogorov(double r1, double r2, double levy_concentration);

/// One Monte Carlo experiment: class + net + data + replication counts.
struct ExperimentConfig {
    FunctionClassSpec cls;
    DistributionTag data = DistributionTag::uniform_cube;
    DriftSpec drift;

    double net_epsilon = 0.1;
    NetOptions net;
    std::size_t probe_size = 10'000;
    std::size_t reference_size = 1'000'000;
    CovarianceMode cov_mode = CovarianceMode::automatic;

    std::vector<long long> n_grid;
    std::size_t reps_outer = 4000;
    std::size_t reps_inner = 4000;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    std::optional<ClassParams> rate_params;  // n is filled per grid point

    void validate() const;
};

struct ReportRow {
    long long n = 0;
    ProcessKind kind = ProcessKind::Z;
    double ks = 0.0;
    double mc_band = 0.0;
    double ks_median = std::numeric_limits<double>::quiet_NaN();  // conditional runs
    double ks_p90 = std::numeric_limits<double>::quiet_NaN();
    double K_n = std::numeric_limits<double>::quiet_NaN();
    double delta_n = std::numeric_limits<double>::quiet_NaN();
    bool side_ok = true;
    Vec sample_sorted;  // empirical CDF summary of the measured process
};

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct DistanceReport {
    std::vector<ReportRow> rows;
    std::optional<RegressionFit> fit;
    std::size_t net_size = 0;
    std::size_t probe_size = 0;  // e_P surrogate diagnostics
};

/// KS(Z, Z~) per n: one Z per independent data sample against the exact /
/// reference Gaussian model.
DistanceReport run_marginal_experiment(const ExperimentConfig& cfg);

enum class BootstrapKind { multiplier, empirical };

/// Per fixed data sample, the conditional bootstrap law against the
/// unconditional Z~ reference; reports the per-sample KS distribution.
DistanceReport run_conditional_experiment(const ExperimentConfig& cfg, BootstrapKind kind);

struct ComparisonResult {
    double ks = 0.0;
    double delta = 0.0;         // max entrywise covariance discrepancy
    double scaled_ratio = 0.0;  // KS / sqrt(delta log p), the fitted-constant diagnostic
    double mc_band = 0.0;
};

ComparisonResult run_comparison_experiment(const Matrix& covX, const Matrix& covY, const Vec& mean,
                                           std::size_t reps, std::uint64_t seed,
                                           unsigned threads = 1);

/// Least-squares fit of log KS against log n over the report rows.
RegressionFit rate_regression(const DistanceReport& report);
RegressionFit fit_loglog(const std::vector<double>& n_values, const std::vector<double>& ks_values);

}  // namespace couplab
