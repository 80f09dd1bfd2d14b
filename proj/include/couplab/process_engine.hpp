#pragma once

#include <optional>
#include <span>
#include <string>

#include "couplab/common.hpp"
#include "couplab/function_class.hpp"

namespace couplab {

enum class DistributionTag { uniform_cube, standard_gaussian, custom_tabulated };

std::string to_string(DistributionTag tag);
DistributionTag distribution_from_string(const std::string& name);

/// One i.i.d. sample X_1..X_n (rows) from the tagged distribution.
struct DataSample {
    Matrix points;  // n x d
    DistributionTag tag = DistributionTag::uniform_cube;
    std::uint64_t seed = 0;

    std::size_t n() const { return points.rows(); }
};

DataSample draw_data(DistributionTag tag, std::size_t n, int dim, std::uint64_t seed);

enum class ProcessKind { Z, Ze, Zstar, Ztilde };

std::string to_string(ProcessKind kind);

/// One draw of a supremum statistic, tagged with its process kind.
struct SupSample {
    double value = 0.0;
    ProcessKind kind = ProcessKind::Z;
    std::optional<std::uint64_t> conditioning_seed;  // set for Ze / Zstar
    std::uint64_t weight_seed = 0;
};

/// How Pf and Cov(f, g) are resolved: closed form where available, otherwise
/// a one-time reference sample of `reference_size` points.
struct Population {
    DistributionTag tag = DistributionTag::uniform_cube;
    int dim = 2;
    std::size_t reference_size = 1'000'000;
    std::uint64_t reference_seed = 0x5eedULL;
    Matrix custom_reference;  // used as-is when tag == custom_tabulated
};

Matrix draw_population_reference(const Population& pop);

/// Pf_j per net member within the estimator tolerance of the population rules.
Vec mean_vector(const Net& net, const Population& pop);

/// Closed-form Pf for one member, when the (class kind, distribution) pair has one.
std::optional<double> closed_form_mean(const FunctionClassSpec& cls,
                                       std::span<const double> member_params,
                                       DistributionTag tag);

/// N x n matrix of f_j(X_i).
Matrix function_values(const FunctionClassSpec& cls, const std::vector<Vec>& members,
                       const Matrix& points);

/// Function-value matrix prepared once per data sample and reused across
/// bootstrap replications: rows centered by the empirical mean P_n f_j.
struct PreparedSample {
    Matrix centered;  // N x n: f_j(X_i) - P_n f_j
    Vec row_sums;     // sum_i f_j(X_i)
    Vec row_means;    // P_n f_j
    Vec drift;        // B(f_j)
    std::size_t n = 0;
};

PreparedSample prepare_sample(const FunctionClassSpec& cls, const std::vector<Vec>& members,
                              const Vec& drift, const Matrix& points);

/// Z = max_j ( B(f_j) + n^{-1/2} sum_i (f_j(X_i) - Pf_j) ).
SupSample empirical_sup(const PreparedSample& prep, const Vec& means, std::uint64_t data_seed);
SupSample empirical_sup(const DataSample& data, const Net& net, const Vec& means);

/// Z^e = max_j ( B(f_j) + n^{-1/2} sum_i e_i (f_j(X_i) - P_n f_j) ) with the
/// multipliers supplied explicitly (test hook) or drawn i.i.d. N(0,1).
double multiplier_sup_value(const PreparedSample& prep, std::span<const double> multipliers);
SupSample multiplier_bootstrap_sup(const PreparedSample& prep, std::uint64_t multiplier_seed,
                                   std::optional<std::uint64_t> conditioning_seed = std::nullopt);
SupSample multiplier_bootstrap_sup(const DataSample& data, const Net& net,
                                   std::uint64_t multiplier_seed);

/// Multinomial(n; 1/n,...,1/n) counts via n i.i.d. uniform cell assignments.
std::vector<std::uint32_t> multinomial_weights(std::size_t n, std::uint64_t seed);

/// Z^* = max_j ( B(f_j) + n^{-1/2} sum_i (N_i - 1) f_j(X_i) ).
double empirical_bootstrap_sup_value(const PreparedSample& prep,
                                     std::span<const std::uint32_t> weights);
SupSample empirical_bootstrap_sup(const PreparedSample& prep, std::uint64_t weight_seed,
                                  std::optional<std::uint64_t> conditioning_seed = std::nullopt);
SupSample empirical_bootstrap_sup(const DataSample& data, const Net& net,
                                  std::uint64_t weight_seed);

}  // namespace couplab
