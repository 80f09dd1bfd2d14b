#pragma once

#include <span>
#include <string>

#include "couplab/common.hpp"
#include "couplab/gaussian_kernel.hpp"

namespace couplab {

/// VC-type class constants and scenario parameters for the rate displays.
struct ClassParams {
    double v = 1.0;        // VC exponent, >= 1
    double A_const = 0.0;  // VC scale, >= e (0 means "use e")
    double b = 1.0;        // envelope norm bound, b >= sigma
    double sigma = 1.0;    // uniform variance bound, > 0
    double q = 4.0;        // envelope moment order, in [4, inf)
    long long n = 1;       // sample size
    long long N_B_eta = 1; // drift covering count N_B(eta)
    double eta = 0.1;      // drift discretization tolerance
    double gamma = 0.1;    // coupling probability budget, in (0, 1)

    /// Throws std::invalid_argument on any violated assumption.
    void validate() const;
};

/// K_n = log N_B(eta) + v (log n OR log(A b / sigma)), whichever is larger.
double compute_Kn(const ClassParams& p);

enum class RateKind { d1, d2, d3 };

RateKind rate_kind_from_string(const std::string& name);

struct RateResult {
    double value = 0.0;
    bool side_condition_ok = true;  // K_n^3 <= n (d1, d3), K_n <= n (d2)
};

RateResult delta_rate(const ClassParams& p, RateKind which);

/// The rate display evaluated at an explicit K_n (test hook; no validation).
double delta_rate_value(double Kn, double b, double sigma, double q, double gamma, long long n,
                        RateKind which);

struct ThirdMomentTerms {
    double L_n = 0.0;   // max_j mean_i |X~_ij|^3
    double M_nX = 0.0;  // mean_i max_j |X~_ij|^3 1{ max_j |X~_ij| > delta sqrt(n)/log p }
    double threshold = 0.0;
};

/// Plug-in third-moment terms for an n x p matrix of centered entries.
ThirdMomentTerms third_moment_terms(const Matrix& centered, double delta);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
};

/// Monte Carlo estimate of M_{n,Y}(delta) = E[max_j |Y~_j|^3 1{max_j |Y~_j| > delta sqrt(n)/log p}]
/// with Y~ the centered Gaussian vector of the model.
McEstimate gaussian_tail_term(const CovarianceModel& model, double delta, long long n,
                              std::size_t mc_draws, std::uint64_t seed);

/// Delta = max_{j,k} |covX_{jk} - covY_{jk}|.
double cov_discrepancy(const Matrix& covX, const Matrix& covY);

/// (2 eps / sigma_min) (sqrt(2 log p) + 2): density-style concentration bound
/// for the maximum of p Gaussian coordinates with stddevs >= sigma_min.
double nazarov_density_bound(std::size_t p, double underline_sigma, double epsilon);

/// min over r in r_grid of
///   2 (1/sigma_min)(eps + phi_delta + r delta)(sqrt(2 log cover_N) + 2) + exp(-r^2/2).
/// The caller supplies (delta, phi_delta, cover_N) per candidate delta and
/// takes the outer minimum.
double anticoncentration_bound(double underline_sigma, double epsilon, double phi_delta,
                               std::size_t cover_N, double delta, std::span<const double> r_grid);

/// MC estimate of sup_t P(|max_j X_j - t| <= epsilon) for the Gaussian vector
/// of the model, scanned over a t grid between the 1st and 99th percentiles.
McEstimate gaussian_max_concentration(const CovarianceModel& model, double epsilon,
                                      std::size_t draws, std::size_t t_grid,
                                      std::uint64_t seed);

/// Random non-centered Gaussian configuration with coordinate stddevs drawn
/// from [sigma_lo, sigma_hi] and a dense random correlation structure.
CovarianceModel random_gaussian_model(std::size_t p, double sigma_lo, double sigma_hi,
                                      std::uint64_t seed);

/// Smallest coordinate stddev of the model.
double min_coordinate_sigma(const CovarianceModel& model);

}  // namespace couplab
