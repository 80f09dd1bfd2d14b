#pragma once

#include "couplab/common.hpp"
#include "couplab/process_engine.hpp"

namespace couplab {

/// Law of the discretized Gaussian limit process on a net: drift vector,
/// covariance Cov(f_j(X), f_k(X)), and its (jittered) Cholesky factor.
struct CovarianceModel {
    Vec mean;       // drift B(f_j)
    Matrix cov;     // N x N symmetric
    Matrix factor;  // lower-triangular L with L L^T = cov + jitter I
    double jitter = 0.0;

    std::size_t dim() const { return mean.size(); }
};

struct CholeskyResult {
    Matrix factor;
    double jitter = 0.0;
};

/// Cholesky with an escalating diagonal jitter ladder
/// {0, 1e-12, 1e-10, ..., 1e-4} * trace/N. Success means the factor
/// reconstructs cov + jitter I within a Frobenius tolerance.
CholeskyResult psd_repair(const Matrix& cov);

enum class CovarianceMode { automatic, closed_form, reference_sample };

/// Entry (j,k) = P(f_j f_k) - Pf_j Pf_k, symmetrized exactly; factorized.
CovarianceModel estimate_covariance(const Net& net, const Population& pop,
                                    CovarianceMode mode = CovarianceMode::automatic);

/// True if every (member, population) moment needed by the covariance has a
/// closed form (linear classes under gaussian/uniform data; balls fully inside
/// the unit cube under uniform data, cross terms via disk-intersection areas).
bool covariance_closed_form_available(const Net& net, DistributionTag tag);

/// Z~ = max_j ( mean_j + (L w)_j ), w standard normal.
double sample_gaussian_sup(const CovarianceModel& model, std::mt19937_64& rng);
SupSample sample_gaussian_sup(const CovarianceModel& model, std::uint64_t seed);

/// Sorted sample of `reps` independent Z~ draws.
Vec gaussian_sup_sample(const CovarianceModel& model, std::size_t reps, std::uint64_t seed,
                        unsigned threads = 1);

/// Area of the intersection of two disks (used for exact indicator covariances).
double disk_intersection_area(double r1, double r2, double center_distance);

}  // namespace couplab
