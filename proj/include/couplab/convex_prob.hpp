#pragma once

#include <span>
#include <string>

#include "couplab/common.hpp"
#include "couplab/process_engine.hpp"

namespace couplab {

enum class SetKind { ball, box, halfspace, polytope };

std::string to_string(SetKind kind);
SetKind set_kind_from_string(const std::string& name);

/// Closed convex set in R^p.
struct ConvexSetSpec {
    SetKind kind = SetKind::ball;
    int dim = 2;
    Vec center;      // ball
    double radius = 1.0;
    Vec lo, hi;      // box
    Vec normal;      // halfspace { x : normal . x <= offset }, |normal| = 1
    double offset = 0.0;
    Matrix normals;  // polytope { x : normals.row(k) . x <= offsets[k] }, unit rows
    Vec offsets;

    void validate() const;
};

/// Support value V_A(v) = sup_{x in A} v.x for a unit direction v; +inf for
/// unbounded directions (flagged by the caller). Polytopes (dim <= 3) go
/// through vertex enumeration with recession-ray detection.
double support_function(const ConvexSetSpec& set, std::span<const double> v);

/// Same formula without the unit-norm precondition (test hook for the
/// homogeneity / subadditivity properties).
double support_function_raw(const ConvexSetSpec& set, std::span<const double> v);

enum class ConvexMethod { direct_mc, gaussian, multiplier_bootstrap };

std::string to_string(ConvexMethod m);
ConvexMethod convex_method_from_string(const std::string& name);

struct ConvexProbResult {
    double prob = 0.0;
    double se = 0.0;
    double net_bias = 0.0;  // spread between the requested and a refined net
    std::size_t net_size = 0;
};

/// P( n^{-1/2} sum X_i in A ) via the support-function representation over a
/// sphere net with drift B(v) = sqrt(n) v.mu - V_A(v).
ConvexProbResult convex_probability(const ConvexSetSpec& set, DistributionTag data, long long n,
                                    double sphere_net_eps, ConvexMethod method, std::size_t reps,
                                    std::uint64_t seed, unsigned threads = 1);

/// Per-replication sup statistics over an explicit direction net (shared
/// randomness across calls with the same seed; used for refinement checks).
Vec convex_sup_stats(const ConvexSetSpec& set, const std::vector<Vec>& directions,
                     DistributionTag data, long long n, ConvexMethod method, std::size_t reps,
                     std::uint64_t seed, unsigned threads = 1);

}  // namespace couplab
