#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "couplab/common.hpp"

namespace couplab {

enum class ClassKind {
    ball_indicators,       // f(x) = 1{ |x - c| <= r }, params [c_0..c_{d-1}, r]
    halfspace_indicators,  // f(x) = 1{ w.x <= t },     params [w_0..w_{d-1}, t], |w| = 1
    linear_sphere,         // f(x) = v.x,               params [v_0..v_{d-1}],   |v| = 1
    tabulated,             // test hook: f_j(x) = table[j][round(x_0)]
};

std::string to_string(ClassKind kind);
ClassKind class_kind_from_string(const std::string& name);

/// A parametric family of real functions on a subset of R^d with an envelope.
struct FunctionClassSpec {
    ClassKind kind = ClassKind::ball_indicators;
    int dim = 2;

    // candidate-pool geometry for ball/halfspace classes
    Vec center_lo;               // per-dimension lower bound for centers (default: data hull)
    Vec center_hi;               // per-dimension upper bound
    double radius_min = 0.05;
    double radius_max = 0.25;
    bool balls_inside_domain = true;  // restrict centers so balls stay inside [lo,hi]^d
    double offset_min = -1.0;         // halfspace offsets
    double offset_max = 1.0;

    // tabulated test classes: values[j][i] = f_j evaluated at point index i
    std::vector<Vec> tabulated_values;

    std::size_t member_param_count() const;
    /// Pointwise envelope F(x) >= sup_f |f(x)|.
    double envelope(std::span<const double> x) const;
};

double evaluate(const FunctionClassSpec& cls, std::span<const double> member_params,
                std::span<const double> x);

/// Deterministic drift functional B attached to a class.
struct DriftSpec {
    enum class Kind { zero, tabulated, parametric };
    Kind kind = Kind::zero;
    double eta = 0.1;
    Vec values;  // tabulated: aligned with the candidate pool / member list
    std::function<double(std::span<const double>)> fn;  // parametric: member params -> B(f)

    double value_for(std::size_t pool_index, std::span<const double> member_params) const;
};

enum class NetStop { mesh_reached, pool_exhausted, size_cap };

/// Finite discretization of a class: members plus drift values.
struct Net {
    std::vector<Vec> members;
    Vec drift;
    double epsilon = 0.0;
    FunctionClassSpec class_ref;
    NetStop stop = NetStop::mesh_reached;

    std::size_t size() const { return members.size(); }
};

/// Pairwise distances in the probe-estimated e_P metric for a candidate pool.
/// For indicator classes this uses bit-packed probe evaluations.
class ProbeMetric {
  public:
    ProbeMetric(const FunctionClassSpec& cls, const std::vector<Vec>& pool, const Matrix& probe);

    double distance(std::size_t i, std::size_t j) const;
    std::size_t pool_size() const { return count_; }
    /// || F ||_{probe,2}: root mean square of the envelope over the probe.
    double envelope_norm() const { return envelope_norm_; }

  private:
    std::size_t count_ = 0;
    std::size_t probe_n_ = 0;
    bool binary_ = false;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;  // binary_: pool-major bit rows
    Matrix values_;                    // otherwise: pool x probe doubles
    double envelope_norm_ = 1.0;
};

struct NetOptions {
    std::size_t pool_size = 1000;
    std::size_t max_members = 0;  // 0 = uncapped
};

/// Greedy farthest-point net over a seeded candidate pool; members end up
/// pairwise >= epsilon apart in the probe-estimated metric. linear_sphere
/// classes get a deterministic angular / Fibonacci lattice instead.
Net build_net(const FunctionClassSpec& cls, double epsilon, const Matrix& metric_probe,
              const DriftSpec& drift, std::uint64_t rng_seed, const NetOptions& opts = {});

/// Size of a greedy (epsilon * ||F||)-net of the candidate pool; monotone
/// nonincreasing in epsilon for a fixed seed and pool.
std::size_t covering_number_estimate(const FunctionClassSpec& cls, double epsilon,
                                     const Matrix& metric_probe, std::uint64_t rng_seed,
                                     std::size_t pool_size = 1000);

/// Greedy upper estimate of N_B(eta): eta-cover of the drift values.
std::size_t drift_count(const DriftSpec& drift, const std::vector<Vec>& members);

/// Seeded candidate pool for a class (net construction and covering estimates).
std::vector<Vec> candidate_pool(const FunctionClassSpec& cls, std::size_t pool_size,
                                std::uint64_t rng_seed);

/// Deterministic unit-sphere net with chord mesh <= epsilon and pairwise chord
/// separation >= epsilon for p = 2; Fibonacci lattice for p = 3, seeded random
/// directions above.
std::vector<Vec> sphere_directions(int p, double epsilon, std::uint64_t seed);

}  // namespace couplab
