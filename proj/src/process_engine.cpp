#include "couplab/process_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace couplab {

std::string to_string(DistributionTag tag) {
    switch (tag) {
        case DistributionTag::uniform_cube: return "uniform_cube";
        case DistributionTag::standard_gaussian: return "standard_gaussian";
        case DistributionTag::custom_tabulated: return "custom_tabulated";
    }
    return "unknown";
}

DistributionTag distribution_from_string(const std::string& name) {
    if (name == "uniform_cube") return DistributionTag::uniform_cube;
    if (name == "standard_gaussian") return DistributionTag::standard_gaussian;
    if (name == "custom_tabulated") return DistributionTag::custom_tabulated;
    throw config_error("unknown distribution: " + name);
}

std::string to_string(ProcessKind kind) {
    switch (kind) {
        case ProcessKind::Z: return "Z";
        case ProcessKind::Ze: return "Ze";
        case ProcessKind::Zstar: return "Zstar";
        case ProcessKind::Ztilde: return "Ztilde";
    }
    return "unknown";
}

DataSample draw_data(DistributionTag tag, std::size_t n, int dim, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("draw_data: n must be >= 1");
    DataSample out;
    out.tag = tag;
    out.seed = seed;
    out.points = Matrix(n, dim);
    auto rng = make_rng(seed, 0x64617461ULL);  // "data"
    if (tag == DistributionTag::uniform_cube) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (int k = 0; k < dim; ++k) out.points(i, k) = unit(rng);
    } else if (tag == DistributionTag::standard_gaussian) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (int k = 0; k < dim; ++k) out.points(i, k) = gauss(rng);
    } else {
        throw config_error("draw_data: custom_tabulated data must be supplied, not drawn");
    }
    return out;
}

Matrix draw_population_reference(const Population& pop) {
    if (pop.tag == DistributionTag::custom_tabulated) {
        if (pop.custom_reference.rows() == 0)
            throw config_error("population: custom_tabulated without a reference table");
        return pop.custom_reference;
    }
    return draw_data(pop.tag, pop.reference_size, pop.dim, pop.reference_seed).points;
}

namespace {

double ball_volume(int d, double r) {
    // pi^{d/2} r^d / Gamma(d/2 + 1)
    return std::pow(std::numbers::pi, d / 2.0) * std::pow(r, d) / std::tgamma(d / 2.0 + 1.0);
}

bool ball_inside_unit_cube(std::span<const double> params, int d) {
    const double r = params[d];
    for (int k = 0; k < d; ++k)
        if (params[k] - r < 0.0 || params[k] + r > 1.0) return false;
    return true;
}

}  // namespace

std::optional<double> closed_form_mean(const FunctionClassSpec& cls,
                                       std::span<const double> member_params,
                                       DistributionTag tag) {
    switch (cls.kind) {
        case ClassKind::ball_indicators:
            if (tag == DistributionTag::uniform_cube && ball_inside_unit_cube(member_params, cls.dim))
                return ball_volume(cls.dim, member_params[cls.dim]);
            return std::nullopt;
        case ClassKind::halfspace_indicators:
            if (tag == DistributionTag::standard_gaussian)
                return norm_cdf(member_params[cls.dim]);  // |w| = 1
            return std::nullopt;
        case ClassKind::linear_sphere:
            if (tag == DistributionTag::standard_gaussian) return 0.0;
            if (tag == DistributionTag::uniform_cube) {
                double s = 0.0;
                for (int k = 0; k < cls.dim; ++k) s += member_params[k];
                return 0.5 * s;
            }
            return std::nullopt;
        case ClassKind::tabulated:
            return std::nullopt;
    }
    return std::nullopt;
}

Vec mean_vector(const Net& net, const Population& pop) {
    const std::size_t m = net.size();
    Vec means(m, 0.0);
    std::vector<std::size_t> pending;
    for (std::size_t j = 0; j < m; ++j) {
        if (auto v = closed_form_mean(net.class_ref, net.members[j], pop.tag)) {
            means[j] = *v;
        } else {
            pending.push_back(j);
        }
    }
    if (!pending.empty()) {
        Matrix ref = draw_population_reference(pop);
        const std::size_t r = ref.rows();
        for (std::size_t j : pending) {
            double s = 0.0;
            for (std::size_t i = 0; i < r; ++i)
                s += evaluate(net.class_ref, net.members[j],
                              std::span<const double>(ref.row(i), ref.cols()));
            means[j] = s / static_cast<double>(r);
        }
    }
    return means;
}

Matrix function_values(const FunctionClassSpec& cls, const std::vector<Vec>& members,
                       const Matrix& points) {
    const std::size_t m = members.size();
    const std::size_t n = points.rows();
    Matrix out(m, n);
    if (cls.kind == ClassKind::ball_indicators) {
        const int d = cls.dim;
        for (std::size_t j = 0; j < m; ++j) {
            const double* c = members[j].data();
            const double r2 = c[d] * c[d];
            double* row = out.row(j);
            for (std::size_t i = 0; i < n; ++i) {
                const double* x = points.row(i);
                double dist2 = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double dx = x[k] - c[k];
                    dist2 += dx * dx;
                }
                row[i] = dist2 <= r2 ? 1.0 : 0.0;
            }
        }
        return out;
    }
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i)
            out(j, i) = evaluate(cls, members[j], std::span<const double>(points.row(i), points.cols()));
    return out;
}

PreparedSample prepare_sample(const FunctionClassSpec& cls, const std::vector<Vec>& members,
                              const Vec& drift, const Matrix& points) {
    if (drift.size() != members.size())
        throw std::invalid_argument("prepare_sample: drift length must equal member count");
    PreparedSample prep;
    prep.n = points.rows();
    prep.drift = drift;
    prep.centered = function_values(cls, members, points);
    const std::size_t m = members.size();
    prep.row_sums.resize(m);
    prep.row_means.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        double* row = prep.centered.row(j);
        double s = 0.0;
        for (std::size_t i = 0; i < prep.n; ++i) s += row[i];
        prep.row_sums[j] = s;
        const double mu = s / static_cast<double>(prep.n);
        prep.row_means[j] = mu;
        for (std::size_t i = 0; i < prep.n; ++i) row[i] -= mu;
    }
    return prep;
}

SupSample empirical_sup(const PreparedSample& prep, const Vec& means, std::uint64_t data_seed) {
    if (means.size() != prep.drift.size())
        throw std::invalid_argument("empirical_sup: means length mismatch");
    const double root_n = std::sqrt(static_cast<double>(prep.n));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < prep.drift.size(); ++j) {
        const double v = prep.drift[j] + (prep.row_sums[j] - static_cast<double>(prep.n) * means[j]) / root_n;
        best = std::max(best, v);
    }
    return {best, ProcessKind::Z, std::nullopt, data_seed};
}

SupSample empirical_sup(const DataSample& data, const Net& net, const Vec& means) {
    PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, data.points);
    return empirical_sup(prep, means, data.seed);
}

double multiplier_sup_value(const PreparedSample& prep, std::span<const double> multipliers) {
    if (multipliers.size() != prep.n)
        throw std::invalid_argument("multiplier_sup_value: multiplier length mismatch");
    const double root_n = std::sqrt(static_cast<double>(prep.n));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < prep.drift.size(); ++j) {
        const double* row = prep.centered.row(j);
        double s = 0.0;
        for (std::size_t i = 0; i < prep.n; ++i) s += multipliers[i] * row[i];
        best = std::max(best, prep.drift[j] + s / root_n);
    }
    return best;
}

SupSample multiplier_bootstrap_sup(const PreparedSample& prep, std::uint64_t multiplier_seed,
                                   std::optional<std::uint64_t> conditioning_seed) {
    auto rng = make_rng(multiplier_seed, 0x6d756c74ULL);  // "mult"
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec e(prep.n);
    for (std::size_t i = 0; i < prep.n; ++i) e[i] = gauss(rng);
    return {multiplier_sup_value(prep, e), ProcessKind::Ze, conditioning_seed, multiplier_seed};
}

SupSample multiplier_bootstrap_sup(const DataSample& data, const Net& net,
                                   std::uint64_t multiplier_seed) {
    PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, data.points);
    return multiplier_bootstrap_sup(prep, multiplier_seed, data.seed);
}

std::vector<std::uint32_t> multinomial_weights(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("multinomial_weights: n must be >= 1");
    std::vector<std::uint32_t> counts(n, 0);
    auto rng = make_rng(seed, 0x626f6f74ULL);  // "boot"
    std::uniform_int_distribution<std::size_t> cell(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) ++counts[cell(rng)];
    return counts;
}

double empirical_bootstrap_sup_value(const PreparedSample& prep,
                                     std::span<const std::uint32_t> weights) {
    if (weights.size() != prep.n)
        throw std::invalid_argument("empirical_bootstrap_sup_value: weight length mismatch");
    const double root_n = std::sqrt(static_cast<double>(prep.n));
    double best = -std::numeric_limits<double>::infinity();
    // sum_i (N_i - 1) f_j(X_i) == sum_i (N_i - 1) (f_j(X_i) - P_n f_j)
    // because the multinomial weights sum to n exactly.
    for (std::size_t j = 0; j < prep.drift.size(); ++j) {
        const double* row = prep.centered.row(j);
        double s = 0.0;
        for (std::size_t i = 0; i < prep.n; ++i)
            s += (static_cast<double>(weights[i]) - 1.0) * row[i];
        best = std::max(best, prep.drift[j] + s / root_n);
    }
    return best;
}

SupSample empirical_bootstrap_sup(const PreparedSample& prep, std::uint64_t weight_seed,
                                  std::optional<std::uint64_t> conditioning_seed) {
    auto weights = multinomial_weights(prep.n, weight_seed);
    return {empirical_bootstrap_sup_value(prep, weights), ProcessKind::Zstar, conditioning_seed,
            weight_seed};
}

SupSample empirical_bootstrap_sup(const DataSample& data, const Net& net,
                                  std::uint64_t weight_seed) {
    PreparedSample prep = prepare_sample(net.class_ref, net.members, net.drift, data.points);
    return empirical_bootstrap_sup(prep, weight_seed, data.seed);
}

}  // namespace couplab
