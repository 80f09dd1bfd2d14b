#include "couplab/function_class.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

namespace couplab {

std::string to_string(ClassKind kind) {
    switch (kind) {
        case ClassKind::ball_indicators: return "ball_indicators";
        case ClassKind::halfspace_indicators: return "halfspace_indicators";
        case ClassKind::linear_sphere: return "linear_sphere";
        case ClassKind::tabulated: return "tabulated";
    }
    return "unknown";
}

ClassKind class_kind_from_string(const std::string& name) {
    if (name == "ball_indicators") return ClassKind::ball_indicators;
    if (name == "halfspace_indicators") return ClassKind::halfspace_indicators;
    if (name == "linear_sphere") return ClassKind::linear_sphere;
    if (name == "tabulated") return ClassKind::tabulated;
    throw config_error("unknown class kind: " + name);
}

std::size_t FunctionClassSpec::member_param_count() const {
    switch (kind) {
        case ClassKind::ball_indicators: return static_cast<std::size_t>(dim) + 1;
        case ClassKind::halfspace_indicators: return static_cast<std::size_t>(dim) + 1;
        case ClassKind::linear_sphere: return static_cast<std::size_t>(dim);
        case ClassKind::tabulated: return 1;
    }
    return 0;
}

double FunctionClassSpec::envelope(std::span<const double> x) const {
    switch (kind) {
        case ClassKind::ball_indicators:
        case ClassKind::halfspace_indicators:
            return 1.0;
        case ClassKind::linear_sphere: {
            double s = 0.0;
            for (double xi : x) s += xi * xi;
            return std::sqrt(s);
        }
        case ClassKind::tabulated: {
            const auto i = static_cast<std::size_t>(std::llround(x[0]));
            double best = 0.0;
            for (const auto& row : tabulated_values)
                best = std::max(best, std::abs(row.at(i)));
            return best;
        }
    }
    return 0.0;
}

double evaluate(const FunctionClassSpec& cls, std::span<const double> member_params,
                std::span<const double> x) {
    if (cls.kind != ClassKind::tabulated && x.size() != static_cast<std::size_t>(cls.dim))
        throw std::invalid_argument("evaluate: point dimension mismatch");
    if (member_params.size() != cls.member_param_count())
        throw std::invalid_argument("evaluate: member parameter count mismatch");
    switch (cls.kind) {
        case ClassKind::ball_indicators: {
            const double r = member_params[cls.dim];
            double d2 = 0.0;
            for (int k = 0; k < cls.dim; ++k) {
                const double dx = x[k] - member_params[k];
                d2 += dx * dx;
            }
            return d2 <= r * r ? 1.0 : 0.0;
        }
        case ClassKind::halfspace_indicators: {
            double dot = 0.0;
            for (int k = 0; k < cls.dim; ++k) dot += member_params[k] * x[k];
            return dot <= member_params[cls.dim] ? 1.0 : 0.0;
        }
        case ClassKind::linear_sphere: {
            double dot = 0.0;
            for (int k = 0; k < cls.dim; ++k) dot += member_params[k] * x[k];
            return dot;
        }
        case ClassKind::tabulated: {
            const auto j = static_cast<std::size_t>(std::llround(member_params[0]));
            const auto i = static_cast<std::size_t>(std::llround(x[0]));
            return cls.tabulated_values.at(j).at(i);
        }
    }
    return 0.0;
}

double DriftSpec::value_for(std::size_t pool_index, std::span<const double> member_params) const {
    switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::tabulated:
            if (pool_index >= values.size())
                throw std::invalid_argument("DriftSpec: tabulated drift shorter than pool");
            return values[pool_index];
        case Kind::parametric:
            if (!fn) throw std::invalid_argument("DriftSpec: parametric drift without callable");
            return fn(member_params);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Probe metric
// ---------------------------------------------------------------------------

ProbeMetric::ProbeMetric(const FunctionClassSpec& cls, const std::vector<Vec>& pool,
                         const Matrix& probe) {
    if (probe.rows() == 0) throw std::invalid_argument("ProbeMetric: empty probe sample");
    count_ = pool.size();
    probe_n_ = probe.rows();
    binary_ = cls.kind == ClassKind::ball_indicators || cls.kind == ClassKind::halfspace_indicators;

    double env2 = 0.0;
    for (std::size_t i = 0; i < probe_n_; ++i) {
        const double e = cls.envelope(std::span<const double>(probe.row(i), probe.cols()));
        env2 += e * e;
    }
    envelope_norm_ = std::sqrt(env2 / static_cast<double>(probe_n_));

    if (binary_) {
        words_ = (probe_n_ + 63) / 64;
        bits_.assign(count_ * words_, 0);
        for (std::size_t j = 0; j < count_; ++j) {
            std::uint64_t* row = bits_.data() + j * words_;
            for (std::size_t i = 0; i < probe_n_; ++i) {
                if (evaluate(cls, pool[j], std::span<const double>(probe.row(i), probe.cols())) > 0.5)
                    row[i / 64] |= (std::uint64_t{1} << (i % 64));
            }
        }
    } else {
        values_ = Matrix(count_, probe_n_);
        for (std::size_t j = 0; j < count_; ++j)
            for (std::size_t i = 0; i < probe_n_; ++i)
                values_(j, i) =
                    evaluate(cls, pool[j], std::span<const double>(probe.row(i), probe.cols()));
    }
}

double ProbeMetric::distance(std::size_t i, std::size_t j) const {
    if (binary_) {
        const std::uint64_t* a = bits_.data() + i * words_;
        const std::uint64_t* b = bits_.data() + j * words_;
        std::size_t diff = 0;
        for (std::size_t w = 0; w < words_; ++w) diff += std::popcount(a[w] ^ b[w]);
        return std::sqrt(static_cast<double>(diff) / static_cast<double>(probe_n_));
    }
    double s = 0.0;
    const double* a = values_.row(i);
    const double* b = values_.row(j);
    for (std::size_t k = 0; k < probe_n_; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(probe_n_));
}

// ---------------------------------------------------------------------------
// Candidate pools and nets
// ---------------------------------------------------------------------------

namespace {

Vec domain_lo(const FunctionClassSpec& cls, const Matrix& probe) {
    Vec lo(cls.dim, 0.0);
    if (!cls.center_lo.empty()) return cls.center_lo;
    for (int k = 0; k < cls.dim; ++k) {
        double m = probe(0, k);
        for (std::size_t i = 1; i < probe.rows(); ++i) m = std::min(m, probe(i, k));
        lo[k] = m;
    }
    return lo;
}

Vec domain_hi(const FunctionClassSpec& cls, const Matrix& probe) {
    Vec hi(cls.dim, 1.0);
    if (!cls.center_hi.empty()) return cls.center_hi;
    for (int k = 0; k < cls.dim; ++k) {
        double m = probe(0, k);
        for (std::size_t i = 1; i < probe.rows(); ++i) m = std::max(m, probe(i, k));
        hi[k] = m;
    }
    return hi;
}

std::vector<Vec> pool_from_ranges(const FunctionClassSpec& cls, const Vec& lo, const Vec& hi,
                                  std::size_t pool_size, std::uint64_t seed) {
    std::vector<Vec> pool;
    pool.reserve(pool_size);
    auto rng = make_rng(seed, 0x706f6f6cULL);  // "pool"
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (std::size_t c = 0; c < pool_size; ++c) {
        Vec params(cls.member_param_count());
        switch (cls.kind) {
            case ClassKind::ball_indicators: {
                const double r = cls.radius_min + (cls.radius_max - cls.radius_min) * unit(rng);
                params[cls.dim] = r;
                for (int k = 0; k < cls.dim; ++k) {
                    double a = lo[k], b = hi[k];
                    if (cls.balls_inside_domain) {
                        a += r;
                        b -= r;
                        if (b < a) b = a;
                    }
                    params[k] = a + (b - a) * unit(rng);
                }
                break;
            }
            case ClassKind::halfspace_indicators: {
                double norm = 0.0;
                for (int k = 0; k < cls.dim; ++k) {
                    params[k] = gauss(rng);
                    norm += params[k] * params[k];
                }
                norm = std::sqrt(norm);
                if (norm == 0.0) norm = 1.0;
                for (int k = 0; k < cls.dim; ++k) params[k] /= norm;
                params[cls.dim] = cls.offset_min + (cls.offset_max - cls.offset_min) * unit(rng);
                break;
            }
            case ClassKind::linear_sphere: {
                double norm = 0.0;
                for (int k = 0; k < cls.dim; ++k) {
                    params[k] = gauss(rng);
                    norm += params[k] * params[k];
                }
                norm = std::sqrt(norm);
                if (norm == 0.0) { params[0] = 1.0; norm = 1.0; }
                for (int k = 0; k < cls.dim; ++k) params[k] /= norm;
                break;
            }
            case ClassKind::tabulated:
                break;  // handled below
        }
        pool.push_back(std::move(params));
    }
    if (cls.kind == ClassKind::tabulated) {
        pool.clear();
        for (std::size_t j = 0; j < cls.tabulated_values.size(); ++j) pool.push_back({static_cast<double>(j)});
    }
    return pool;
}

struct GreedySelection {
    std::vector<std::size_t> picked;
    NetStop stop = NetStop::mesh_reached;
};

// Farthest-point traversal: every picked point is >= threshold away from the
// previously picked ones, and on a mesh_reached stop the picked set covers the
// pool within < threshold.
GreedySelection greedy_farthest(const ProbeMetric& metric, double threshold,
                                std::size_t max_members) {
    GreedySelection out;
    const std::size_t m = metric.pool_size();
    if (m == 0) return out;
    std::vector<double> min_dist(m, std::numeric_limits<double>::infinity());
    std::size_t next = 0;  // deterministic start
    while (true) {
        out.picked.push_back(next);
        if (out.picked.size() == m) {
            out.stop = NetStop::pool_exhausted;
            break;
        }
        if (max_members != 0 && out.picked.size() >= max_members) {
            out.stop = NetStop::size_cap;
            break;
        }
        double best = -1.0;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = std::min(min_dist[i], metric.distance(i, next));
            min_dist[i] = d;
            if (d > best) {
                best = d;
                best_i = i;
            }
        }
        if (best < threshold) {
            out.stop = NetStop::mesh_reached;
            break;
        }
        next = best_i;
    }
    return out;
}

}  // namespace

std::vector<Vec> candidate_pool(const FunctionClassSpec& cls, std::size_t pool_size,
                                std::uint64_t rng_seed) {
    Vec lo = cls.center_lo.empty() ? Vec(cls.dim, 0.0) : cls.center_lo;
    Vec hi = cls.center_hi.empty() ? Vec(cls.dim, 1.0) : cls.center_hi;
    return pool_from_ranges(cls, lo, hi, pool_size, rng_seed);
}

std::vector<Vec> sphere_directions(int p, double epsilon, std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("sphere_directions: dimension must be >= 1");
    if (epsilon <= 0.0) throw std::invalid_argument("sphere_directions: epsilon must be positive");
    std::vector<Vec> dirs;
    if (p == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    if (p == 2) {
        // spacing angle theta gives adjacent chord >= epsilon and mesh <= epsilon
        const double theta = 2.0 * std::asin(std::min(epsilon, 2.0) / 2.0);
        const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(2.0 * std::numbers::pi / theta));
        dirs.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    if (p == 3) {
        // Fibonacci lattice; nearest-neighbor chord ~ 3.1/sqrt(m)
        const auto m = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(12.0 / (epsilon * epsilon))));
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        dirs.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(m);
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden * static_cast<double>(k);
            dirs.push_back({rho * std::cos(a), rho * std::sin(a), z});
        }
        return dirs;
    }
    // p > 3: seeded random directions plus antipodes; epsilon is advisory here
    const auto half = std::max<std::size_t>(
        8, static_cast<std::size_t>(std::ceil(std::pow(2.0 / epsilon, p - 1) / 2.0)));
    const std::size_t cap = 20000;
    auto rng = make_rng(seed, 0x7370686572ULL);  // "spher"
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t k = 0; k < std::min(half, cap); ++k) {
        Vec v(p);
        double norm = 0.0;
        for (int i = 0; i < p; ++i) {
            v[i] = gauss(rng);
            norm += v[i] * v[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) { v[0] = 1.0; norm = 1.0; }
        Vec neg(p);
        for (int i = 0; i < p; ++i) {
            v[i] /= norm;
            neg[i] = -v[i];
        }
        dirs.push_back(std::move(v));
        dirs.push_back(std::move(neg));
    }
    return dirs;
}

Net build_net(const FunctionClassSpec& cls, double epsilon, const Matrix& metric_probe,
              const DriftSpec& drift, std::uint64_t rng_seed, const NetOptions& opts) {
    if (epsilon <= 0.0) throw std::invalid_argument("build_net: epsilon must be positive");
    Net net;
    net.epsilon = epsilon;
    net.class_ref = cls;

    if (cls.kind == ClassKind::linear_sphere) {
        net.members = sphere_directions(cls.dim, epsilon, rng_seed);
        if (opts.max_members != 0 && net.members.size() > opts.max_members) {
            net.members.resize(opts.max_members);
            net.stop = NetStop::size_cap;
        }
        net.drift.reserve(net.members.size());
        for (std::size_t j = 0; j < net.members.size(); ++j)
            net.drift.push_back(drift.value_for(j, net.members[j]));
        return net;
    }

    if (metric_probe.rows() == 0) throw std::invalid_argument("build_net: empty metric probe");
    Vec lo = domain_lo(cls, metric_probe);
    Vec hi = domain_hi(cls, metric_probe);
    std::vector<Vec> pool = pool_from_ranges(cls, lo, hi, opts.pool_size, rng_seed);
    ProbeMetric metric(cls, pool, metric_probe);
    GreedySelection sel = greedy_farthest(metric, epsilon, opts.max_members);
    net.stop = sel.stop;
    net.members.reserve(sel.picked.size());
    net.drift.reserve(sel.picked.size());
    for (std::size_t idx : sel.picked) {
        net.members.push_back(pool[idx]);
        net.drift.push_back(drift.value_for(idx, pool[idx]));
    }
    return net;
}

std::size_t covering_number_estimate(const FunctionClassSpec& cls, double epsilon,
                                     const Matrix& metric_probe, std::uint64_t rng_seed,
                                     std::size_t pool_size) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("covering_number_estimate: epsilon must lie in (0, 1]");
    std::vector<Vec> pool;
    if (cls.kind == ClassKind::linear_sphere) {
        pool = candidate_pool(cls, pool_size, rng_seed);
    } else {
        Vec lo = domain_lo(cls, metric_probe);
        Vec hi = domain_hi(cls, metric_probe);
        pool = pool_from_ranges(cls, lo, hi, pool_size, rng_seed);
    }
    ProbeMetric metric(cls, pool, metric_probe);
    GreedySelection sel = greedy_farthest(metric, epsilon * metric.envelope_norm(), 0);
    return sel.picked.size();
}

std::size_t drift_count(const DriftSpec& drift, const std::vector<Vec>& members) {
    if (drift.eta <= 0.0) throw std::invalid_argument("drift_count: eta must be positive");
    if (drift.kind == DriftSpec::Kind::zero) return 1;
    Vec values;
    values.reserve(members.size());
    for (std::size_t j = 0; j < members.size(); ++j)
        values.push_back(drift.value_for(j, members[j]));
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    // leftmost-uncovered greedy sweep; a center at v covers [v, v + eta)
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < values.size()) {
        const double center = values[i];
        ++count;
        while (i < values.size() && values[i] - center < drift.eta) ++i;
    }
    return count;
}

}  // namespace couplab
