#include "couplab/convex_prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace couplab {

std::string to_string(SetKind kind) {
    switch (kind) {
        case SetKind::ball: return "ball";
        case SetKind::box: return "box";
        case SetKind::halfspace: return "halfspace";
        case SetKind::polytope: return "polytope";
    }
    return "unknown";
}

SetKind set_kind_from_string(const std::string& name) {
    if (name == "ball") return SetKind::ball;
    if (name == "box") return SetKind::box;
    if (name == "halfspace") return SetKind::halfspace;
    if (name == "polytope") return SetKind::polytope;
    throw config_error("unknown convex set kind: " + name);
}

std::string to_string(ConvexMethod m) {
    switch (m) {
        case ConvexMethod::direct_mc: return "direct_mc";
        case ConvexMethod::gaussian: return "gaussian";
        case ConvexMethod::multiplier_bootstrap: return "multiplier_bootstrap";
    }
    return "unknown";
}

ConvexMethod convex_method_from_string(const std::string& name) {
    if (name == "direct_mc") return ConvexMethod::direct_mc;
    if (name == "gaussian") return ConvexMethod::gaussian;
    if (name == "multiplier_bootstrap") return ConvexMethod::multiplier_bootstrap;
    throw config_error("unknown convex method: " + name);
}

void ConvexSetSpec::validate() const {
    if (dim < 1) throw config_error("convex set: dim must be >= 1");
    switch (kind) {
        case SetKind::ball:
            if (!(radius > 0.0)) throw config_error("convex set: ball radius must be positive");
            if (!center.empty() && center.size() != static_cast<std::size_t>(dim))
                throw config_error("convex set: ball center dimension mismatch");
            break;
        case SetKind::box:
            if (lo.size() != static_cast<std::size_t>(dim) || hi.size() != lo.size())
                throw config_error("convex set: box bounds dimension mismatch");
            for (std::size_t k = 0; k < lo.size(); ++k)
                if (lo[k] > hi[k]) throw config_error("convex set: box must satisfy lo <= hi");
            break;
        case SetKind::halfspace: {
            if (normal.size() != static_cast<std::size_t>(dim))
                throw config_error("convex set: halfspace normal dimension mismatch");
            double nn = 0.0;
            for (double x : normal) nn += x * x;
            if (std::abs(std::sqrt(nn) - 1.0) > 1e-9)
                throw config_error("convex set: halfspace normal must be a unit vector");
            break;
        }
        case SetKind::polytope:
            if (dim > 3) throw config_error("convex set: polytope support needs dim <= 3");
            if (normals.rows() == 0 || normals.cols() != static_cast<std::size_t>(dim) ||
                offsets.size() != normals.rows())
                throw config_error("convex set: polytope description mismatch");
            break;
    }
}

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kGeomTol = 1e-10;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Solve the d x d system rows(idx) . x = offsets(idx) by Cramer's rule (d <= 3).
bool solve_subset(const Matrix& normals, const Vec& offsets, std::span<const std::size_t> idx,
                  Vec& x) {
    const std::size_t d = normals.cols();
    double a[3][3] = {};
    double rhs[3] = {};
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) a[r][c] = normals(idx[r], c);
        rhs[r] = offsets[idx[r]];
    }
    auto det2 = [](double m00, double m01, double m10, double m11) { return m00 * m11 - m01 * m10; };
    double det = 0.0;
    if (d == 1) {
        det = a[0][0];
        if (std::abs(det) < kGeomTol) return false;
        x = {rhs[0] / det};
        return true;
    }
    if (d == 2) {
        det = det2(a[0][0], a[0][1], a[1][0], a[1][1]);
        if (std::abs(det) < kGeomTol) return false;
        x = {det2(rhs[0], a[0][1], rhs[1], a[1][1]) / det,
             det2(a[0][0], rhs[0], a[1][0], rhs[1]) / det};
        return true;
    }
    det = a[0][0] * det2(a[1][1], a[1][2], a[2][1], a[2][2]) -
          a[0][1] * det2(a[1][0], a[1][2], a[2][0], a[2][2]) +
          a[0][2] * det2(a[1][0], a[1][1], a[2][0], a[2][1]);
    if (std::abs(det) < kGeomTol) return false;
    x.assign(3, 0.0);
    for (std::size_t col = 0; col < 3; ++col) {
        double m[3][3];
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) m[r][c] = c == col ? rhs[r] : a[r][c];
        const double dc = m[0][0] * det2(m[1][1], m[1][2], m[2][1], m[2][2]) -
                          m[0][1] * det2(m[1][0], m[1][2], m[2][0], m[2][2]) +
                          m[0][2] * det2(m[1][0], m[1][1], m[2][0], m[2][1]);
        x[col] = dc / det;
    }
    return true;
}

bool feasible(const Matrix& normals, const Vec& offsets, const Vec& x) {
    double span = 1.0;
    for (double c : x) span = std::max(span, std::abs(c));
    const double tol = 1e-8 * span;
    for (std::size_t k = 0; k < normals.rows(); ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < normals.cols(); ++c) s += normals(k, c) * x[c];
        if (s > offsets[k] + tol) return false;
    }
    return true;
}

std::vector<Vec> polytope_vertices(const Matrix& normals, const Vec& offsets) {
    const std::size_t d = normals.cols();
    const std::size_t m = normals.rows();
    std::vector<Vec> vertices;
    if (m < d) return vertices;
    std::vector<std::size_t> idx(d);
    std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t start, std::size_t depth) {
        if (depth == d) {
            Vec x;
            if (solve_subset(normals, offsets, idx, x) && feasible(normals, offsets, x))
                vertices.push_back(x);
            return;
        }
        for (std::size_t k = start; k < m; ++k) {
            idx[depth] = k;
            recurse(k + 1, depth + 1);
        }
    };
    recurse(0, 0);
    return vertices;
}

// Exact test for sup{ v.r : N r <= 0 } > 0 in dim <= 3. The projection of v
// onto the recession cone lies on a face, and the face projection is the
// orthogonal projection of v onto the null space of the active constraints,
// so enumerating constraint subsets of size < d covers it.
bool unbounded_in_direction(const Matrix& normals, std::span<const double> v) {
    const std::size_t d = normals.cols();
    const std::size_t m = normals.rows();
    const double vnorm = norm(v);
    const double tol = kGeomTol * std::max(1.0, vnorm);

    auto feasible_ray = [&](const Vec& r) {
        for (std::size_t k = 0; k < m; ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += normals(k, c) * r[c];
            if (s > tol) return false;
        }
        return true;
    };
    auto check = [&](const Vec& r) { return feasible_ray(r) && dot(v, r) > tol; };

    // project v onto the orthogonal complement of span{ normals in subset }
    auto project = [&](std::span<const std::size_t> subset) {
        Vec r(v.begin(), v.end());
        std::vector<Vec> basis;
        for (std::size_t k : subset) {
            Vec q(d);
            for (std::size_t c = 0; c < d; ++c) q[c] = normals(k, c);
            for (const auto& b : basis) {
                const double proj = dot(q, b);
                for (std::size_t c = 0; c < d; ++c) q[c] -= proj * b[c];
            }
            const double qn = norm(q);
            if (qn < kGeomTol) continue;
            for (auto& x : q) x /= qn;
            basis.push_back(std::move(q));
        }
        for (const auto& b : basis) {
            const double proj = dot(r, b);
            for (std::size_t c = 0; c < d; ++c) r[c] -= proj * b[c];
        }
        return r;
    };

    if (check(Vec(v.begin(), v.end()))) return true;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t one[] = {i};
        if (d >= 2 && check(project(one))) return true;
        for (std::size_t j = i + 1; j < m && d >= 3; ++j) {
            const std::size_t two[] = {i, j};
            if (check(project(two))) return true;
        }
    }
    return false;
}

// Support over a polyhedron that is bounded in direction v: clip with a large
// box so vertex enumeration always applies (the box is inactive at the
// maximizer when the true face is bounded, and harmless when that face is a
// line or plane since the clipped value matches the supremum).
double bounded_polytope_support(const Matrix& normals, const Vec& offsets,
                                std::span<const double> v) {
    const std::size_t d = normals.cols();
    double scale = 1.0;
    for (double o : offsets) scale = std::max(scale, std::abs(o));
    const double box = 1e6 * scale;

    Matrix aug(normals.rows() + 2 * d, d);
    Vec aug_off = offsets;
    for (std::size_t i = 0; i < normals.rows(); ++i)
        for (std::size_t c = 0; c < d; ++c) aug(i, c) = normals(i, c);
    for (std::size_t c = 0; c < d; ++c) {
        aug(normals.rows() + 2 * c, c) = 1.0;
        aug_off.push_back(box);
        aug(normals.rows() + 2 * c + 1, c) = -1.0;
        aug_off.push_back(box);
    }
    const auto vertices = polytope_vertices(aug, aug_off);
    if (vertices.empty())
        throw config_error("support_function: polytope is empty or degenerate");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& x : vertices) best = std::max(best, dot(v, x));
    return best;
}

double support_impl(const ConvexSetSpec& set, std::span<const double> v) {
    switch (set.kind) {
        case SetKind::ball: {
            double vc = 0.0;
            if (!set.center.empty()) vc = dot(v, set.center);
            return vc + set.radius * norm(v);
        }
        case SetKind::box: {
            double s = 0.0;
            for (std::size_t k = 0; k < v.size(); ++k)
                s += std::max(v[k] * set.lo[k], v[k] * set.hi[k]);
            return s;
        }
        case SetKind::halfspace: {
            // finite only along the outward normal itself
            Vec scaled = set.normal;
            const double nv = norm(v);
            double diff = 0.0;
            for (std::size_t k = 0; k < scaled.size(); ++k) {
                const double want = nv * scaled[k];
                diff = std::max(diff, std::abs(v[k] - want));
            }
            if (diff <= kUnitTol * std::max(1.0, nv))
                return set.offset * nv;
            return std::numeric_limits<double>::infinity();
        }
        case SetKind::polytope: {
            if (unbounded_in_direction(set.normals, v))
                return std::numeric_limits<double>::infinity();
            return bounded_polytope_support(set.normals, set.offsets, v);
        }
    }
    return 0.0;
}

}  // namespace

double support_function_raw(const ConvexSetSpec& set, std::span<const double> v) {
    if (v.size() != static_cast<std::size_t>(set.dim))
        throw std::invalid_argument("support_function: direction dimension mismatch");
    return support_impl(set, v);
}

double support_function(const ConvexSetSpec& set, std::span<const double> v) {
    if (v.size() != static_cast<std::size_t>(set.dim))
        throw std::invalid_argument("support_function: direction dimension mismatch");
    if (std::abs(norm(v) - 1.0) > kUnitTol)
        throw std::invalid_argument("support_function: direction must be a unit vector");
    return support_impl(set, v);
}

namespace {

Vec population_mean(DistributionTag tag, int dim) {
    switch (tag) {
        case DistributionTag::standard_gaussian: return Vec(dim, 0.0);
        case DistributionTag::uniform_cube: return Vec(dim, 0.5);
        case DistributionTag::custom_tabulated:
            throw config_error("convex_probability: custom data has no resolvable mean");
    }
    return {};
}

double population_coordinate_variance(DistributionTag tag) {
    return tag == DistributionTag::standard_gaussian ? 1.0 : 1.0 / 12.0;
}

}  // namespace

Vec convex_sup_stats(const ConvexSetSpec& set, const std::vector<Vec>& directions,
                     DistributionTag data, long long n, ConvexMethod method, std::size_t reps,
                     std::uint64_t seed, unsigned threads) {
    set.validate();
    if (n < 1) throw config_error("convex_probability: n must be >= 1");
    if (reps < 2) throw config_error("convex_probability: reps must be >= 2");
    const int p = set.dim;
    const double root_n = std::sqrt(static_cast<double>(n));
    const Vec mu = population_mean(data, p);

    const std::size_t m = directions.size();
    Vec support(m), drift(m);
    for (std::size_t j = 0; j < m; ++j) {
        support[j] = support_function(set, directions[j]);
        if (std::isinf(support[j])) {
            if (set.kind == SetKind::halfspace)
                throw config_error("convex_probability: halfspace net must be its single normal");
            throw config_error("convex_probability: unbounded support value on a net direction");
        }
        drift[j] = root_n * dot(directions[j], mu) - support[j];
    }

    Vec stats(reps);
    if (method == ConvexMethod::gaussian) {
        const double var = population_coordinate_variance(data);
        const double sd = std::sqrt(var);
        // G(v) = v . (sd W), W standard normal in R^p: exact discretized limit
        parallel_for(reps, threads, [&](std::size_t rep) {
            auto rng = make_rng(seed, 0x6376e701ULL, rep);
            std::normal_distribution<double> gauss(0.0, 1.0);
            Vec w(p);
            for (int k = 0; k < p; ++k) w[k] = sd * gauss(rng);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j) best = std::max(best, drift[j] + dot(directions[j], w));
            stats[rep] = best;
        });
        return stats;
    }

    if (method == ConvexMethod::direct_mc) {
        parallel_for(reps, threads, [&](std::size_t rep) {
            DataSample sample = draw_data(data, static_cast<std::size_t>(n), p,
                                          mix_seed(seed, 0x6376e702ULL, rep));
            Vec s(p, 0.0);
            for (std::size_t i = 0; i < sample.n(); ++i)
                for (int k = 0; k < p; ++k) s[k] += sample.points(i, k);
            for (int k = 0; k < p; ++k) s[k] /= root_n;
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j)
                best = std::max(best, dot(directions[j], s) - support[j]);
            stats[rep] = best;
        });
        return stats;
    }

    // multiplier bootstrap conditional on one data sample, plug-in mean drift
    DataSample sample =
        draw_data(data, static_cast<std::size_t>(n), p, mix_seed(seed, 0x6376e703ULL));
    Vec xbar(p, 0.0);
    for (std::size_t i = 0; i < sample.n(); ++i)
        for (int k = 0; k < p; ++k) xbar[k] += sample.points(i, k);
    for (int k = 0; k < p; ++k) xbar[k] /= static_cast<double>(n);
    parallel_for(reps, threads, [&](std::size_t rep) {
        auto rng = make_rng(seed, 0x6376e704ULL, rep);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec t(p, 0.0);
        for (std::size_t i = 0; i < sample.n(); ++i) {
            const double e = gauss(rng);
            for (int k = 0; k < p; ++k) t[k] += e * (sample.points(i, k) - xbar[k]);
        }
        for (int k = 0; k < p; ++k) t[k] = t[k] / root_n + root_n * xbar[k];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j)
            best = std::max(best, dot(directions[j], t) - support[j]);
        stats[rep] = best;
    });
    return stats;
}

ConvexProbResult convex_probability(const ConvexSetSpec& set, DistributionTag data, long long n,
                                    double sphere_net_eps, ConvexMethod method, std::size_t reps,
                                    std::uint64_t seed, unsigned threads) {
    set.validate();
    if (!(sphere_net_eps > 0.0)) throw config_error("convex_probability: net eps must be positive");

    std::vector<Vec> net;
    std::vector<Vec> refined;
    if (set.kind == SetKind::halfspace) {
        net.push_back(set.normal);  // the net reduces to the single normal direction
        refined = net;
    } else {
        net = sphere_directions(set.dim, sphere_net_eps, mix_seed(seed, 0x6e657431ULL));
        refined = net;
        const auto extra =
            sphere_directions(set.dim, sphere_net_eps / 2.0, mix_seed(seed, 0x6e657432ULL));
        refined.insert(refined.end(), extra.begin(), extra.end());
    }

    auto prob_of = [&](const std::vector<Vec>& dirs) {
        const Vec stats = convex_sup_stats(set, dirs, data, n, method, reps, seed, threads);
        std::size_t count = 0;
        for (double s : stats)
            if (s <= 0.0) ++count;
        return static_cast<double>(count) / static_cast<double>(reps);
    };

    ConvexProbResult out;
    out.net_size = net.size();
    out.prob = prob_of(net);
    out.se = std::sqrt(std::max(out.prob * (1.0 - out.prob), 1.0 / static_cast<double>(reps)) /
                       static_cast<double>(reps));
    out.net_bias = set.kind == SetKind::halfspace ? 0.0 : std::abs(out.prob - prob_of(refined));
    return out;
}

}  // namespace couplab
