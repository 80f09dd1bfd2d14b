#include "couplab/gaussian_kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace couplab {

namespace {

// Semidefinite-tolerant lower-triangular factorization. Pivots within
// -tol of zero are clamped; the column below a zero pivot is zeroed. A final
// Frobenius residual check decides success.
bool try_cholesky(const Matrix& a, Matrix& l) {
    const std::size_t n = a.rows();
    l = Matrix(n, n, 0.0);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
    const double pivot_tol = 1e-12 * std::max(max_diag, 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
        double d = a(k, k);
        for (std::size_t m = 0; m < k; ++m) d -= l(k, m) * l(k, m);
        if (d < -pivot_tol) return false;
        const double lkk = d > 0.0 ? std::sqrt(d) : 0.0;
        l(k, k) = lkk;
        for (std::size_t i = k + 1; i < n; ++i) {
            double s = a(i, k);
            for (std::size_t m = 0; m < k; ++m) s -= l(i, m) * l(k, m);
            l(i, k) = lkk > 0.0 ? s / lkk : 0.0;
        }
    }
    return true;
}

double frobenius(const Matrix& m) {
    double s = 0.0;
    for (double x : m.data()) s += x * x;
    return std::sqrt(s);
}

double reconstruction_residual(const Matrix& a, const Matrix& l, double jitter) {
    const std::size_t n = a.rows();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k <= j; ++k) v += l(i, k) * l(j, k);
            double target = a(i, j) + (i == j ? jitter : 0.0);
            const double d = v - target;
            s += (i == j ? 1.0 : 2.0) * d * d;
        }
    }
    return std::sqrt(s);
}

}  // namespace

CholeskyResult psd_repair(const Matrix& cov) {
    const std::size_t n = cov.rows();
    if (n == 0 || cov.cols() != n) throw std::invalid_argument("psd_repair: square matrix required");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(cov(i, j) - cov(j, i)) > 1e-9 * std::max(1.0, std::abs(cov(i, j))))
                throw std::invalid_argument("psd_repair: input not symmetric");

    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += cov(i, i);
    const double scale = std::max(trace / static_cast<double>(n), 1e-300);
    const double fro = frobenius(cov);

    static constexpr double ladder[] = {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4};
    for (double mult : ladder) {
        const double jitter = mult * scale;
        Matrix a = cov;
        for (std::size_t i = 0; i < n; ++i) a(i, i) += jitter;
        Matrix l;
        if (!try_cholesky(a, l)) continue;
        const double tol = 1e-8 * fro + jitter * std::sqrt(static_cast<double>(n)) + 1e-12;
        if (reconstruction_residual(cov, l, jitter) <= tol) return {std::move(l), jitter};
    }
    std::ostringstream msg;
    msg << "psd_repair: factorization failed at max jitter (N=" << n << ", trace=" << trace
        << ", ||cov||_F=" << fro << ")";
    throw numerical_error(msg.str());
}

double disk_intersection_area(double r1, double r2, double center_distance) {
    const double d = center_distance;
    if (d >= r1 + r2) return 0.0;
    const double rmin = std::min(r1, r2);
    if (d <= std::abs(r1 - r2)) return std::numbers::pi * rmin * rmin;
    const double a1 = r1 * r1 * std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
    const double a2 = r2 * r2 * std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
    const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    return a1 + a2 - 0.5 * std::sqrt(std::max(0.0, k));
}

namespace {

bool ball_inside_unit_cube(const Vec& params, int d) {
    const double r = params[static_cast<std::size_t>(d)];
    for (int k = 0; k < d; ++k)
        if (params[k] - r < 0.0 || params[k] + r > 1.0) return false;
    return true;
}

Matrix closed_form_covariance(const Net& net, DistributionTag tag) {
    const std::size_t m = net.size();
    const int d = net.class_ref.dim;
    Matrix cov(m, m);
    if (net.class_ref.kind == ClassKind::linear_sphere) {
        const double scale = tag == DistributionTag::standard_gaussian ? 1.0 : 1.0 / 12.0;
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k <= j; ++k) {
                double dot = 0.0;
                for (int i = 0; i < d; ++i) dot += net.members[j][i] * net.members[k][i];
                cov(j, k) = cov(k, j) = scale * dot;
            }
        }
        return cov;
    }
    // balls fully inside the unit cube under uniform data:
    // P(f_j f_k) is the intersection area of the two disks
    for (std::size_t j = 0; j < m; ++j) {
        const double rj = net.members[j][static_cast<std::size_t>(d)];
        const double pj = std::numbers::pi * rj * rj;
        for (std::size_t k = 0; k <= j; ++k) {
            const double rk = net.members[k][static_cast<std::size_t>(d)];
            const double pk = std::numbers::pi * rk * rk;
            double dist2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double dx = net.members[j][i] - net.members[k][i];
                dist2 += dx * dx;
            }
            const double pjk = disk_intersection_area(rj, rk, std::sqrt(dist2));
            cov(j, k) = cov(k, j) = pjk - pj * pk;
        }
    }
    return cov;
}

// Reference-sample plug-in moments; the empirical covariance of the sample is
// PSD by construction up to rounding. Indicator classes use bit rows.
Matrix reference_covariance(const Net& net, const Population& pop) {
    const Matrix ref = draw_population_reference(pop);
    const std::size_t r = ref.rows();
    const std::size_t m = net.size();
    const auto& cls = net.class_ref;
    const bool binary =
        cls.kind == ClassKind::ball_indicators || cls.kind == ClassKind::halfspace_indicators;
    Matrix cov(m, m);
    if (binary) {
        const std::size_t words = (r + 63) / 64;
        std::vector<std::uint64_t> bits(m * words, 0);
        Vec first(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            std::uint64_t* row = bits.data() + j * words;
            std::size_t count = 0;
            for (std::size_t i = 0; i < r; ++i) {
                if (evaluate(cls, net.members[j], std::span<const double>(ref.row(i), ref.cols())) > 0.5) {
                    row[i / 64] |= (std::uint64_t{1} << (i % 64));
                    ++count;
                }
            }
            first[j] = static_cast<double>(count) / static_cast<double>(r);
        }
        for (std::size_t j = 0; j < m; ++j) {
            const std::uint64_t* a = bits.data() + j * words;
            for (std::size_t k = 0; k <= j; ++k) {
                const std::uint64_t* b = bits.data() + k * words;
                std::size_t both = 0;
                for (std::size_t w = 0; w < words; ++w) both += std::popcount(a[w] & b[w]);
                const double pjk = static_cast<double>(both) / static_cast<double>(r);
                cov(j, k) = cov(k, j) = pjk - first[j] * first[k];
            }
        }
        return cov;
    }
    // centered two-pass accumulation: equals P(f g) - Pf Pg with better
    // cancellation behavior (constants give an exact zero up to rounding dust)
    Matrix vals = function_values(cls, net.members, ref);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        double* row = vals.row(j);
        for (std::size_t i = 0; i < r; ++i) s += row[i];
        const double mu = s / static_cast<double>(r);
        for (std::size_t i = 0; i < r; ++i) row[i] -= mu;
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double* a = vals.row(j);
        for (std::size_t k = 0; k <= j; ++k) {
            const double* b = vals.row(k);
            double s = 0.0;
            for (std::size_t i = 0; i < r; ++i) s += a[i] * b[i];
            cov(j, k) = cov(k, j) = s / static_cast<double>(r);
        }
    }
    return cov;
}

}  // namespace

bool covariance_closed_form_available(const Net& net, DistributionTag tag) {
    const auto& cls = net.class_ref;
    if (cls.kind == ClassKind::linear_sphere)
        return tag == DistributionTag::standard_gaussian || tag == DistributionTag::uniform_cube;
    if (cls.kind == ClassKind::ball_indicators && cls.dim == 2 &&
        tag == DistributionTag::uniform_cube) {
        for (const auto& member : net.members)
            if (!ball_inside_unit_cube(member, cls.dim)) return false;
        return true;
    }
    return false;
}

CovarianceModel estimate_covariance(const Net& net, const Population& pop, CovarianceMode mode) {
    if (net.size() == 0) throw std::invalid_argument("estimate_covariance: empty net");
    CovarianceModel model;
    model.mean = net.drift;
    const bool closed = covariance_closed_form_available(net, pop.tag);
    if (mode == CovarianceMode::closed_form && !closed)
        throw config_error("estimate_covariance: no closed form for this class/population");
    if (closed && mode != CovarianceMode::reference_sample) {
        model.cov = closed_form_covariance(net, pop.tag);
    } else {
        model.cov = reference_covariance(net, pop);
    }
    auto chol = psd_repair(model.cov);
    model.factor = std::move(chol.factor);
    model.jitter = chol.jitter;
    return model;
}

double sample_gaussian_sup(const CovarianceModel& model, std::mt19937_64& rng) {
    const std::size_t m = model.dim();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = gauss(rng);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        const double* row = model.factor.row(j);
        double g = 0.0;
        for (std::size_t k = 0; k <= j; ++k) g += row[k] * w[k];
        best = std::max(best, model.mean[j] + g);
    }
    return best;
}

SupSample sample_gaussian_sup(const CovarianceModel& model, std::uint64_t seed) {
    auto rng = make_rng(seed, 0x7469646cULL);  // "tidl"
    return {sample_gaussian_sup(model, rng), ProcessKind::Ztilde, std::nullopt, seed};
}

Vec gaussian_sup_sample(const CovarianceModel& model, std::size_t reps, std::uint64_t seed,
                        unsigned threads) {
    Vec out(reps);
    parallel_for(reps, threads, [&](std::size_t i) {
        auto rng = make_rng(seed, 0x7a746c64ULL, i);
        out[i] = sample_gaussian_sup(model, rng);
    });
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace couplab
