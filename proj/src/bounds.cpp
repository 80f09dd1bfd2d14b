#include "couplab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace couplab {

void ClassParams::validate() const {
    if (!(v >= 1.0)) throw std::invalid_argument("ClassParams: v must be >= 1");
    const double a = A_const == 0.0 ? std::numbers::e : A_const;
    if (!(a >= std::numbers::e - 1e-12)) throw std::invalid_argument("ClassParams: A must be >= e");
    if (!(sigma > 0.0)) throw std::invalid_argument("ClassParams: sigma must be positive");
    if (!(b >= sigma)) throw std::invalid_argument("ClassParams: b must be >= sigma");
    if (!(q >= 4.0)) throw std::invalid_argument("ClassParams: q must lie in [4, inf)");
    if (n < 1) throw std::invalid_argument("ClassParams: n must be >= 1");
    if (N_B_eta < 1) throw std::invalid_argument("ClassParams: N_B(eta) must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("ClassParams: eta must be positive");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("ClassParams: gamma must lie in (0, 1)");
}

double compute_Kn(const ClassParams& p) {
    const double a = p.A_const == 0.0 ? std::numbers::e : p.A_const;
    const double log_n = std::log(static_cast<double>(p.n));
    const double log_ab = std::log(a * p.b / p.sigma);
    return std::log(static_cast<double>(p.N_B_eta)) + p.v * std::max(log_n, log_ab);
}

double delta_rate_value(double Kn, double b, double sigma, double q, double gamma, long long n,
                        RateKind which) {
    const double nd = static_cast<double>(n);
    const double first_plain = b * Kn / (std::pow(gamma, 1.0 / q) * std::pow(nd, 0.5 - 1.0 / q));
    const double first_boot = b * Kn / (std::pow(gamma, 1.0 + 1.0 / q) * std::pow(nd, 0.5 - 1.0 / q));
    const double sixth = std::cbrt(b * sigma * sigma * Kn * Kn) /
                         (std::cbrt(gamma) * std::pow(nd, 1.0 / 6.0));
    const double quarter = std::sqrt(b * sigma * std::pow(Kn, 1.5)) /
                           (std::pow(gamma, 1.0 + 1.0 / q) * std::pow(nd, 0.25));
    switch (which) {
        case RateKind::d1: return first_plain + sixth;
        case RateKind::d2: return first_boot + quarter;
        case RateKind::d3: return first_boot + sixth + quarter;
    }
    return 0.0;
}

RateKind rate_kind_from_string(const std::string& name) {
    if (name == "d1") return RateKind::d1;
    if (name == "d2") return RateKind::d2;
    if (name == "d3") return RateKind::d3;
    throw std::invalid_argument("rate kind must be d1, d2 or d3");
}

RateResult delta_rate(const ClassParams& p, RateKind which) {
    const double Kn = compute_Kn(p);
    RateResult out;
    out.value = delta_rate_value(Kn, p.b, p.sigma, p.q, p.gamma, p.n, which);
    const double nd = static_cast<double>(p.n);
    out.side_condition_ok = which == RateKind::d2 ? (Kn <= nd) : (Kn * Kn * Kn <= nd);
    return out;
}

ThirdMomentTerms third_moment_terms(const Matrix& centered, double delta) {
    const std::size_t n = centered.rows();
    const std::size_t p = centered.cols();
    if (p < 2) throw std::invalid_argument("third_moment_terms: p must be >= 2");
    if (n == 0) throw std::invalid_argument("third_moment_terms: empty matrix");
    if (!(delta > 0.0)) throw std::invalid_argument("third_moment_terms: delta must be positive");
    ThirdMomentTerms out;
    out.threshold = delta * std::sqrt(static_cast<double>(n)) / std::log(static_cast<double>(p));

    Vec col_sums(p, 0.0);
    double tail_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row_max = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double a = std::abs(centered(i, j));
            col_sums[j] += a * a * a;
            row_max = std::max(row_max, a);
        }
        if (row_max > out.threshold) tail_sum += row_max * row_max * row_max;
    }
    out.L_n = *std::max_element(col_sums.begin(), col_sums.end()) / static_cast<double>(n);
    out.M_nX = tail_sum / static_cast<double>(n);
    return out;
}

McEstimate gaussian_tail_term(const CovarianceModel& model, double delta, long long n,
                              std::size_t mc_draws, std::uint64_t seed) {
    const std::size_t p = model.dim();
    if (mc_draws == 0) throw std::invalid_argument("gaussian_tail_term: mc_draws must be positive");
    const double threshold =
        std::isinf(delta) ? std::numeric_limits<double>::infinity()
                          : delta * std::sqrt(static_cast<double>(n)) /
                                std::log(std::max<double>(static_cast<double>(p), 2.0));
    auto rng = make_rng(seed, 0x7461696cULL);  // "tail"
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec w(p);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t rep = 0; rep < mc_draws; ++rep) {
        for (std::size_t i = 0; i < p; ++i) w[i] = gauss(rng);
        double row_max = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double* row = model.factor.row(j);
            double y = 0.0;
            for (std::size_t k = 0; k <= j; ++k) y += row[k] * w[k];
            row_max = std::max(row_max, std::abs(y));
        }
        const double term = row_max > threshold ? row_max * row_max * row_max : 0.0;
        sum += term;
        sum2 += term * term;
    }
    const double m = static_cast<double>(mc_draws);
    McEstimate out;
    out.value = sum / m;
    const double var = std::max(0.0, sum2 / m - out.value * out.value);
    out.se = std::sqrt(var / m);
    return out;
}

double cov_discrepancy(const Matrix& covX, const Matrix& covY) {
    if (covX.rows() != covY.rows() || covX.cols() != covY.cols())
        throw std::invalid_argument("cov_discrepancy: shape mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < covX.data().size(); ++i)
        best = std::max(best, std::abs(covX.data()[i] - covY.data()[i]));
    return best;
}

double nazarov_density_bound(std::size_t p, double underline_sigma, double epsilon) {
    if (p < 1) throw std::invalid_argument("nazarov_density_bound: p must be >= 1");
    if (!(underline_sigma > 0.0))
        throw std::invalid_argument("nazarov_density_bound: sigma must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("nazarov_density_bound: epsilon must be positive");
    return (2.0 * epsilon / underline_sigma) *
           (std::sqrt(2.0 * std::log(static_cast<double>(p))) + 2.0);
}

double anticoncentration_bound(double underline_sigma, double epsilon, double phi_delta,
                               std::size_t cover_N, double delta, std::span<const double> r_grid) {
    if (r_grid.empty()) throw std::invalid_argument("anticoncentration_bound: empty r grid");
    if (!(underline_sigma > 0.0) || epsilon < 0.0 || phi_delta < 0.0 || !(delta > 0.0) || cover_N < 1)
        throw std::invalid_argument("anticoncentration_bound: inputs must be positive");
    const double log_term = std::sqrt(2.0 * std::log(static_cast<double>(cover_N))) + 2.0;
    double best = std::numeric_limits<double>::infinity();
    for (double r : r_grid) {
        const double val =
            2.0 / underline_sigma * (epsilon + phi_delta + r * delta) * log_term +
            std::exp(-r * r / 2.0);
        best = std::min(best, val);
    }
    return best;
}

McEstimate gaussian_max_concentration(const CovarianceModel& model, double epsilon,
                                      std::size_t draws, std::size_t t_grid, std::uint64_t seed) {
    if (draws < 2 || t_grid < 2)
        throw std::invalid_argument("gaussian_max_concentration: draws and t_grid must be >= 2");
    Vec maxima = gaussian_sup_sample(model, draws, seed);
    const double lo = quantile_sorted(maxima, 0.01);
    const double hi = quantile_sorted(maxima, 0.99);
    double best = 0.0;
    for (std::size_t i = 0; i < t_grid; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(t_grid - 1);
        const auto lower = std::lower_bound(maxima.begin(), maxima.end(), t - epsilon);
        const auto upper = std::upper_bound(maxima.begin(), maxima.end(), t + epsilon);
        const double frac = static_cast<double>(upper - lower) / static_cast<double>(draws);
        best = std::max(best, frac);
    }
    McEstimate out;
    out.value = best;
    out.se = std::sqrt(std::max(best * (1.0 - best), 1.0 / static_cast<double>(draws)) /
                       static_cast<double>(draws));
    return out;
}

CovarianceModel random_gaussian_model(std::size_t p, double sigma_lo, double sigma_hi,
                                      std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("random_gaussian_model: p must be >= 1");
    auto rng = make_rng(seed, 0x72676d6fULL);  // "rgmo"
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // dense random Gram correlation, rescaled to the target stddevs
    const std::size_t k = p + 2;
    Matrix b(p, k);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < k; ++j) b(i, j) = gauss(rng);
    Vec sd(p);
    for (std::size_t i = 0; i < p; ++i) sd[i] = sigma_lo + (sigma_hi - sigma_lo) * unit(rng);

    CovarianceModel model;
    model.cov = Matrix(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double gij = 0.0, gii = 0.0, gjj = 0.0;
            for (std::size_t m = 0; m < k; ++m) {
                gij += b(i, m) * b(j, m);
                gii += b(i, m) * b(i, m);
                gjj += b(j, m) * b(j, m);
            }
            const double corr = gij / std::sqrt(gii * gjj);
            model.cov(i, j) = model.cov(j, i) = corr * sd[i] * sd[j];
        }
    }
    model.mean.resize(p);
    for (std::size_t i = 0; i < p; ++i) model.mean[i] = 2.0 * unit(rng) - 1.0;
    auto chol = psd_repair(model.cov);
    model.factor = std::move(chol.factor);
    model.jitter = chol.jitter;
    return model;
}

double min_coordinate_sigma(const CovarianceModel& model) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.dim(); ++i) best = std::min(best, std::sqrt(model.cov(i, i)));
    return best;
}

}  // namespace couplab
