#include "couplab/smooth_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace couplab {

double softmax(std::span<const double> x, double beta, std::span<const double> mu_bar) {
    if (x.empty()) throw std::invalid_argument("softmax: empty input");
    if (beta <= 0.0) throw std::invalid_argument("softmax: beta must be positive");
    if (!mu_bar.empty() && mu_bar.size() != x.size())
        throw std::invalid_argument("softmax: mu_bar length mismatch");
    const std::size_t p = x.size();
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p; ++j) {
        const double y = x[j] + (mu_bar.empty() ? 0.0 : mu_bar[j]);
        shift = std::max(shift, y);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double y = x[j] + (mu_bar.empty() ? 0.0 : mu_bar[j]);
        s += std::exp(beta * (y - shift));
    }
    return shift + std::log(s) / beta;
}

void gauss_legendre(int n, Vec& x, Vec& w) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::abs(z - z1) <= 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

namespace {

std::vector<std::pair<double, double>> merge_intervals(std::vector<std::pair<double, double>> v) {
    if (v.empty()) throw std::invalid_argument("MollifiedIndicator: empty interval union");
    for (auto& [a, b] : v)
        if (!(a <= b)) throw std::invalid_argument("MollifiedIndicator: interval with a > b");
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> out;
    out.push_back(v.front());
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].first <= out.back().second) {
            out.back().second = std::max(out.back().second, v[i].second);
        } else {
            out.push_back(v[i]);
        }
    }
    return out;
}

}  // namespace

MollifiedIndicator::MollifiedIndicator(std::vector<std::pair<double, double>> intervals,
                                       double delta, int quadrature_nodes)
    : intervals_(merge_intervals(std::move(intervals))), delta_(delta), nodes_(quadrature_nodes) {
    if (delta_ <= 0.0) throw std::invalid_argument("MollifiedIndicator: delta must be positive");
    if (nodes_ < 2) throw std::invalid_argument("MollifiedIndicator: need at least two nodes");
    gauss_legendre(nodes_, gl_x_, gl_w_);

    // kinks of h: edges of the merged delta-enlargement, the ends of its
    // ramps, and the midpoints of gaps (where the nearest interval switches)
    std::vector<std::pair<double, double>> enlarged;
    enlarged.reserve(intervals_.size());
    for (const auto& [a, b] : intervals_) enlarged.emplace_back(a - delta_, b + delta_);
    enlarged = merge_intervals(std::move(enlarged));
    for (std::size_t i = 0; i < enlarged.size(); ++i) {
        const auto& [a, b] = enlarged[i];
        breakpoints_.push_back(a - delta_);
        breakpoints_.push_back(a);
        breakpoints_.push_back(b);
        breakpoints_.push_back(b + delta_);
        if (i + 1 < enlarged.size())
            breakpoints_.push_back(0.5 * (b + enlarged[i + 1].first));
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());

    // store the merged enlargement for distance queries
    intervals_enlarged_ = std::move(enlarged);

    // normalization C with the same base rule the evaluation uses on a
    // kink-free window, so g == 1 exactly deep inside A
    bump_norm_ = 1.0;
    double s = 0.0;
    for (int i = 0; i < nodes_; ++i) s += gl_w_[i] * bump(gl_x_[i]);
    bump_norm_ = 1.0 / s;
}

double MollifiedIndicator::bump(double z) const {
    if (z * z >= 1.0) return 0.0;
    return bump_norm_ * std::exp(1.0 / (z * z - 1.0));
}

double MollifiedIndicator::distance_to_enlargement(double t) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : intervals_enlarged_) {
        const double d = std::max({a - t, t - b, 0.0});
        best = std::min(best, d);
        if (t <= b) break;  // intervals sorted; later ones only get farther
    }
    return best;
}

double MollifiedIndicator::ramp(double t) const {
    return std::max(0.0, 1.0 - distance_to_enlargement(t) / delta_);
}

double MollifiedIndicator::operator()(double t) const {
    // integrate h(t + delta z) phi(z) over [-1, 1], splitting at the kinks of
    // h mapped into z so every panel sees a smooth integrand
    Vec cuts;
    cuts.push_back(-1.0);
    for (double s : breakpoints_) {
        const double z = (s - t) / delta_;
        if (z > -1.0 + 1e-14 && z < 1.0 - 1e-14) cuts.push_back(z);
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());

    double total = 0.0;
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double za = cuts[seg], zb = cuts[seg + 1];
        if (zb - za < 1e-15) continue;
        const double mid = 0.5 * (za + zb), half = 0.5 * (zb - za);
        double s = 0.0;
        for (int i = 0; i < nodes_; ++i) {
            const double z = mid + half * gl_x_[i];
            s += gl_w_[i] * ramp(t + delta_ * z) * bump(z);
        }
        total += half * s;
    }
    return total;
}

double mollified_indicator_eval(const MollifiedIndicator& g, double t) { return g(t); }

DerivativeBoundReport derivative_bound_check(const MollifiedIndicator& g,
                                             std::span<const double> grid, double fd_step) {
    if (grid.empty()) throw std::invalid_argument("derivative_bound_check: empty grid");
    if (fd_step <= 0.0 || fd_step > g.delta() / 100.0)
        throw std::invalid_argument("derivative_bound_check: fd_step must lie in (0, delta/100]");
    const double h = fd_step;
    DerivativeBoundReport report;
    for (double t : grid) {
        const double gm2 = g(t - 2.0 * h), gm1 = g(t - h), g0 = g(t), gp1 = g(t + h),
                     gp2 = g(t + 2.0 * h);
        const double d1 = (gp1 - gm1) / (2.0 * h);
        const double d2 = (gp1 - 2.0 * g0 + gm1) / (h * h);
        const double d3 = (gp2 - 2.0 * gp1 + 2.0 * gm1 - gm2) / (2.0 * h * h * h);
        report.max_d1_scaled = std::max(report.max_d1_scaled, std::abs(d1) * g.delta());
        report.max_d2_scaled = std::max(report.max_d2_scaled, std::abs(d2) * g.delta() * g.delta());
        report.max_d3_scaled =
            std::max(report.max_d3_scaled, std::abs(d3) * g.delta() * g.delta() * g.delta());
    }
    if (report.max_d1_scaled > 1.05)
        throw numerical_error("derivative_bound_check: first-derivative bound |g'| <= 1/delta violated");
    return report;
}

}  // namespace couplab
