#pragma once

#include <span>
#include <utility>
#include <vector>

#include "couplab/common.hpp"

namespace couplab {

/// Numerically stable smooth maximum
///   F_beta(x) = beta^{-1} log sum_j exp(beta (x_j + mu_bar_j)).
/// With y = x + mu_bar it satisfies max_j y_j <= F_beta(x) <= max_j y_j + log(p)/beta.
double softmax(std::span<const double> x, double beta, std::span<const double> mu_bar = {});

/// Smoothed indicator of a finite union of closed intervals:
///   g(t) = int h(t + delta z) phi(z) dz,
/// h(t) = (1 - dist(t, A^delta)/delta)_+ and phi the compactly supported bump
/// C exp(1/(z^2-1)) on |z| < 1. Then 1_A <= g <= 1_{A^{3 delta}}, g in [0,1].
class MollifiedIndicator {
  public:
    MollifiedIndicator(std::vector<std::pair<double, double>> intervals, double delta,
                       int quadrature_nodes = 201);

    double operator()(double t) const;
    double delta() const { return delta_; }
    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

    /// Distance from t to the delta-enlargement A^delta (exact).
    double distance_to_enlargement(double t) const;
    /// The pre-smoothing ramp h(t); piecewise linear.
    double ramp(double t) const;

  private:
    std::vector<std::pair<double, double>> intervals_;           // merged, sorted
    std::vector<std::pair<double, double>> intervals_enlarged_;  // A^delta, merged
    double delta_;
    int nodes_;
    Vec gl_x_, gl_w_;       // Gauss-Legendre rule on [-1, 1]
    double bump_norm_;      // C with int phi = 1
    Vec breakpoints_;       // kinks of h, sorted

    double bump(double z) const;
};

double mollified_indicator_eval(const MollifiedIndicator& g, double t);

struct DerivativeBoundReport {
    double max_d1_scaled = 0.0;  // max |g'|   * delta
    double max_d2_scaled = 0.0;  // max |g''|  * delta^2
    double max_d3_scaled = 0.0;  // max |g'''| * delta^3
};

/// Central finite differences of orders 1-3 over the grid; asserts the
/// first-order bound max|g'| * delta <= 1.05 and reports the scaled maxima.
DerivativeBoundReport derivative_bound_check(const MollifiedIndicator& g,
                                             std::span<const double> grid, double fd_step);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Vec& x, Vec& w);

}  // namespace couplab
