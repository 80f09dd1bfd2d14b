#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace couplab {

inline constexpr const char* kVersion = "0.1.0";

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Bad or unresolvable configuration (exit code 2 at the CLI).
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure with diagnostics (exit code 3 at the CLI).
class numerical_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeding. All randomness flows from an explicit 64-bit seed; parallel work
// items derive their own stream via mix_seed so results do not depend on the
// thread count or iteration order.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
    return splitmix64(splitmix64(base ^ 0x6a09e667f3bcc909ULL) ^ splitmix64(stream) ^ splitmix64(index * 0x2545f4914f6cdd1dULL + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
    return std::mt19937_64(mix_seed(base, stream, index));
}

// ---------------------------------------------------------------------------
// Small statistics helpers shared across modules.
// ---------------------------------------------------------------------------

double mean(const Vec& v);
double sample_variance(const Vec& v);

/// Two-sample Kolmogorov noise band at the ~5% scale: 1.36 * sqrt(1/m + 1/m').
inline double ks_band(std::size_t m1, std::size_t m2) {
    return 1.36 * std::sqrt(1.0 / static_cast<double>(m1) + 1.0 / static_cast<double>(m2));
}

double quantile_sorted(const Vec& sorted, double q);

/// Standard normal CDF.
double norm_cdf(double x);

/// Runs fn(0..count-1) on a pool of `threads` workers (0 = hardware default).
/// Work items must be independent; results should be written to per-index slots.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace couplab
