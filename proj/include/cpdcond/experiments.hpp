#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace cpdcond {

/// Raised when a fit or estimate lacks data; carries the number of usable points.
struct InsufficientData : std::runtime_error {
    InsufficientData(const std::string& what, std::size_t available)
        : std::runtime_error(what), count(available) {}
    std::size_t count;
};

/// Order-statistics CCDF c(x) = #{v > x} / n of finite positive values.
class EmpiricalCCDF {
public:
    explicit EmpiricalCCDF(std::vector<double> values);

    double operator()(double x) const;
    /// Tail quantile: smallest sample value x with c(x) <= p (so quantile(0.1) is the 90th percentile).
    double quantile(double p) const;

    const std::vector<double>& sorted_values() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

    /// (x, c(x)) at each distinct sample value, ascending in x.
    std::vector<std::pair<double, double>> points() const;

private:
    std::vector<double> sorted_;
};

EmpiricalCCDF empirical_ccdf(std::vector<double> values);

/// Drops +inf (and any non-finite) entries; returns how many were removed.
std::size_t remove_non_finite(std::vector<double>& values);

struct TailFit {
    double a = 0.0;
    double b = 0.0;
    double r_squared = 0.0;
    double c_low = 1e-3;
    double c_high = 1e-1;
    int points_used = 0;
};

inline constexpr int kMinTailPoints = 10;

/// Least-squares line through (log x, log c(x)) over the CCDF points with
/// c_low <= c(x) <= c_high; a = exp(intercept), b = -slope, R^2 in log space.
/// Throws InsufficientData with fewer than 10 points in range.
TailFit fit_tail(const EmpiricalCCDF& ccdf, double c_low = 1e-3, double c_high = 1e-1);

/// Barnes G at positive integers: G(n) = prod_{k=1}^{n-2} k!.
double barnes_g(int n);

/// Probability that a Gaussian n x n x 2 tensor has real rank n:
/// Gamma((n+1)/2)^n / G(n+1).
double bf_probability(int n);

struct TruncatedMean {
    bool infinite = false;
    double value = 0.0;
};

/// sum_{v <= kappa0} v / n + a b kappa0^{1-b} / (b - 1); infinite when b <= 1.
TruncatedMean truncated_mean(const std::vector<double>& values, const TailFit& fit, double kappa0);

nlohmann::json tail_fit_json(const TailFit& fit, const std::string& shape, int r, const std::string& which,
                             std::size_t excluded_inf);

/// Two-column CSV "x,c" of the CCDF points.
void write_ccdf_csv(std::ostream& os, const EmpiricalCCDF& ccdf);

}  // namespace cpdcond
