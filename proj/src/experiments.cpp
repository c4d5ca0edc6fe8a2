#include "cpdcond/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cpdcond/io.hpp"

namespace cpdcond {

EmpiricalCCDF::EmpiricalCCDF(std::vector<double> values) : sorted_(std::move(values)) {
    if (sorted_.empty()) throw InsufficientData("empirical_ccdf: no values", 0);
    for (double v : sorted_) {
        if (!(std::isfinite(v) && v > 0.0)) throw std::invalid_argument("empirical_ccdf: values must be finite and positive");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCCDF::operator()(double x) const {
    const auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(above) / static_cast<double>(sorted_.size());
}

double EmpiricalCCDF::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in [0, 1]");
    // smallest order statistic x_(k) with (n - 1 - k) / n <= p
    const double n = static_cast<double>(sorted_.size());
    const double k = std::max(0.0, std::ceil(n - 1.0 - p * n - 1e-9));
    return sorted_[std::min(static_cast<std::size_t>(k), sorted_.size() - 1)];
}

std::vector<std::pair<double, double>> EmpiricalCCDF::points() const {
    std::vector<std::pair<double, double>> pts;
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
        if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;  // last of a tie run
        pts.emplace_back(sorted_[i], static_cast<double>(sorted_.size() - i - 1) / n);
    }
    return pts;
}

EmpiricalCCDF empirical_ccdf(std::vector<double> values) { return EmpiricalCCDF(std::move(values)); }

std::size_t remove_non_finite(std::vector<double>& values) {
    const auto before = values.size();
    std::erase_if(values, [](double v) { return !std::isfinite(v); });
    return before - values.size();
}

TailFit fit_tail(const EmpiricalCCDF& ccdf, double c_low, double c_high) {
    if (!(c_low > 0.0 && c_low < c_high)) throw std::invalid_argument("fit_tail: need 0 < c_low < c_high");
    std::vector<double> lx, lc;
    for (const auto& [x, c] : ccdf.points()) {
        if (c >= c_low && c <= c_high) {
            lx.push_back(std::log(x));
            lc.push_back(std::log(c));
        }
    }
    const auto m = lx.size();
    if (m < static_cast<std::size_t>(kMinTailPoints)) {
        throw InsufficientData("fit_tail: only " + std::to_string(m) + " CCDF points with " +
                                   format_double(c_low) + " <= c <= " + format_double(c_high) + " (need " +
                                   std::to_string(kMinTailPoints) + ")",
                               m);
    }
    const double n = static_cast<double>(m);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += lx[i];
        my += lc[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (lc[i] - my);
        syy += (lc[i] - my) * (lc[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientData("fit_tail: all tail points share one abscissa", m);
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = lc[i] - (intercept + slope * lx[i]);
        sse += e * e;
    }
    TailFit fit;
    fit.a = std::exp(intercept);
    fit.b = -slope;
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.c_low = c_low;
    fit.c_high = c_high;
    fit.points_used = static_cast<int>(m);
    return fit;
}

double barnes_g(int n) {
    if (n < 1) throw std::invalid_argument("barnes_g: argument must be a positive integer");
    double g = 1.0, fact = 1.0;
    for (int k = 1; k <= n - 2; ++k) {
        fact *= k;
        g *= fact;
    }
    return g;
}

double bf_probability(int n) {
    if (n < 2) throw std::invalid_argument("bf_probability: n must be at least 2");
    // log G(n+1) = sum_{k=1}^{n-1} log k!
    double log_g = 0.0;
    for (int k = 1; k <= n - 1; ++k) log_g += std::lgamma(k + 1.0);
    return std::exp(n * std::lgamma((n + 1) / 2.0) - log_g);
}

TruncatedMean truncated_mean(const std::vector<double>& values, const TailFit& fit, double kappa0) {
    if (values.empty()) throw InsufficientData("truncated_mean: no values", 0);
    TruncatedMean out;
    if (fit.b <= 1.0) {
        out.infinite = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    double body = 0.0;
    for (double v : values) {
        if (v <= kappa0) body += v;
    }
    body /= static_cast<double>(values.size());
    out.value = body + fit.a * fit.b * std::pow(kappa0, 1.0 - fit.b) / (fit.b - 1.0);
    return out;
}

nlohmann::json tail_fit_json(const TailFit& fit, const std::string& shape, int r, const std::string& which,
                             std::size_t excluded_inf) {
    return {{"shape", shape},           {"r", r},
            {"which", which},           {"a", fit.a},
            {"b", fit.b},               {"r2", fit.r_squared},
            {"points_used", fit.points_used}, {"excluded_inf", excluded_inf},
            {"c_range", {fit.c_low, fit.c_high}}};
}

void write_ccdf_csv(std::ostream& os, const EmpiricalCCDF& ccdf) {
    os << "x,c\n";
    for (const auto& [x, c] : ccdf.points()) os << format_double(x) << ',' << format_double(c) << '\n';
}

}  // namespace cpdcond
