#include <cmath>
#include <numbers>
#include <sstream>

#include "cpdcond/experiments.hpp"
#include "cpdcond/rng.hpp"
#include "doctest.h"

using namespace cpdcond;

namespace {

// Exact power law c(x) = a x^{-b} realised by inverse-CDF order statistics.
std::vector<double> power_law(double a, double b, int n) {
    std::vector<double> v;
    for (int k = 1; k <= n; ++k) v.push_back(std::pow(static_cast<double>(k) / n, -1.0 / b) * std::pow(a, 1.0 / b));
    return v;
}

}  // namespace

TEST_CASE("empirical CCDF") {
    const EmpiricalCCDF c({3, 1, 2});
    CHECK(c(1.5) == doctest::Approx(2.0 / 3.0));
    CHECK(c(0.5) == 1.0);
    CHECK(c(3) == 0.0);
    CHECK(c(0) == 1.0);
    CHECK_THROWS_AS(EmpiricalCCDF({}), InsufficientData);
    CHECK_THROWS_AS(EmpiricalCCDF({1.0, -2.0}), std::invalid_argument);

    Rng rng(1);
    std::vector<double> v;
    for (int i = 0; i < 500; ++i) v.push_back(std::exp(rng.normal()));
    const EmpiricalCCDF e(v);
    for (int t = 0; t < 100; ++t) {
        const double x = std::exp(2 * rng.normal());
        int above = 0;
        for (double s : v) above += s > x;
        CHECK(e(x) == doctest::Approx(above / 500.0));
    }
    for (int t = 0; t < 100; ++t) {
        const double p = rng.uniform();
        const double cq = e(e.quantile(p));
        CHECK(cq <= p + 1e-12);
        CHECK(cq >= p - 1.0 / 500 - 1e-12);
    }
    std::vector<double> with_inf = {1.0, INFINITY, 2.0, INFINITY};
    CHECK(remove_non_finite(with_inf) == 2);
    CHECK(with_inf.size() == 2);
}

TEST_CASE("tail fit") {
    const std::vector<double> v = power_law(2.0, 1.8, 100000);
    const TailFit f = fit_tail(EmpiricalCCDF(v));
    CHECK(std::abs(f.b - 1.8) <= 0.05);
    CHECK(f.r_squared >= 0.999);
    CHECK(f.points_used >= 10);
    CHECK(f.a == doctest::Approx(2.0).epsilon(0.05));

    // scale equivariance
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= 3.7;
    const TailFit g = fit_tail(EmpiricalCCDF(scaled));
    CHECK(std::abs(g.b - f.b) <= 1e-10);
    CHECK(g.a == doctest::Approx(f.a * std::pow(3.7, f.b)).epsilon(1e-9));

    // too few points in the tail window
    try {
        fit_tail(EmpiricalCCDF(power_law(1.0, 1.0, 60)));
        FAIL("expected refusal");
    } catch (const InsufficientData& e) {
        CHECK(e.count < 10);
    }

    const nlohmann::json j = tail_fit_json(f, "2x2x2", 2, "angular", 3);
    for (const char* key : {"shape", "r", "which", "a", "b", "r2", "points_used", "excluded_inf"}) CHECK(j.contains(key));
    CHECK(j["excluded_inf"] == 3);

    std::ostringstream os;
    write_ccdf_csv(os, EmpiricalCCDF({1.0, 2.0, 2.0}));
    CHECK(os.str() == "x,c\n1,0.6666666666666666\n2,0\n");
}

TEST_CASE("Barnes G and real-rank probabilities") {
    CHECK(barnes_g(2) == 1.0);
    CHECK(barnes_g(3) == 1.0);
    CHECK(barnes_g(6) == 288.0);
    CHECK_THROWS_AS(barnes_g(0), std::invalid_argument);

    const double pi = std::numbers::pi;
    CHECK(std::abs(bf_probability(2) - pi / 4) <= 1e-12);
    CHECK(std::abs(bf_probability(3) - 0.5) <= 1e-12);
    CHECK(std::abs(bf_probability(4) - 27 * pi * pi / 1024) <= 1e-12);
    CHECK(std::abs(bf_probability(5) - 1.0 / 9) <= 1e-12);
    // the product form agrees with the log-gamma form
    for (int n = 2; n <= 10; ++n) {
        CHECK(bf_probability(n) == doctest::Approx(std::pow(std::tgamma((n + 1) / 2.0), n) / barnes_g(n + 1)).epsilon(1e-12));
        CHECK(bf_probability(n) > 0);
        CHECK(bf_probability(n) < 1);
        if (n > 2) CHECK(bf_probability(n) < bf_probability(n - 1));
    }
}

TEST_CASE("tail-truncated mean") {
    // Pareto(b = 2, a = 1) on [1, inf): mean 2
    const std::vector<double> v = power_law(1.0, 2.0, 200000);
    const EmpiricalCCDF c(v);
    const TailFit f = fit_tail(c);
    const TruncatedMean m = truncated_mean(v, f, c.quantile(0.1));
    CHECK_FALSE(m.infinite);
    CHECK(m.value == doctest::Approx(2.0).epsilon(0.05));

    TailFit heavy = f;
    heavy.b = 0.69;
    CHECK(truncated_mean(v, heavy, 3.0).infinite);
    heavy.b = 1.86;
    CHECK_FALSE(truncated_mean(v, heavy, 3.0).infinite);
}
