#include <cmath>

#include "cpdcond/tensor.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpdcond;
using testing_support::unit_vector;

TEST_CASE("shape constants") {
    CHECK(shape_constants(Shape({2, 2, 2})) == std::pair{4, 8});
    CHECK(shape_constants(Shape({5, 4, 3})) == std::pair{10, 60});
    CHECK_THROWS_AS(Shape({5}), std::invalid_argument);
    CHECK_THROWS_AS(Shape({3, 1, 2}), std::invalid_argument);
    CHECK(Shape::parse("5x4x3") == Shape({5, 4, 3}));
    CHECK(Shape::parse("3x3x2").to_string() == "3x3x2");
    CHECK_THROWS_AS(Shape::parse("3xx2"), std::invalid_argument);
    CHECK_THROWS_AS(Shape::parse("abc"), std::invalid_argument);
    CHECK(is_perfect(Shape({5, 5, 2}), 5));
    CHECK_FALSE(is_perfect(Shape({3, 3, 3}), 4));
}

TEST_CASE("outer product") {
    const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(2, 0), e2 = Eigen::VectorXd::Unit(2, 1);
    const DenseTensor t = outer_product({e1, e1, e1});
    CHECK(t({0, 0, 0}) == 1.0);
    CHECK(t.values().cwiseAbs().sum() == 1.0);
    CHECK(outer_product({Eigen::VectorXd(2 * e1), e2}).norm() == doctest::Approx(2.0));
    CHECK_THROWS_AS(outer_product({e1, Eigen::VectorXd::Zero(2)}), std::invalid_argument);

    Rng rng(3);
    const Eigen::VectorXd u = unit_vector(3, rng), v = unit_vector(4, rng), w = unit_vector(2, rng);
    const DenseTensor x = outer_product({u, v, w});
    CHECK(std::abs(x.norm() - 1.0) < 1e-12);
    // entrywise definition, last index fastest
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 2; ++k) CHECK(x.values()(8 * i + 2 * j + k) == doctest::Approx(u(i) * v(j) * w(k)).epsilon(1e-15));
    // multilinearity in the middle slot
    CHECK((outer_product({u, Eigen::VectorXd(3.5 * v), w}).values() - 3.5 * x.values()).norm() < 1e-14);
}

TEST_CASE("rank-1 terms and inner products") {
    Rng rng(11);
    const Rank1Term s = Rank1Term::from_vectors({unit_vector(3, rng), unit_vector(3, rng), unit_vector(2, rng)});
    CHECK(rank1_inner(s, s) == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& f : s.factors) CHECK(std::abs(f.norm() - 1.0) <= kUnitTolerance);

    const Rank1Term a = Rank1Term::from_vectors({Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 3)});
    const Rank1Term b = Rank1Term::from_vectors({Eigen::Vector2d(0, 2), Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0)});
    CHECK(rank1_inner(a, b) == 0.0);

    for (int trial = 0; trial < 20; ++trial) {
        const Rank1Term x = Rank1Term::from_vectors({testing_support::gaussian_vector(3, rng), testing_support::gaussian_vector(2, rng),
                                                     testing_support::gaussian_vector(4, rng)});
        const Rank1Term y = Rank1Term::from_vectors({testing_support::gaussian_vector(3, rng), testing_support::gaussian_vector(2, rng),
                                                     testing_support::gaussian_vector(4, rng)});
        CHECK(std::abs(rank1_inner(x, y) - x.eval().inner(y.eval())) < 1e-12 * (1 + x.scale * y.scale));
    }
    const Rank1Term other = Rank1Term::from_vectors({unit_vector(2, rng), unit_vector(2, rng), unit_vector(2, rng)});
    CHECK_THROWS_AS(rank1_inner(s, other), std::invalid_argument);
}

TEST_CASE("sign convention keeps the scale positive") {
    const Rank1Term t = Rank1Term::from_vectors({Eigen::Vector2d(1, 1), Eigen::Vector2d(-2, 0), Eigen::Vector2d(0, -1)});
    CHECK(t.scale > 0);
    CHECK(t.scale == doctest::Approx(2 * std::sqrt(2.0)));
    const DenseTensor direct = outer_product({Eigen::Vector2d(1, 1), Eigen::Vector2d(-2, 0), Eigen::Vector2d(0, -1)});
    CHECK((t.eval().values() - direct.values()).norm() < 1e-14);
}

TEST_CASE("cpd evaluation") {
    const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(2, 0);
    const Shape shape({2, 2, 2});
    CHECK(cpd_eval(CPDecomposition(shape, {Rank1Term::from_vectors({e1, e1, e1})}))({0, 0, 0}) == 1.0);
    const Rank1Term p = Rank1Term::from_vectors({e1, e1, e1});
    const Rank1Term m = Rank1Term::from_vectors({-e1, e1, e1});
    CHECK(cpd_eval(CPDecomposition(shape, {p, m})).norm() == 0.0);

    Rng rng(5);
    const CPDecomposition cpd = random_cpd(shape, 2, rng);
    // entrywise oracle
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(8);
    for (const auto& t : cpd.terms())
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) expect(4 * i + 2 * j + k) += t.scale * t.factors[0](i) * t.factors[1](j) * t.factors[2](k);
    CHECK((cpd_eval(cpd).values() - expect).norm() < 1e-14);
    // order of terms does not matter
    const CPDecomposition swapped(shape, {cpd.terms()[1], cpd.terms()[0]});
    CHECK((cpd_eval(swapped).values() - cpd_eval(cpd).values()).norm() < 1e-14);
}

TEST_CASE("gaussian tensors") {
    const Shape shape({2, 2, 2});
    Rng a(42), b(42);
    CHECK(random_gaussian_tensor(shape, a).values() == random_gaussian_tensor(shape, b).values());

    Rng rng(99);
    const int n = 100000;
    double mean = 0, m2 = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const DenseTensor t = random_gaussian_tensor(shape, rng);
        mean += t({0, 0, 0});
        m2 += t({0, 0, 0}) * t({0, 0, 0});
        sq += t.norm() * t.norm();
    }
    mean /= n;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(m2 / n - mean * mean - 1.0) < 0.05);
    CHECK(sq / n >= 7.8);
    CHECK(sq / n <= 8.2);
}

TEST_CASE("random cpd") {
    const Shape shape({2, 2, 2});
    Rng a(1), b(1);
    const CPDecomposition x = random_cpd(shape, 3, a), y = random_cpd(shape, 3, b);
    for (int i = 0; i < 3; ++i) {
        CHECK(x.terms()[static_cast<std::size_t>(i)].scale == y.terms()[static_cast<std::size_t>(i)].scale);
        for (const auto& f : x.terms()[static_cast<std::size_t>(i)].factors) CHECK(std::abs(f.norm() - 1) <= kUnitTolerance);
    }

    // E lambda = (E |g|)^3 for g in R^2; E|g| by trapezoid quadrature of r^2 exp(-r^2/2) on [0, 12].
    double e_norm = 0;
    const int m = 200000;
    const double h = 12.0 / m;
    for (int i = 0; i <= m; ++i) {
        const double r = i * h;
        e_norm += (i == 0 || i == m ? 0.5 : 1.0) * r * r * std::exp(-r * r / 2);
    }
    e_norm *= h;
    Rng rng(7);
    double mean = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) mean += random_cpd(shape, 1, rng).terms()[0].scale;
    mean /= n;
    CHECK(mean == doctest::Approx(std::pow(e_norm, 3)).epsilon(0.02));
}
