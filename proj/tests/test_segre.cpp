#include <cmath>

#include "cpdcond/condition.hpp"
#include "cpdcond/segre.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpdcond;
using testing_support::random_orthogonal;
using testing_support::unit_vector;

namespace {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) { return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues(); }

}  // namespace

TEST_CASE("orthonormal complement") {
    const Eigen::MatrixXd c = orthonormal_complement(Eigen::Vector3d(1, 0, 0));
    CHECK(c.rows() == 3);
    CHECK(c.cols() == 2);
    CHECK((c.transpose() * c - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
    CHECK(c.row(0).norm() < 1e-14);

    Rng rng(2);
    for (int n = 2; n <= 6; ++n) {
        const Eigen::VectorXd u = unit_vector(n, rng);
        const Eigen::MatrixXd q = orthonormal_complement(u);
        CHECK((u.transpose() * q).norm() <= 1e-14);
        Eigen::MatrixXd full(n, n);
        full << u, q;
        CHECK(std::abs(std::abs(full.determinant()) - 1.0) < 1e-12);
        CHECK(orthonormal_complement(u) == q);
    }
    CHECK_THROWS_AS(orthonormal_complement(Eigen::Vector3d::Zero()), std::invalid_argument);
    CHECK_THROWS_AS(orthonormal_complement(Eigen::Vector3d(1, 1, 0)), std::invalid_argument);
}

TEST_CASE("tangent basis") {
    const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(2, 0);
    const TangentBasis b = tangent_basis(Rank1Term::from_vectors({e1, e1, e1}));
    REQUIRE(b.columns.cols() == 4);
    // columns are +-e111, e211, e121, e112 (flat indices 0, 4, 2, 1)
    const int expect[] = {0, 4, 2, 1};
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(b.columns(expect[j], j)) == doctest::Approx(1.0));
        CHECK(b.columns.col(j).cwiseAbs().sum() == doctest::Approx(1.0));
    }

    Rng rng(8);
    const Shape shape({4, 3, 2});
    for (int trial = 0; trial < 10; ++trial) {
        const Rank1Term t = testing_support::term_of({unit_vector(4, rng), unit_vector(3, rng), unit_vector(2, rng)});
        const Eigen::MatrixXd c = tangent_basis(t).columns;
        CHECK(c.cols() == shape.sigma());
        CHECK((c.transpose() * c - Eigen::MatrixXd::Identity(shape.sigma(), shape.sigma())).norm() < 1e-10);
        CHECK((c.col(0) - t.unit_tensor()).norm() < 1e-14);

        // another complement choice spans the same space
        std::vector<Eigen::MatrixXd> other;
        for (const auto& f : t.factors) {
            const int n = static_cast<int>(f.size());
            Eigen::MatrixXd q = orthonormal_complement(f) * random_orthogonal(n - 1, rng);
            other.push_back(q);
        }
        Eigen::MatrixXd alt(c.rows(), c.cols());
        alt << t.unit_tensor(), tangent_directions(t, other);
        CHECK((c * c.transpose() - alt * alt.transpose()).norm() < 1e-10);
    }
}

TEST_CASE("terracini matrix") {
    Rng rng(21);
    const Shape shape({3, 3, 2});
    const CPDecomposition one = random_cpd(shape, 1, rng);
    CHECK(sigma_min(terracini(one).columns) == doctest::Approx(1.0).epsilon(1e-12));

    // cross-orthogonal pair: Gram is the identity
    std::vector<Eigen::VectorXd> u, v;
    for (int k = 0; k < 3; ++k) {
        const Eigen::MatrixXd q = random_orthogonal(shape.dim(k), rng);
        u.push_back(q.col(0));
        v.push_back(q.col(1));
    }
    const CPDecomposition orth(shape, {testing_support::term_of(u), testing_support::term_of(v)});
    const Eigen::MatrixXd t = terracini(orth).columns;
    CHECK((t.transpose() * t - Eigen::MatrixXd::Identity(t.cols(), t.cols())).norm() < 1e-10);

    const Rank1Term a = random_cpd(Shape({2, 2, 2}), 1, rng).terms()[0];
    CHECK(sigma_min(terracini(CPDecomposition(Shape({2, 2, 2}), {a, a})).columns) < 1e-8);
}

TEST_CASE("orthogonal equivariance and scale independence") {
    Rng rng(4);
    const Shape shape({3, 2, 2});
    const CPDecomposition cpd = random_cpd(shape, 2, rng);
    std::vector<Eigen::MatrixXd> q;
    for (int k = 0; k < shape.order(); ++k) q.push_back(random_orthogonal(shape.dim(k), rng));
    std::vector<Rank1Term> rotated;
    for (const auto& t : cpd.terms()) {
        std::vector<Eigen::VectorXd> f;
        for (int k = 0; k < shape.order(); ++k) f.push_back(q[static_cast<std::size_t>(k)] * t.factors[static_cast<std::size_t>(k)]);
        f[0] *= t.scale;
        rotated.push_back(Rank1Term::from_vectors(f));
    }
    const Eigen::VectorXd s0 = singular_values(terracini(cpd).columns);
    const Eigen::VectorXd s1 = singular_values(terracini(CPDecomposition(shape, rotated)).columns);
    CHECK((s0 - s1).cwiseAbs().maxCoeff() <= 1e-10);

    std::vector<Rank1Term> scaled = cpd.terms();
    for (auto& t : scaled) t.scale *= 7.3;
    CHECK(terracini(CPDecomposition(shape, scaled)).columns == terracini(cpd).columns);
}

TEST_CASE("kruskal certificate") {
    Rng rng(13);
    // brute-force k-rank oracle on small factor matrices
    auto brute_k_rank = [](const Eigen::MatrixXd& m) {
        const int r = static_cast<int>(m.cols());
        int best = 0;
        for (int k = 1; k <= r; ++k) {
            bool all = true;
            for (int mask = 0; mask < (1 << r) && all; ++mask) {
                if (__builtin_popcount(static_cast<unsigned>(mask)) != k) continue;
                Eigen::MatrixXd sub(m.rows(), k);
                int c = 0;
                for (int j = 0; j < r; ++j)
                    if (mask & (1 << j)) sub.col(c++) = m.col(j);
                all = Eigen::FullPivLU<Eigen::MatrixXd>(sub).rank() == k;
            }
            if (!all) break;
            best = k;
        }
        return best;
    };

    const CPDecomposition generic = random_cpd(Shape({2, 2, 2}), 2, rng);
    const KruskalCertificate c = kruskal_certificate(generic);
    CHECK(c.k_ranks == std::vector<int>{2, 2, 2});
    CHECK(c.identifiable);
    for (int k = 0; k < 3; ++k) CHECK(c.k_ranks[static_cast<std::size_t>(k)] == brute_k_rank(generic.factor_matrix(k)));

    std::vector<Rank1Term> terms = generic.terms();
    terms[1].factors[0] = terms[0].factors[0];
    const KruskalCertificate shared = kruskal_certificate(CPDecomposition(Shape({2, 2, 2}), terms));
    CHECK(shared.k_ranks[0] == 1);
    CHECK_FALSE(shared.identifiable);

    const CPDecomposition big = random_cpd(Shape({3, 3, 3}), 4, rng);
    const KruskalCertificate cb = kruskal_certificate(big);
    for (int k = 0; k < 3; ++k) CHECK(cb.k_ranks[static_cast<std::size_t>(k)] == brute_k_rank(big.factor_matrix(k)));
    CHECK_FALSE(kruskal_certify(big));

    CHECK_THROWS_AS(kruskal_certify(random_cpd(Shape({2, 2, 2, 2}), 2, rng)), std::invalid_argument);
}
