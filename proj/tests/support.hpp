#pragma once

// Test-only oracles shared by several suites.

#include <Eigen/Dense>

#include "cpdcond/rng.hpp"
#include "cpdcond/tensor.hpp"

namespace testing_support {

inline Eigen::VectorXd gaussian_vector(int n, cpdcond::Rng& rng) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

inline Eigen::VectorXd unit_vector(int n, cpdcond::Rng& rng) { return gaussian_vector(n, rng).normalized(); }

// Haar-ish orthogonal matrix from the QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(int n, cpdcond::Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    return q;
}

inline cpdcond::Rank1Term term_of(std::vector<Eigen::VectorXd> v) { return cpdcond::Rank1Term::from_vectors(std::move(v)); }

// Cayley's hyperdeterminant of a 2x2x2 tensor (row-major, index 4i + 2j + k).
// Positive: real rank 2; negative: real rank 3 (generic case).
inline double cayley_hyperdeterminant(const Eigen::VectorXd& a) {
    auto A = [&](int i, int j, int k) { return a(4 * i + 2 * j + k); };
    const double a000 = A(0, 0, 0), a001 = A(0, 0, 1), a010 = A(0, 1, 0), a011 = A(0, 1, 1);
    const double a100 = A(1, 0, 0), a101 = A(1, 0, 1), a110 = A(1, 1, 0), a111 = A(1, 1, 1);
    return a000 * a000 * a111 * a111 + a001 * a001 * a110 * a110 + a010 * a010 * a101 * a101 +
           a100 * a100 * a011 * a011 -
           2 * (a000 * a001 * a110 * a111 + a000 * a010 * a101 * a111 + a000 * a100 * a011 * a111 +
                a001 * a010 * a101 * a110 + a001 * a100 * a011 * a110 + a010 * a100 * a011 * a101) +
           4 * (a000 * a011 * a101 * a110 + a001 * a010 * a100 * a111);
}

// Smallest relative distance between the term tensors of two decompositions,
// matched greedily (terms are well separated in the tests that use this).
inline double term_match_error(const cpdcond::CPDecomposition& a, const cpdcond::CPDecomposition& b) {
    if (a.rank() != b.rank()) return 1e300;
    std::vector<bool> used(static_cast<std::size_t>(b.rank()), false);
    double worst = 0.0;
    for (const auto& ta : a.terms()) {
        const Eigen::VectorXd x = ta.eval().values();
        double best = 1e300;
        int best_j = -1;
        for (int j = 0; j < b.rank(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double e = (x - b.terms()[static_cast<std::size_t>(j)].eval().values()).norm() / x.norm();
            if (e < best) {
                best = e;
                best_j = j;
            }
        }
        used[static_cast<std::size_t>(best_j)] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace testing_support
