#include "cpdcond/segre.hpp"

#include <cmath>
#include <stdexcept>

namespace cpdcond {

Eigen::MatrixXd orthonormal_complement(const Eigen::VectorXd& u) {
    const Eigen::Index n = u.size();
    if (n < 1 || std::abs(u.norm() - 1.0) > kRenormalizeTolerance) {
        throw std::invalid_argument("orthonormal_complement: input must be a unit vector");
    }
    // v = u + sign(u_0) e_1 keeps |v| away from zero.
    Eigen::VectorXd v = u;
    const double s = u(0) >= 0.0 ? 1.0 : -1.0;
    v(0) += s * u.norm();
    const double vv = v.squaredNorm();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - (2.0 / vv) * v * v.transpose();
    return h.rightCols(n - 1);
}

Eigen::MatrixXd mode_block(const std::vector<Eigen::VectorXd>& factors, int k,
                           const Eigen::MatrixXd& complement) {
    std::vector<Eigen::VectorXd> parts = factors;
    const auto kk = static_cast<std::size_t>(k);
    Eigen::Index rows = 1;
    for (const auto& f : factors) rows *= f.size();
    Eigen::MatrixXd block(rows, complement.cols());
    for (Eigen::Index j = 0; j < complement.cols(); ++j) {
        parts[kk] = complement.col(j);
        block.col(j) = kron(parts);
    }
    return block;
}

Eigen::MatrixXd tangent_directions(const Rank1Term& term,
                                   const std::vector<Eigen::MatrixXd>& complements) {
    const int d = static_cast<int>(term.factors.size());
    Eigen::Index rows = 1;
    Eigen::Index cols = 0;
    for (int k = 0; k < d; ++k) {
        rows *= term.factors[static_cast<std::size_t>(k)].size();
        cols += complements[static_cast<std::size_t>(k)].cols();
    }
    Eigen::MatrixXd out(rows, cols);
    Eigen::Index c = 0;
    for (int k = 0; k < d; ++k) {
        const auto& comp = complements[static_cast<std::size_t>(k)];
        out.middleCols(c, comp.cols()) = mode_block(term.factors, k, comp);
        c += comp.cols();
    }
    return out;
}

Eigen::MatrixXd tangent_directions(const Rank1Term& term) {
    std::vector<Eigen::MatrixXd> complements;
    complements.reserve(term.factors.size());
    for (const auto& f : term.factors) complements.push_back(orthonormal_complement(f));
    return tangent_directions(term, complements);
}

TangentBasis tangent_basis(const Rank1Term& term) {
    const Eigen::MatrixXd dirs = tangent_directions(term);
    TangentBasis basis{term, Eigen::MatrixXd(dirs.rows(), dirs.cols() + 1)};
    basis.columns.col(0) = term.unit_tensor();
    basis.columns.rightCols(dirs.cols()) = dirs;
    return basis;
}

TerraciniMatrix terracini(const CPDecomposition& cpd) {
    const int sigma = cpd.shape().sigma();
    TerraciniMatrix t{cpd.shape(), cpd.rank(), Eigen::MatrixXd(cpd.shape().pi(), cpd.rank() * sigma)};
    for (int i = 0; i < cpd.rank(); ++i) {
        t.columns.middleCols(i * sigma, sigma) = tangent_basis(cpd.terms()[static_cast<std::size_t>(i)]).columns;
    }
    return t;
}

namespace {

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) ++rank;
    }
    return rank;
}

// Calls f(indices) for every k-subset of {0..n-1}; stops early when f returns false.
template <typename F>
bool for_each_subset(int n, int k, F&& f) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        if (!f(idx)) return false;
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return true;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace

int k_rank(const Eigen::MatrixXd& columns, double rel_tol) {
    const int n = static_cast<int>(columns.cols());
    int best = 0;
    for (int k = 1; k <= n; ++k) {
        const bool all_independent = for_each_subset(n, k, [&](const std::vector<int>& idx) {
            Eigen::MatrixXd sub(columns.rows(), k);
            for (int j = 0; j < k; ++j) sub.col(j) = columns.col(idx[static_cast<std::size_t>(j)]);
            return numerical_rank(sub, rel_tol) == k;
        });
        if (!all_independent) break;
        best = k;
    }
    return best;
}

KruskalCertificate kruskal_certificate(const CPDecomposition& cpd) {
    if (cpd.shape().order() != 3) {
        throw std::invalid_argument("kruskal_certify: only order-3 decompositions are supported");
    }
    KruskalCertificate cert;
    for (int k = 0; k < 3; ++k) cert.k_ranks.push_back(k_rank(cpd.factor_matrix(k)));
    const int sum = cert.k_ranks[0] + cert.k_ranks[1] + cert.k_ranks[2];
    const bool all_gt_one = cert.k_ranks[0] > 1 && cert.k_ranks[1] > 1 && cert.k_ranks[2] > 1;
    cert.identifiable = all_gt_one && 2 * cpd.rank() <= sum - 2;
    return cert;
}

bool kruskal_certify(const CPDecomposition& cpd) { return kruskal_certificate(cpd).identifiable; }

}  // namespace cpdcond
