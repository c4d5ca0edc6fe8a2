#pragma once

#include <Eigen/Dense>

#include <vector>

#include "cpdcond/tensor.hpp"

namespace cpdcond {

/// Orthonormal basis of the orthogonal complement of a unit vector u,
/// returned as an n x (n-1) matrix. Built from the Householder reflector that
/// maps u to a multiple of e_1.
Eigen::MatrixXd orthonormal_complement(const Eigen::VectorXd& u);

/// Mode-k tangent block u^1 (x) ... (x) C (x) ... (x) u^d, one column per column of C.
Eigen::MatrixXd mode_block(const std::vector<Eigen::VectorXd>& factors, int k,
                           const Eigen::MatrixXd& complement);

/// Pi x (Sigma-1) matrix [L^1 | ... | L^d]: orthonormal basis of the orthogonal
/// complement of the unit rank-1 tensor inside its tangent space.
Eigen::MatrixXd tangent_directions(const Rank1Term& term);

/// Same, with caller-supplied complement bases (one n_k x (n_k-1) matrix per mode).
Eigen::MatrixXd tangent_directions(const Rank1Term& term,
                                   const std::vector<Eigen::MatrixXd>& complements);

struct TangentBasis {
    Rank1Term term;
    /// Pi x Sigma, columns [U | L^1 | ... | L^d], orthonormal.
    Eigen::MatrixXd columns;
};

TangentBasis tangent_basis(const Rank1Term& term);

struct TerraciniMatrix {
    Shape shape;
    int r = 0;
    /// Pi x (r Sigma), blocks ordered as the terms.
    Eigen::MatrixXd columns;
};

/// Terracini matrix [U_1 ... U_r]. Depends only on factor directions.
TerraciniMatrix terracini(const CPDecomposition& cpd);

/// k-rank: largest k such that every k columns are linearly independent.
/// Numerical rank uses tolerance 1e-10 times the largest singular value.
int k_rank(const Eigen::MatrixXd& columns, double rel_tol = 1e-10);

struct KruskalCertificate {
    std::vector<int> k_ranks;
    bool identifiable = false;
};

/// Kruskal's sufficient identifiability criterion for order-3 CPDs:
/// r <= (k_1 + k_2 + k_3 - 2) / 2 with every k_l > 1. Throws for d != 3.
KruskalCertificate kruskal_certificate(const CPDecomposition& cpd);
bool kruskal_certify(const CPDecomposition& cpd);

}  // namespace cpdcond
