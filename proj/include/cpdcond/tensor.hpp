#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpdcond/rng.hpp"

namespace cpdcond {

/// Dimensions n_1 x ... x n_d of a real tensor space. Every n_k >= 2, d >= 2.
class Shape {
public:
    Shape() = default;
    explicit Shape(std::vector<int> dims);

    /// Parses "AxBxC..." (e.g. "5x4x3").
    static Shape parse(std::string_view text);

    int order() const { return static_cast<int>(dims_.size()); }
    int dim(int k) const { return dims_[static_cast<std::size_t>(k)]; }
    const std::vector<int>& dims() const { return dims_; }

    /// Dimension of the Segre manifold: 1 + sum (n_k - 1).
    int sigma() const;
    /// Dimension of the ambient space: prod n_k.
    int pi() const;

    std::string to_string() const;

    friend bool operator==(const Shape&, const Shape&) = default;

private:
    std::vector<int> dims_;
};

/// (Sigma, Pi) of a shape.
std::pair<int, int> shape_constants(const Shape& shape);

/// True when r * Sigma == Pi.
bool is_perfect(const Shape& shape, int r);

/// Dense real tensor, row-major with the last index fastest.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, Eigen::VectorXd values);

    const Shape& shape() const { return shape_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }

    double operator()(const std::vector<int>& index) const;
    std::size_t flat_index(const std::vector<int>& index) const;

    double norm() const { return values_.norm(); }
    double inner(const DenseTensor& other) const;

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator*=(double s);

private:
    Shape shape_;
    Eigen::VectorXd values_;
};

/// Kronecker product of vectors in the row-major flattening convention:
/// entry (i_1,...,i_d) of u^1 (x) ... (x) u^d lands at the flat row-major index.
Eigen::VectorXd kron(const std::vector<Eigen::VectorXd>& vectors);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kron2(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                                               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// Dense tensor u^1 (x) ... (x) u^d. Throws on zero vectors or d < 2.
DenseTensor outer_product(const std::vector<Eigen::VectorXd>& vectors);

/// One summand lambda * u^1 (x) ... (x) u^d of a CPD, with lambda > 0 and
/// unit-norm factors.
struct Rank1Term {
    double scale = 1.0;
    std::vector<Eigen::VectorXd> factors;

    /// Builds a term from arbitrary nonzero vectors: norms go into the
    /// scale, and factors 2..d are sign-normalized (largest-magnitude entry
    /// positive) with the sign pushed into factor 1.
    static Rank1Term from_vectors(std::vector<Eigen::VectorXd> vectors);

    Shape shape() const;
    /// Unit rank-1 tensor u^1 (x) ... (x) u^d, flattened.
    Eigen::VectorXd unit_tensor() const;
    DenseTensor eval() const;
};

/// lambda_s * lambda_t * prod_k <u_s^k, u_t^k>.
double rank1_inner(const Rank1Term& s, const Rank1Term& t);

/// Ordered list of rank-1 terms over a common shape.
class CPDecomposition {
public:
    CPDecomposition() = default;
    CPDecomposition(Shape shape, std::vector<Rank1Term> terms);

    const Shape& shape() const { return shape_; }
    const std::vector<Rank1Term>& terms() const { return terms_; }
    int rank() const { return static_cast<int>(terms_.size()); }

    /// Factor matrix of mode k: column i is u_i^k.
    Eigen::MatrixXd factor_matrix(int k) const;

private:
    Shape shape_;
    std::vector<Rank1Term> terms_;
};

DenseTensor cpd_eval(const CPDecomposition& cpd);

DenseTensor random_gaussian_tensor(const Shape& shape, Rng& rng);

/// Random-output model: i.i.d. standard normal factor vectors, normalized,
/// with lambda the product of their norms.
CPDecomposition random_cpd(const Shape& shape, int r, Rng& rng);

inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kRenormalizeTolerance = 1e-6;

}  // namespace cpdcond
