#include "cpdcond/tensor.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cpdcond {

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("Shape: order must be at least 2");
    for (int n : dims_) {
        if (n < 2) throw std::invalid_argument("Shape: every dimension must be at least 2");
    }
}

Shape Shape::parse(std::string_view text) {
    std::vector<int> dims;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t next = text.find_first_of("xX", pos);
        if (next == std::string_view::npos) next = text.size();
        std::string_view part = text.substr(pos, next - pos);
        int value = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
            throw std::invalid_argument("malformed shape '" + std::string(text) + "'");
        }
        dims.push_back(value);
        pos = next + 1;
    }
    return Shape(std::move(dims));
}

int Shape::sigma() const {
    int s = 1;
    for (int n : dims_) s += n - 1;
    return s;
}

int Shape::pi() const {
    return std::accumulate(dims_.begin(), dims_.end(), 1, std::multiplies<>());
}

std::string Shape::to_string() const {
    std::string out;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (k) out += 'x';
        out += std::to_string(dims_[k]);
    }
    return out;
}

std::pair<int, int> shape_constants(const Shape& shape) { return {shape.sigma(), shape.pi()}; }

bool is_perfect(const Shape& shape, int r) { return r >= 1 && r * shape.sigma() == shape.pi(); }

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), values_(Eigen::VectorXd::Zero(shape_.pi())) {}

DenseTensor::DenseTensor(Shape shape, Eigen::VectorXd values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != shape_.pi()) {
        throw std::invalid_argument("DenseTensor: value count does not match shape " +
                                    shape_.to_string());
    }
}

std::size_t DenseTensor::flat_index(const std::vector<int>& index) const {
    if (static_cast<int>(index.size()) != shape_.order()) {
        throw std::invalid_argument("DenseTensor: index order mismatch");
    }
    std::size_t flat = 0;
    for (int k = 0; k < shape_.order(); ++k) {
        const int i = index[static_cast<std::size_t>(k)];
        if (i < 0 || i >= shape_.dim(k)) throw std::out_of_range("DenseTensor: index out of range");
        flat = flat * static_cast<std::size_t>(shape_.dim(k)) + static_cast<std::size_t>(i);
    }
    return flat;
}

double DenseTensor::operator()(const std::vector<int>& index) const {
    return values_(static_cast<Eigen::Index>(flat_index(index)));
}

double DenseTensor::inner(const DenseTensor& other) const {
    if (!(shape_ == other.shape_)) throw std::invalid_argument("DenseTensor: shape mismatch");
    return values_.dot(other.values_);
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (!(shape_ == other.shape_)) throw std::invalid_argument("DenseTensor: shape mismatch");
    values_ += other.values_;
    return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
    values_ *= s;
    return *this;
}

Eigen::VectorXd kron(const std::vector<Eigen::VectorXd>& vectors) {
    if (vectors.empty()) return Eigen::VectorXd::Ones(1);
    Eigen::VectorXd out = vectors.front();
    for (std::size_t k = 1; k < vectors.size(); ++k) out = kron2<double>(out, vectors[k]);
    return out;
}

DenseTensor outer_product(const std::vector<Eigen::VectorXd>& vectors) {
    std::vector<int> dims;
    for (const auto& v : vectors) {
        if (v.size() == 0 || v.norm() == 0.0) {
            throw std::invalid_argument("outer_product: zero vector is not a rank-1 factor");
        }
        dims.push_back(static_cast<int>(v.size()));
    }
    return DenseTensor(Shape(std::move(dims)), kron(vectors));
}

namespace {

// Flips v so that its largest-magnitude entry is positive; returns the sign applied.
double canonical_sign(const Eigen::VectorXd& v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    return v(imax) < 0.0 ? -1.0 : 1.0;
}

}  // namespace

Rank1Term Rank1Term::from_vectors(std::vector<Eigen::VectorXd> vectors) {
    if (vectors.size() < 2) throw std::invalid_argument("Rank1Term: order must be at least 2");
    Rank1Term term;
    term.scale = 1.0;
    double sign = 1.0;
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        const double n = vectors[k].norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw std::invalid_argument("Rank1Term: factor vectors must be nonzero and finite");
        }
        term.scale *= n;
        vectors[k] /= n;
        if (k > 0) {
            const double s = canonical_sign(vectors[k]);
            vectors[k] *= s;
            sign *= s;
        }
    }
    vectors[0] *= sign;
    term.factors = std::move(vectors);
    return term;
}

Shape Rank1Term::shape() const {
    std::vector<int> dims;
    dims.reserve(factors.size());
    for (const auto& f : factors) dims.push_back(static_cast<int>(f.size()));
    return Shape(std::move(dims));
}

Eigen::VectorXd Rank1Term::unit_tensor() const { return kron(factors); }

DenseTensor Rank1Term::eval() const { return DenseTensor(shape(), scale * unit_tensor()); }

double rank1_inner(const Rank1Term& s, const Rank1Term& t) {
    if (s.factors.size() != t.factors.size()) throw std::invalid_argument("rank1_inner: order mismatch");
    double p = s.scale * t.scale;
    for (std::size_t k = 0; k < s.factors.size(); ++k) {
        if (s.factors[k].size() != t.factors[k].size()) {
            throw std::invalid_argument("rank1_inner: shape mismatch");
        }
        p *= s.factors[k].dot(t.factors[k]);
    }
    return p;
}

CPDecomposition::CPDecomposition(Shape shape, std::vector<Rank1Term> terms)
    : shape_(std::move(shape)), terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("CPDecomposition: needs at least one term");
    for (auto& term : terms_) {
        if (static_cast<int>(term.factors.size()) != shape_.order()) {
            throw std::invalid_argument("CPDecomposition: term order does not match shape");
        }
        if (!(term.scale > 0.0) || !std::isfinite(term.scale)) {
            throw std::invalid_argument("CPDecomposition: term scale must be positive and finite");
        }
        for (int k = 0; k < shape_.order(); ++k) {
            auto& f = term.factors[static_cast<std::size_t>(k)];
            if (f.size() != shape_.dim(k)) {
                throw std::invalid_argument("CPDecomposition: factor length does not match shape");
            }
            const double dev = std::abs(f.norm() - 1.0);
            if (dev > kRenormalizeTolerance) {
                throw std::invalid_argument("CPDecomposition: factor is not unit norm");
            }
            if (dev > kUnitTolerance) f.normalize();
        }
    }
}

Eigen::MatrixXd CPDecomposition::factor_matrix(int k) const {
    Eigen::MatrixXd m(shape_.dim(k), rank());
    for (int i = 0; i < rank(); ++i) m.col(i) = terms_[static_cast<std::size_t>(i)].factors[static_cast<std::size_t>(k)];
    return m;
}

DenseTensor cpd_eval(const CPDecomposition& cpd) {
    DenseTensor out(cpd.shape());
    for (const auto& term : cpd.terms()) out.values() += term.scale * term.unit_tensor();
    return out;
}

DenseTensor random_gaussian_tensor(const Shape& shape, Rng& rng) {
    Eigen::VectorXd values(shape.pi());
    for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = rng.normal();
    return DenseTensor(shape, std::move(values));
}

CPDecomposition random_cpd(const Shape& shape, int r, Rng& rng) {
    if (r < 1) throw std::invalid_argument("random_cpd: rank must be positive");
    std::vector<Rank1Term> terms;
    terms.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        std::vector<Eigen::VectorXd> vectors;
        for (int k = 0; k < shape.order(); ++k) {
            Eigen::VectorXd v(shape.dim(k));
            for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
            vectors.push_back(std::move(v));
        }
        terms.push_back(Rank1Term::from_vectors(std::move(vectors)));
    }
    return CPDecomposition(shape, std::move(terms));
}

}  // namespace cpdcond
