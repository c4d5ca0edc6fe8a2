#include "cpdcond/condition.hpp"

#include <cmath>
#include <stdexcept>

#include "cpdcond/segre.hpp"

namespace cpdcond {

namespace {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return {};
    // JacobiSVD is accurate for small singular values, and matrices here are at most 60 x 60.
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

}  // namespace

double sigma_min(const Eigen::MatrixXd& m) {
    const Eigen::VectorXd s = singular_values(m);
    if (s.size() == 0) return 0.0;
    // A wide matrix has a nontrivial kernel.
    if (m.cols() > m.rows()) return 0.0;
    return s(s.size() - 1);
}

QValue q_value(const Eigen::MatrixXd& m) {
    if (m.cols() > m.rows()) throw std::invalid_argument("q_value: matrix must be tall");
    const Eigen::VectorXd s = singular_values(m);
    QValue q;
    if (s.size() == 0) return q;
    q.value = 1.0;
    for (Eigen::Index i = 0; i + 1 < s.size(); ++i) q.value *= s(i);
    q.near_singular = s(s.size() - 1) < kSingularRelTol * s(0);
    return q;
}

double volume(const Eigen::MatrixXd& m) {
    if (m.cols() > m.rows()) return 0.0;
    const Eigen::VectorXd s = singular_values(m);
    double v = 1.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) v *= s(i);
    return v;
}

Eigen::MatrixXd project_out(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > kSingularRelTol * std::max(1.0, s(0))) ++rank;
    }
    const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
    return a - basis * (basis.transpose() * a);
}

Eigen::MatrixXd unit_term_matrix(const CPDecomposition& cpd) {
    Eigen::MatrixXd m(cpd.shape().pi(), cpd.rank());
    for (int i = 0; i < cpd.rank(); ++i) m.col(i) = cpd.terms()[static_cast<std::size_t>(i)].unit_tensor();
    return m;
}

Eigen::MatrixXd scaled_direction_matrix(const CPDecomposition& cpd) {
    const int block = cpd.shape().sigma() - 1;
    Eigen::MatrixXd l(cpd.shape().pi(), cpd.rank() * block);
    for (int i = 0; i < cpd.rank(); ++i) {
        const auto& term = cpd.terms()[static_cast<std::size_t>(i)];
        l.middleCols(i * block, block) = term.scale * tangent_directions(term);
    }
    return l;
}

ConditionReport kappa(const CPDecomposition& cpd) {
    ConditionReport rep;
    const int sigma = cpd.shape().sigma();
    if (cpd.rank() * sigma > cpd.shape().pi()) {
        rep.reason = "r*Sigma exceeds Pi: every fiber of the addition map has positive dimension";
        rep.sigma_min_regular = 0.0;
        rep.kappa = kInfinity;
        return rep;
    }
    const Eigen::VectorXd s = singular_values(terracini(cpd).columns);
    rep.sigma_min_regular = s(s.size() - 1);
    rep.kappa = rep.sigma_min_regular > kSingularRelTol * s(0) ? 1.0 / rep.sigma_min_regular : kInfinity;
    if (!std::isfinite(rep.kappa)) rep.reason = "Terracini matrix is numerically rank deficient";
    return rep;
}

ConditionReport kappa_angular(const CPDecomposition& cpd) {
    ConditionReport rep;
    const Eigen::MatrixXd pl = project_out(unit_term_matrix(cpd), scaled_direction_matrix(cpd));
    if (pl.cols() > pl.rows()) {
        rep.reason = "projected direction matrix is wide";
        return rep;
    }
    const Eigen::VectorXd s = singular_values(pl);
    rep.sigma_min_angular = s(s.size() - 1);
    rep.kappa_angular = (s(0) > 0.0 && rep.sigma_min_angular > kSingularRelTol * s(0))
                            ? 1.0 / rep.sigma_min_angular
                            : kInfinity;
    if (!std::isfinite(rep.kappa_angular)) rep.reason = "projected direction matrix is rank deficient";
    return rep;
}

ConditionReport condition_numbers(const CPDecomposition& cpd) {
    ConditionReport reg = kappa(cpd);
    const ConditionReport ang = kappa_angular(cpd);
    reg.kappa_angular = ang.kappa_angular;
    reg.sigma_min_angular = ang.sigma_min_angular;
    if (reg.reason.empty()) reg.reason = ang.reason;
    return reg;
}

Rank2Jacobian jacobian_rank2(const CPDecomposition& cpd) {
    if (cpd.rank() != 2) throw std::invalid_argument("jacobian_rank2: requires exactly two terms");
    const int sigma = cpd.shape().sigma();
    const double lambda = cpd.terms()[0].scale;
    const double mu = cpd.terms()[1].scale;
    Rank2Jacobian jac;
    jac.value = std::pow(lambda * mu, sigma - 1) * volume(terracini(cpd).columns);
    const Eigen::MatrixXd l = scaled_direction_matrix(cpd);
    const Eigen::MatrixXd m = unit_term_matrix(cpd);
    Eigen::MatrixXd q(l.rows(), l.cols() + m.cols());
    q << l, m;
    jac.volume_q = volume(q);
    return jac;
}

}  // namespace cpdcond
