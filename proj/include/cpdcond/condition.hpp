#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string>

#include "cpdcond/tensor.hpp"

namespace cpdcond {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Relative threshold below which a smallest singular value is treated as zero
/// and the corresponding condition number is reported as +inf.
inline constexpr double kSingularRelTol = 1e-14;

/// Smallest singular value (full SVD). Empty matrices yield 0.
double sigma_min(const Eigen::MatrixXd& m);

struct QValue {
    double value = 0.0;
    /// Set when sigma_min < 1e-14 * sigma_max; value still comes from the product form.
    bool near_singular = false;
};

/// Product of all singular values except the smallest one of a tall matrix.
QValue q_value(const Eigen::MatrixXd& m);

/// sqrt(det(M^T M)), evaluated as the product of the singular values.
double volume(const Eigen::MatrixXd& m);

/// Orthogonal projector complement: returns (I - M M^+) A.
Eigen::MatrixXd project_out(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a);

struct ConditionReport {
    double kappa = kInfinity;
    double kappa_angular = kInfinity;
    double sigma_min_regular = 0.0;
    double sigma_min_angular = 0.0;
    /// Non-empty when a sentinel was produced for a structural reason.
    std::string reason;
};

/// Regular condition number 1 / sigma_min(Terracini matrix).
ConditionReport kappa(const CPDecomposition& cpd);

/// Angular condition number 1 / sigma_min((I - M M^+) L) with
/// M = [U_1 ... U_r] and L = [lambda_1 L_1 ... lambda_r L_r]. For r > 2 this
/// is the natural extension of the rank-2 characterization.
ConditionReport kappa_angular(const CPDecomposition& cpd);

/// Both condition numbers in one report.
ConditionReport condition_numbers(const CPDecomposition& cpd);

/// Unit rank-1 tensors as columns: M = [U_1 ... U_r].
Eigen::MatrixXd unit_term_matrix(const CPDecomposition& cpd);

/// Scaled tangent directions L = [lambda_1 L_1 ... lambda_r L_r].
Eigen::MatrixXd scaled_direction_matrix(const CPDecomposition& cpd);

struct Rank2Jacobian {
    /// lambda^{Sigma-1} mu^{Sigma-1} vol(Terracini).
    double value = 0.0;
    /// vol([L | M]) from the matrix of partial derivatives.
    double volume_q = 0.0;
};

/// Jacobian determinant of the rank-2 parameterization (lambda, u, mu, v) -> lambda U + mu V.
Rank2Jacobian jacobian_rank2(const CPDecomposition& cpd);

}  // namespace cpdcond
