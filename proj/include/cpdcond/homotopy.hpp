#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string_view>

#include "cpdcond/rng.hpp"
#include "cpdcond/tensor.hpp"

namespace cpdcond {

using cplx = std::complex<double>;

/// Unknowns of the square decomposition system in a perfect space. Term i
/// contributes a full mode-1 vector a_i^(1) and, for k >= 2, the trailing
/// n_k - 1 coordinates of a factor whose first coordinate is pinned to 1.
/// Storage is term-major, then mode-major: Sigma complex values per term.
class PinnedVariables {
public:
    PinnedVariables() = default;
    PinnedVariables(Shape shape, int r);
    PinnedVariables(Shape shape, int r, Eigen::VectorXcd values);

    const Shape& shape() const { return shape_; }
    int rank() const { return r_; }
    const Eigen::VectorXcd& values() const { return values_; }
    Eigen::VectorXcd& values() { return values_; }

    /// Offset of term i, mode k inside values().
    Eigen::Index offset(int i, int k) const;
    /// Full factor vector of term i, mode k (leading 1 restored for k >= 1).
    Eigen::VectorXcd factor(int i, int k) const;

private:
    Shape shape_;
    int r_ = 0;
    Eigen::VectorXcd values_;
};

enum class Predictor { Euler, RK4 };

struct TrackerConfig {
    double initial_step = 0.05;
    double min_step = 1e-7;
    int max_steps = 10'000;
    /// Corrector tolerance on the residual infinity-norm, relative to 1 + the
    /// magnitude of the evaluated tensor.
    double newton_tol = 1e-12;
    int max_newton_iters = 3;
    double step_expansion = 1.5;
    int expansion_after = 4;
    double realness_tol = 1e-8;
    int endpoint_newton_iters = 20;
    /// Pinned coordinates beyond this magnitude count as a diverging path.
    double divergence_bound = 1e10;
    Predictor predictor = Predictor::RK4;

    void validate() const;
};

enum class TrackStatus { Converged, StepUnderflow, MaxStepsExceeded, NewtonDivergence, SingularJacobian };

std::string_view to_string(TrackStatus status);

struct TrackResult {
    TrackStatus status = TrackStatus::StepUnderflow;
    std::optional<PinnedVariables> solution;
    int steps_taken = 0;
    double final_residual = 0.0;
};

struct StartPair {
    DenseTensor tensor;
    PinnedVariables solution;
};

/// Random start system: Gaussian factors converted to pinned form, with the
/// start tensor being the exact evaluation of the pinned parameterization.
StartPair build_start(const Shape& shape, int r, Rng& rng);

/// Flattened evaluation sum_i a_i^(1) (x) [1; a_i^(2)] (x) ... (x) [1; a_i^(d)].
Eigen::VectorXcd evaluate(const PinnedVariables& x);

/// vec(target) - evaluate(x), row-major order.
Eigen::VectorXcd residual(const PinnedVariables& x, const DenseTensor& target);
Eigen::VectorXcd residual(const PinnedVariables& x, const Eigen::VectorXcd& target);

/// Pi x Pi matrix of partial derivatives of evaluate(x) (= -d residual / dx);
/// columns ordered like PinnedVariables storage.
Eigen::MatrixXcd jacobian(const PinnedVariables& x);

/// Tracks the start solution along
///   H(x, t) = (1 - t) gamma F_start(x) + t F_target(x),  F(x) = T - evaluate(x),
/// from t = 0 to t = 1, with gamma a random unit complex number drawn from rng.
/// RK4 (or Euler) predictor on the Davidenko equation, Newton corrector, adaptive steps.
/// Numerical failures are reported through the status, never thrown.
TrackResult track(const DenseTensor& start_tensor, const PinnedVariables& start_solution,
                  const DenseTensor& target, const TrackerConfig& cfg, Rng& rng);

/// True iff the Euclidean norm of all imaginary parts is below tol.
bool classify_real(const PinnedVariables& x, double tol);

/// Real CPD from a real-classified solution: imaginary parts dropped, leading
/// coordinates restored, factors normalized with magnitudes collected in the
/// scales. Throws on a zero factor.
CPDecomposition to_cpd(const PinnedVariables& x, const Shape& shape);

}  // namespace cpdcond
