#include "cpdcond/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cpdcond {

PinnedVariables::PinnedVariables(Shape shape, int r)
    : PinnedVariables(std::move(shape), r, Eigen::VectorXcd()) {}

PinnedVariables::PinnedVariables(Shape shape, int r, Eigen::VectorXcd values)
    : shape_(std::move(shape)), r_(r), values_(std::move(values)) {
    if (r_ < 1) throw std::invalid_argument("PinnedVariables: rank must be positive");
    const Eigen::Index n = static_cast<Eigen::Index>(r_) * shape_.sigma();
    if (values_.size() == 0) values_ = Eigen::VectorXcd::Zero(n);
    if (values_.size() != n) throw std::invalid_argument("PinnedVariables: wrong number of values");
}

Eigen::Index PinnedVariables::offset(int i, int k) const {
    Eigen::Index off = static_cast<Eigen::Index>(i) * shape_.sigma();
    if (k > 0) off += shape_.dim(0);
    for (int m = 1; m < k; ++m) off += shape_.dim(m) - 1;
    return off;
}

Eigen::VectorXcd PinnedVariables::factor(int i, int k) const {
    const Eigen::Index off = offset(i, k);
    if (k == 0) return values_.segment(off, shape_.dim(0));
    Eigen::VectorXcd w(shape_.dim(k));
    w(0) = 1.0;
    w.tail(shape_.dim(k) - 1) = values_.segment(off, shape_.dim(k) - 1);
    return w;
}

void TrackerConfig::validate() const {
    if (!(initial_step > 0 && min_step > 0 && newton_tol > 0 && realness_tol > 0 && step_expansion > 1)) {
        throw std::invalid_argument("TrackerConfig: tolerances and steps must be positive");
    }
    if (!(min_step < initial_step)) throw std::invalid_argument("TrackerConfig: min_step must be below initial_step");
    if (max_steps < 1 || max_newton_iters < 1 || expansion_after < 1 || endpoint_newton_iters < 0) {
        throw std::invalid_argument("TrackerConfig: iteration limits must be positive");
    }
}

std::string_view to_string(TrackStatus status) {
    switch (status) {
        case TrackStatus::Converged: return "converged";
        case TrackStatus::StepUnderflow: return "step_underflow";
        case TrackStatus::MaxStepsExceeded: return "max_steps_exceeded";
        case TrackStatus::NewtonDivergence: return "newton_divergence";
        case TrackStatus::SingularJacobian: return "singular_jacobian";
    }
    return "unknown";
}

StartPair build_start(const Shape& shape, int r, Rng& rng) {
    if (!is_perfect(shape, r)) {
        throw std::invalid_argument("build_start: " + shape.to_string() + " with r=" + std::to_string(r) +
                                    " is not a perfect space");
    }
    PinnedVariables x(shape, r);
    for (int i = 0; i < r; ++i) {
        std::vector<Eigen::VectorXd> raw;
        for (int k = 0; k < shape.order(); ++k) {
            Eigen::VectorXd v(shape.dim(k));
            do {
                for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
            } while (k > 0 && std::abs(v(0)) < 1e-8);
            raw.push_back(std::move(v));
        }
        double lead = 1.0;
        for (int k = 1; k < shape.order(); ++k) {
            lead *= raw[static_cast<std::size_t>(k)](0);
            x.values().segment(x.offset(i, k), shape.dim(k) - 1) =
                (raw[static_cast<std::size_t>(k)].tail(shape.dim(k) - 1) / raw[static_cast<std::size_t>(k)](0))
                    .cast<cplx>();
        }
        x.values().segment(x.offset(i, 0), shape.dim(0)) = (lead * raw[0]).cast<cplx>();
    }
    // Match the typical norm sqrt(Pi) of a Gaussian target; a start tensor of a
    // very different magnitude makes the early part of every path steep.
    const double scale = std::sqrt(static_cast<double>(shape.pi())) / evaluate(x).norm();
    for (int i = 0; i < r; ++i) x.values().segment(x.offset(i, 0), shape.dim(0)) *= scale;
    return {DenseTensor(shape, evaluate(x).real()), x};
}

namespace {

// Prefix and suffix Kronecker products of the factors of one term.
struct TermKron {
    std::vector<Eigen::VectorXcd> prefix;  // prefix[k] = w_0 (x) ... (x) w_{k-1}
    std::vector<Eigen::VectorXcd> suffix;  // suffix[k] = w_{k+1} (x) ... (x) w_{d-1}
};

TermKron term_kron(const PinnedVariables& x, int i) {
    const int d = x.shape().order();
    std::vector<Eigen::VectorXcd> w;
    w.reserve(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) w.push_back(x.factor(i, k));
    TermKron tk;
    tk.prefix.resize(static_cast<std::size_t>(d));
    tk.suffix.resize(static_cast<std::size_t>(d));
    tk.prefix[0] = Eigen::VectorXcd::Ones(1);
    for (int k = 1; k < d; ++k) {
        tk.prefix[static_cast<std::size_t>(k)] = kron2<cplx>(tk.prefix[static_cast<std::size_t>(k - 1)], w[static_cast<std::size_t>(k - 1)]);
    }
    tk.suffix[static_cast<std::size_t>(d - 1)] = Eigen::VectorXcd::Ones(1);
    for (int k = d - 2; k >= 0; --k) {
        tk.suffix[static_cast<std::size_t>(k)] = kron2<cplx>(w[static_cast<std::size_t>(k + 1)], tk.suffix[static_cast<std::size_t>(k + 1)]);
    }
    // Full evaluation is prefix[d-1] (x) w_{d-1}; stash it in suffix slot via prefix of size Pi.
    tk.prefix.push_back(kron2<cplx>(tk.prefix[static_cast<std::size_t>(d - 1)], w[static_cast<std::size_t>(d - 1)]));
    return tk;
}

// Sum of the magnitudes of the rank-1 terms; scale for relative residual tests.
double term_magnitude(const PinnedVariables& x) {
    double total = 0.0;
    for (int i = 0; i < x.rank(); ++i) {
        double p = 1.0;
        for (int k = 0; k < x.shape().order(); ++k) p *= x.factor(i, k).norm();
        total += p;
    }
    return total;
}

}  // namespace

Eigen::VectorXcd evaluate(const PinnedVariables& x) {
    const int d = x.shape().order();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(x.shape().pi());
    for (int i = 0; i < x.rank(); ++i) {
        Eigen::VectorXcd t = x.factor(i, 0);
        for (int k = 1; k < d; ++k) t = kron2<cplx>(t, x.factor(i, k));
        out += t;
    }
    return out;
}

Eigen::VectorXcd residual(const PinnedVariables& x, const Eigen::VectorXcd& target) {
    if (target.size() != x.shape().pi()) throw std::invalid_argument("residual: target size mismatch");
    return target - evaluate(x);
}

Eigen::VectorXcd residual(const PinnedVariables& x, const DenseTensor& target) {
    if (!(target.shape() == x.shape())) throw std::invalid_argument("residual: shape mismatch");
    return residual(x, Eigen::VectorXcd(target.values().cast<cplx>()));
}

Eigen::MatrixXcd jacobian(const PinnedVariables& x) {
    const Shape& shape = x.shape();
    const int d = shape.order();
    const Eigen::Index n = shape.pi();
    Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(n, x.values().size());
    for (int i = 0; i < x.rank(); ++i) {
        const TermKron tk = term_kron(x, i);
        for (int k = 0; k < d; ++k) {
            const Eigen::VectorXcd& pre = tk.prefix[static_cast<std::size_t>(k)];
            const Eigen::VectorXcd& suf = tk.suffix[static_cast<std::size_t>(k)];
            const int nk = shape.dim(k);
            const int first = k == 0 ? 0 : 1;
            const Eigen::Index col0 = x.offset(i, k);
            for (int j = first; j < nk; ++j) {
                auto col = jac.col(col0 + j - first);
                for (Eigen::Index p = 0; p < pre.size(); ++p) {
                    col.segment((p * nk + j) * suf.size(), suf.size()) = pre(p) * suf;
                }
            }
        }
    }
    return jac;
}

namespace {

// Straight-line homotopy in normalized form: H(x,t) = 0 iff evaluate(x) = P(t), with
//   P(t) = ((1-t) gamma T0 + t T) / ((1-t) gamma + t).
struct TensorPath {
    Eigen::VectorXcd start;
    Eigen::VectorXcd target;
    cplx gamma;

    cplx weight(double t) const { return (1.0 - t) * gamma + t; }
    Eigen::VectorXcd at(double t) const { return ((1.0 - t) * gamma * start + t * target) / weight(t); }
    Eigen::VectorXcd derivative(double t) const {
        const cplx s = weight(t);
        const Eigen::VectorXcd num = (1.0 - t) * gamma * start + t * target;
        return ((target - gamma * start) * s - num * (1.0 - gamma)) / (s * s);
    }
};

double inf_norm(const Eigen::VectorXcd& v) { return v.size() ? std::sqrt(v.cwiseAbs2().maxCoeff()) : 0.0; }

double residual_scale(const PinnedVariables& x, const Eigen::VectorXcd& p) {
    return 1.0 + std::max(p.norm(), term_magnitude(x));
}

bool finite_and_bounded(const Eigen::VectorXcd& v, double bound) {
    const double b2 = bound * bound;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::norm(v(i));
        if (!std::isfinite(a) || a > b2) return false;
    }
    return true;
}

enum class CorrectorOutcome { Converged, NotConverged, Singular, Diverged };

constexpr double kSingularRcond = 1e-15;

using ComplexLU = Eigen::PartialPivLU<Eigen::MatrixXcd>;

// Cheap singularity test from the pivots; the full rcond estimate costs
// several extra solves and is reserved for the endpoint.
bool pivots_singular(const ComplexLU& lu) {
    const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
    const double hi = piv.maxCoeff();
    return !(std::isfinite(hi) && piv.minCoeff() > kSingularRcond * hi);
}

// At most `iters` Newton steps at fixed t on evaluate(x) = p. On return `lu`
// holds the last factorization computed (if any), which stays a good
// approximation of the Jacobian at the corrected point.
CorrectorOutcome correct(PinnedVariables& x, const Eigen::VectorXcd& p, int iters, double tol,
                         double bound, double& res_norm, ComplexLU& lu, bool& factored) {
    factored = false;
    Eigen::VectorXcd r = p - evaluate(x);
    res_norm = inf_norm(r);
    if (res_norm <= tol * residual_scale(x, p)) return CorrectorOutcome::Converged;
    for (int it = 0; it < iters; ++it) {
        lu.compute(jacobian(x));
        factored = true;
        if (pivots_singular(lu)) return CorrectorOutcome::Singular;
        x.values() += lu.solve(r);
        if (!finite_and_bounded(x.values(), bound)) return CorrectorOutcome::Diverged;
        r = p - evaluate(x);
        res_norm = inf_norm(r);
        if (res_norm <= tol * residual_scale(x, p)) return CorrectorOutcome::Converged;
    }
    return CorrectorOutcome::NotConverged;
}

}  // namespace

TrackResult track(const DenseTensor& start_tensor, const PinnedVariables& start_solution,
                  const DenseTensor& target, const TrackerConfig& cfg, Rng& rng) {
    cfg.validate();
    if (!(start_tensor.shape() == target.shape()) || !(start_solution.shape() == target.shape())) {
        throw std::invalid_argument("track: shape mismatch");
    }
    if (start_solution.values().size() != target.shape().pi()) {
        throw std::invalid_argument("track: the system is not square");
    }

    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const TensorPath path{start_tensor.values().cast<cplx>(), target.values().cast<cplx>(),
                          cplx(std::cos(phi), std::sin(phi))};
    const bool stationary =
        (target.values() - start_tensor.values()).norm() <= 1e-15 * (1.0 + start_tensor.norm());

    TrackResult result;
    PinnedVariables x = start_solution;
    double t = 0.0;
    double h = stationary ? 1.0 : cfg.initial_step;
    int successes = 0;
    double res_norm = 0.0;

    ComplexLU lu_x(jacobian(x));  // factorization used by the predictor at x
    ComplexLU lu_trial;

    while (t < 1.0) {
        if (result.steps_taken >= cfg.max_steps) {
            result.status = TrackStatus::MaxStepsExceeded;
            return result;
        }
        if (pivots_singular(lu_x)) {
            result.status = TrackStatus::SingularJacobian;
            return result;
        }
        h = std::min(h, 1.0 - t);
        const double t_next = (t + h >= 1.0 || 1.0 - (t + h) < 1e-14) ? 1.0 : t + h;

        // Predictor on the Davidenko equation J dx/dt = P'(t).
        const double dt = t_next - t;
        PinnedVariables trial = x;
        const Eigen::VectorXcd k1 = lu_x.solve(path.derivative(t));
        if (cfg.predictor == Predictor::Euler) {
            trial.values() += dt * k1;
        } else {
            auto slope = [&](const Eigen::VectorXcd& dx, double s) {
                PinnedVariables y = x;
                y.values() += dx;
                return Eigen::VectorXcd(ComplexLU(jacobian(y)).solve(path.derivative(s)));
            };
            const Eigen::VectorXcd k2 = slope(0.5 * dt * k1, t + 0.5 * dt);
            const Eigen::VectorXcd k3 = slope(0.5 * dt * k2, t + 0.5 * dt);
            const Eigen::VectorXcd k4 = slope(dt * k3, t_next);
            trial.values() += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!finite_and_bounded(trial.values(), cfg.divergence_bound)) trial = x;

        bool factored = false;
        const CorrectorOutcome outcome = correct(trial, path.at(t_next), cfg.max_newton_iters, cfg.newton_tol,
                                                 cfg.divergence_bound, res_norm, lu_trial, factored);
        ++result.steps_taken;
        if (outcome == CorrectorOutcome::Converged) {
            x = std::move(trial);
            t = t_next;
            if (factored) {
                std::swap(lu_x, lu_trial);
            } else {
                lu_x.compute(jacobian(x));
            }
            if (++successes >= cfg.expansion_after) {
                h *= cfg.step_expansion;
                successes = 0;
            }
            continue;
        }
        successes = 0;
        h *= 0.5;
        if (h < cfg.min_step) {
            result.status = outcome == CorrectorOutcome::Diverged ? TrackStatus::NewtonDivergence
                            : outcome == CorrectorOutcome::Singular ? TrackStatus::SingularJacobian
                                                                    : TrackStatus::StepUnderflow;
            return result;
        }
    }

    // Endpoint polish at t = 1.
    const Eigen::VectorXcd goal = path.at(1.0);
    Eigen::VectorXcd r = goal - evaluate(x);
    res_norm = inf_norm(r);
    for (int it = 0; it < cfg.endpoint_newton_iters; ++it) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jacobian(x));
        if (!(lu.rcond() > kSingularRcond)) {
            result.status = TrackStatus::SingularJacobian;
            result.final_residual = res_norm;
            return result;
        }
        PinnedVariables next = x;
        next.values() += lu.solve(r);
        const Eigen::VectorXcd r_next = goal - evaluate(next);
        const double n_next = inf_norm(r_next);
        if (!(n_next < res_norm)) break;
        x = std::move(next);
        r = r_next;
        res_norm = n_next;
    }
    result.final_residual = res_norm;
    {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jacobian(x));
        if (!(lu.rcond() > kSingularRcond)) {
            result.status = TrackStatus::SingularJacobian;
            return result;
        }
    }
    if (!(res_norm <= cfg.newton_tol * residual_scale(x, goal))) {
        result.status = TrackStatus::NewtonDivergence;
        return result;
    }
    result.status = TrackStatus::Converged;
    result.solution = std::move(x);
    return result;
}

bool classify_real(const PinnedVariables& x, double tol) { return x.values().imag().norm() < tol; }

CPDecomposition to_cpd(const PinnedVariables& x, const Shape& shape) {
    if (!(x.shape() == shape)) throw std::invalid_argument("to_cpd: shape mismatch");
    std::vector<Rank1Term> terms;
    terms.reserve(static_cast<std::size_t>(x.rank()));
    for (int i = 0; i < x.rank(); ++i) {
        std::vector<Eigen::VectorXd> vectors;
        for (int k = 0; k < shape.order(); ++k) vectors.push_back(x.factor(i, k).real());
        if (vectors[0].norm() == 0.0) throw std::invalid_argument("to_cpd: degenerate solution with a zero factor");
        terms.push_back(Rank1Term::from_vectors(std::move(vectors)));
    }
    return CPDecomposition(shape, std::move(terms));
}

}  // namespace cpdcond
