#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cpdcond/cli.hpp"
#include "cpdcond/condition.hpp"
#include "cpdcond/experiments.hpp"
#include "cpdcond/sampler.hpp"
#include "cpdcond/segre.hpp"
#include "cpdcond/verify.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace cpdcond;

namespace {

// terms: list of lists of 1-d arrays, one vector per mode; scales default to the vector norms
CPDecomposition cpd_of(const std::vector<std::vector<Eigen::VectorXd>>& terms) {
    if (terms.empty()) throw std::invalid_argument("at least one term is required");
    std::vector<Rank1Term> out;
    for (const auto& t : terms) out.push_back(Rank1Term::from_vectors(t));
    Shape shape = out.front().shape();
    return CPDecomposition(std::move(shape), std::move(out));
}

py::dict report_dict(const ConditionReport& c) {
    return py::dict("kappa"_a = c.kappa, "kappa_ang"_a = c.kappa_angular, "sigma_min"_a = c.sigma_min_regular,
                    "sigma_min_ang"_a = c.sigma_min_angular, "reason"_a = c.reason);
}

py::dict outcome_dict(const SampleOutcome& o) {
    return py::dict("kind"_a = std::string(to_string(o.kind)), "kappa"_a = o.kappa, "kappa_ang"_a = o.kappa_angular,
                    "tensor_norm"_a = o.tensor_norm, "steps"_a = o.steps, "seed_index"_a = o.seed_index,
                    "status"_a = std::string(to_string(o.status)));
}

py::dict oracle_dict(const OracleReport& r) {
    return py::dict("name"_a = r.name, "trials"_a = r.trials, "max_violation"_a = r.max_violation,
                    "tolerance"_a = r.tolerance, "passed"_a = r.passed, "details"_a = r.details);
}

Predictor predictor_of(const std::string& name) {
    if (name == "rk4") return Predictor::RK4;
    if (name == "euler") return Predictor::Euler;
    throw std::invalid_argument("predictor must be rk4 or euler");
}

}  // namespace

PYBIND11_MODULE(cpdcond, m) {
    m.doc() = "Condition numbers of real canonical polyadic decompositions";

    py::class_<Shape>(m, "Shape")
        .def(py::init<std::vector<int>>(), "dims"_a)
        .def_static("parse", [](const std::string& s) { return Shape::parse(s); })
        .def_property_readonly("dims", &Shape::dims)
        .def_property_readonly("order", &Shape::order)
        .def_property_readonly("sigma", &Shape::sigma)
        .def_property_readonly("pi", &Shape::pi)
        .def("__str__", &Shape::to_string)
        .def("__repr__", [](const Shape& s) { return "Shape(" + s.to_string() + ")"; })
        .def("__eq__", [](const Shape& a, const Shape& b) { return a == b; });

    m.def("shape_constants", &shape_constants, "shape"_a);
    m.def("is_perfect", &is_perfect, "shape"_a, "r"_a);

    m.def("random_gaussian_tensor", [](const Shape& shape, std::uint64_t seed) {
        Rng rng(seed);
        const DenseTensor t = random_gaussian_tensor(shape, rng);
        return Eigen::VectorXd(t.values());
    }, "shape"_a, "seed"_a, "Flattened (row-major) Gaussian tensor.");

    m.def("condition_numbers", [](const std::vector<std::vector<Eigen::VectorXd>>& terms) {
        return report_dict(condition_numbers(cpd_of(terms)));
    }, "terms"_a, "Regular and angular condition numbers; terms[i][k] is the mode-k vector of term i.");

    m.def("kruskal_certificate", [](const std::vector<std::vector<Eigen::VectorXd>>& terms) {
        const KruskalCertificate c = kruskal_certificate(cpd_of(terms));
        return py::dict("k_ranks"_a = c.k_ranks, "identifiable"_a = c.identifiable);
    }, "terms"_a);

    m.def("cpd_eval", [](const std::vector<std::vector<Eigen::VectorXd>>& terms) {
        return Eigen::VectorXd(cpd_eval(cpd_of(terms)).values());
    }, "terms"_a);

    m.def("barnes_g", &barnes_g, "n"_a);
    m.def("bf_probability", &bf_probability, "n"_a);

    m.def("fit_tail", [](std::vector<double> values, double c_low, double c_high) {
        const std::size_t dropped = remove_non_finite(values);
        const EmpiricalCCDF ccdf(values);
        const TailFit f = fit_tail(ccdf, c_low, c_high);
        const TruncatedMean tm = truncated_mean(ccdf.sorted_values(), f, ccdf.quantile(c_high));
        return py::dict("a"_a = f.a, "b"_a = f.b, "r_squared"_a = f.r_squared, "points_used"_a = f.points_used,
                        "excluded_non_finite"_a = dropped,
                        "tail_truncated_mean"_a = tm.infinite ? std::numeric_limits<double>::infinity() : tm.value);
    }, "values"_a, "c_low"_a = 1e-3, "c_high"_a = 1e-1);

    m.def("sample_one", [](const Shape& shape, int r, std::uint64_t seed_index, std::uint64_t master_seed,
                           const std::string& predictor) {
        TrackerConfig cfg;
        cfg.predictor = predictor_of(predictor);
        return outcome_dict(sample_one(shape, r, seed_index, master_seed, cfg));
    }, "shape"_a, "r"_a, "seed_index"_a, "master_seed"_a, "predictor"_a = "rk4");

    m.def("run_campaign", [](const Shape& shape, int r, int target_real, std::uint64_t seed, int workers,
                             std::uint64_t max_samples, const std::string& predictor) {
        CampaignConfig cfg;
        cfg.shape = shape;
        cfg.r = r;
        cfg.target_real_count = target_real;
        cfg.master_seed = seed;
        cfg.workers = workers;
        cfg.max_samples = max_samples;
        cfg.tracker.predictor = predictor_of(predictor);
        CampaignResult res;
        {
            py::gil_scoped_release release;
            res = run_campaign(cfg);
        }
        std::vector<double> kappa, kappa_ang;
        std::vector<std::string> kinds;
        for (const auto& o : res.outcomes) {
            kinds.emplace_back(to_string(o.kind));
            if (o.kind != SampleKind::Real) continue;
            kappa.push_back(o.kappa);
            kappa_ang.push_back(o.kappa_angular);
        }
        return py::dict("real"_a = res.counts.real, "complex"_a = res.counts.complex, "failed"_a = res.counts.failed,
                        "real_fraction"_a = res.real_fraction, "target_reached"_a = res.target_reached,
                        "wall_time"_a = res.wall_time, "kinds"_a = kinds,
                        "kappa"_a = py::array_t<double>(static_cast<py::ssize_t>(kappa.size()), kappa.data()),
                        "kappa_ang"_a = py::array_t<double>(static_cast<py::ssize_t>(kappa_ang.size()), kappa_ang.data()));
    }, "shape"_a, "r"_a, "target_real"_a, "seed"_a = 1, "workers"_a = 1, "max_samples"_a = 0, "predictor"_a = "rk4");

    m.def("oracle_names", &oracle_names);
    m.def("run_verify", [](int trials, std::uint64_t seed, const std::string& only) {
        py::list out;
        for (const auto& r : run_verify_suite(trials, seed, only)) out.append(oracle_dict(r));
        return out;
    }, "trials"_a = 1000, "seed"_a = 2024, "only"_a = "");

    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "cpdcond");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, "args"_a, "Runs a command-line invocation in-process; returns (exit code, stdout, stderr).");

    py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_RuntimeError);
}
