#include "cpdcond/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cpdcond/condition.hpp"
#include "cpdcond/experiments.hpp"
#include "cpdcond/io.hpp"
#include "cpdcond/sampler.hpp"
#include "cpdcond/segre.hpp"
#include "cpdcond/verify.hpp"

#ifndef CPDCOND_VERSION
#define CPDCOND_VERSION "0.0.0"
#endif

namespace cpdcond {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json number_or_inf(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

// Records one command invocation; written next to the outputs on every exit path.
class Manifest {
public:
    Manifest(std::string command, json config) : command_(std::move(command)), config_(std::move(config)), start_(utc_now()) {}
    void add_output(const fs::path& p) { outputs_.push_back(p.string()); }
    void set_seed(std::uint64_t s) { seed_ = s; }
    void write(const fs::path& path, int exit_code, const std::string& message) const {
        json j{{"command", command_},
               {"config", config_},
               {"master_seed", seed_ ? json(*seed_) : json(nullptr)},
               {"version", CPDCOND_VERSION},
               {"start", start_},
               {"end", utc_now()},
               {"outputs", outputs_},
               {"exit_code", exit_code}};
        if (!message.empty()) j["message"] = message;
        write_file_atomic(path, j.dump(2) + "\n");
    }

private:
    std::string command_;
    json config_;
    std::string start_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::string> outputs_;
};

int default_workers() {
    if (const char* env = std::getenv("CPDCOND_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w >= 1) return w;
        } catch (const std::exception&) {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

double parse_number(const std::string& s) {
    if (s == "inf" || s == "+inf") return kInfinity;
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
    return v;
}

// Inline factors: terms separated by ';', modes by '|', entries by ','.
CPDecomposition parse_inline_factors(const std::string& text) {
    json j{{"terms", json::array()}};
    std::vector<int> dims;
    for (const auto& term : split(text, ';')) {
        json factors = json::array();
        std::vector<int> term_dims;
        for (const auto& mode : split(term, '|')) {
            std::vector<double> entries;
            for (const auto& e : split(mode, ',')) {
                try {
                    entries.push_back(parse_number(e));
                } catch (const std::exception&) {
                    throw FormatError("--factors: cannot parse entry '" + e + "'");
                }
            }
            term_dims.push_back(static_cast<int>(entries.size()));
            factors.push_back(entries);
        }
        if (dims.empty()) dims = term_dims;
        if (term_dims != dims) throw FormatError("--factors: terms disagree on the shape");
        j["terms"].push_back({{"factors", factors}});
    }
    j["dims"] = dims;
    return cpd_from_json(j);
}

int cmd_sample(const std::string& shape_text, int rank, int target, std::uint64_t seed, int workers,
               std::uint64_t max_samples, const std::string& predictor, const fs::path& out_dir,
               std::ostream& out, std::ostream& err) {
    CampaignConfig cfg;
    try {
        cfg.shape = Shape::parse(shape_text);
        cfg.r = rank;
        cfg.target_real_count = target;
        cfg.master_seed = seed;
        cfg.workers = workers;
        cfg.max_samples = max_samples;
        if (predictor == "euler") cfg.tracker.predictor = Predictor::Euler;
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    Manifest manifest("sample", {{"shape", cfg.shape.to_string()},
                                 {"rank", rank},
                                 {"target_real", target},
                                 {"workers", workers},
                                 {"max_samples", max_samples},
                                 {"predictor", predictor},
                                 {"out", out_dir.string()}});
    manifest.set_seed(seed);
    const fs::path manifest_path = out_dir / "manifest.json";
    int code = kExitOk;
    std::string message;
    try {
        fs::create_directories(out_dir);
        const CampaignResult result = run_campaign(cfg);
        std::ostringstream csv;
        write_samples_csv(csv, cfg.shape, cfg.r, result.outcomes);
        write_file_atomic(out_dir / "samples.csv", csv.str());
        manifest.add_output(out_dir / "samples.csv");
        const json summary = campaign_summary_json(cfg, result);
        write_file_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
        manifest.add_output(out_dir / "summary.json");
        out << "samples " << result.counts.total() << "  real " << result.counts.real << "  complex "
            << result.counts.complex << "  failed " << result.counts.failed << "\n"
            << "real_fraction " << format_double(result.real_fraction) << "\n";
        if (!result.target_reached) {
            message = "sample cap reached before the target real count";
            err << "warning: " << message << "\n";
        }
    } catch (const std::exception& e) {
        message = e.what();
        err << "error: " << message << "\n";
        code = kExitIo;
    }
    try {
        manifest.write(manifest_path, code, message);
    } catch (const std::exception& e) {
        err << "error: cannot write manifest: " << e.what() << "\n";
        return kExitIo;
    }
    return code;
}

struct KappaColumn {
    std::vector<double> values;
    std::size_t excluded_inf = 0;
    std::string shape;
    int r = 0;
};

KappaColumn read_kappa_column(const std::string& text, const std::string& column) {
    std::istringstream is(text);
    std::string line;
    KappaColumn out;
    if (!std::getline(is, line)) return out;
    const auto header = split(line, ',');
    auto find = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        return -1;
    };
    const int col = find(column), kind = find("kind"), shape = find("shape"), r = find("r");
    if (col < 0) throw FormatError("CSV has no \"" + column + "\" column");
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) throw FormatError("CSV line " + std::to_string(line_no) + ": wrong field count");
        if (kind >= 0 && fields[static_cast<std::size_t>(kind)] != "real") continue;
        if (out.shape.empty() && shape >= 0) out.shape = fields[static_cast<std::size_t>(shape)];
        if (out.r == 0 && r >= 0) out.r = std::atoi(fields[static_cast<std::size_t>(r)].c_str());
        const std::string& f = fields[static_cast<std::size_t>(col)];
        if (f.empty()) continue;
        double v = 0;
        try {
            v = parse_number(f);
        } catch (const std::exception&) {
            throw FormatError("CSV line " + std::to_string(line_no) + ": bad value '" + f + "'");
        }
        if (std::isinf(v)) ++out.excluded_inf;
        else out.values.push_back(v);
    }
    return out;
}

int cmd_fit(const fs::path& in, const std::string& which, const fs::path& report_path, fs::path ccdf_path,
            std::ostream& out, std::ostream& err) {
    if (ccdf_path.empty()) ccdf_path = fs::path(report_path).replace_extension(".ccdf.csv");
    Manifest manifest("fit", {{"in", in.string()}, {"which", which}, {"out", report_path.string()}, {"ccdf", ccdf_path.string()}});
    fs::path manifest_path = report_path;
    manifest_path += ".manifest.json";
    int code = kExitOk;
    std::string message;
    try {
        const KappaColumn data = read_kappa_column(read_text_file(in), which == "regular" ? "kappa" : "kappa_ang");
        if (data.values.empty()) throw InsufficientData("fit: no finite condition numbers in " + in.string(), 0);
        const EmpiricalCCDF ccdf(data.values);
        const TailFit fit = fit_tail(ccdf);
        const double kappa0 = ccdf.quantile(fit.c_high);
        const TruncatedMean mean = truncated_mean(data.values, fit, kappa0);

        json report = tail_fit_json(fit, data.shape, data.r, which, data.excluded_inf);
        report["samples"] = data.values.size();
        report["kappa0"] = kappa0;
        report["tail_truncated_mean"] = number_or_inf(mean.value);
        if (!report_path.parent_path().empty()) fs::create_directories(report_path.parent_path());
        write_file_atomic(report_path, report.dump(2) + "\n");
        manifest.add_output(report_path);
        std::ostringstream csv;
        write_ccdf_csv(csv, ccdf);
        write_file_atomic(ccdf_path, csv.str());
        manifest.add_output(ccdf_path);

        out << "a " << format_double(fit.a) << "\nb " << format_double(fit.b) << "\nr2 " << format_double(fit.r_squared)
            << "\npoints_used " << fit.points_used << "\nexcluded_inf " << data.excluded_inf << "\n";
        if (mean.infinite) out << "tail-truncated mean: infinite (b <= 1)\n";
        else out << "tail-truncated mean: " << format_double(mean.value) << " (kappa0 = " << format_double(kappa0) << ")\n";
    } catch (const InsufficientData& e) {
        message = std::string(e.what()) + " [usable points: " + std::to_string(e.count) + "]";
        err << "error: " << message << "\n";
        code = kExitInsufficientData;
    } catch (const FormatError& e) {
        message = e.what();
        err << "error: " << message << "\n";
        code = kExitUsage;
    } catch (const std::exception& e) {
        message = e.what();
        err << "error: " << message << "\n";
        code = kExitIo;
    }
    try {
        manifest.write(manifest_path, code, message);
    } catch (const std::exception& e) {
        err << "error: cannot write manifest: " << e.what() << "\n";
        if (code == kExitOk) code = kExitIo;
    }
    return code;
}

int cmd_condition(const std::string& cpd_file, const std::string& factors, std::ostream& out, std::ostream& err) {
    CPDecomposition cpd;
    try {
        if (!cpd_file.empty()) cpd = cpd_from_json(read_json_file(cpd_file));
        else cpd = parse_inline_factors(factors);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: malformed decomposition: " << e.what() << "\n";
        return kExitUsage;
    }
    const ConditionReport rep = condition_numbers(cpd);
    json j{{"shape", cpd.shape().to_string()},
           {"r", cpd.rank()},
           {"kappa", number_or_inf(rep.kappa)},
           {"kappa_ang", number_or_inf(rep.kappa_angular)},
           {"sigma_min", rep.sigma_min_regular},
           {"sigma_min_ang", rep.sigma_min_angular}};
    if (!rep.reason.empty()) j["reason"] = rep.reason;
    if (cpd.shape().order() == 3) {
        const KruskalCertificate cert = kruskal_certificate(cpd);
        j["kruskal"] = {{"k_ranks", cert.k_ranks}, {"identifiable", cert.identifiable}};
    }
    out << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_bf_table(int n_max, const std::vector<std::string>& empirical, std::ostream& out, std::ostream& err) {
    if (n_max < 2) {
        err << "error: --n-max must be at least 2\n";
        return kExitUsage;
    }
    std::map<int, double> emp;
    for (const auto& e : empirical) {
        const auto parts = split(e, ':');
        try {
            if (parts.size() != 2) throw std::invalid_argument("");
            emp[std::stoi(parts[0])] = parse_number(parts[1]);
        } catch (const std::exception&) {
            err << "error: --empirical expects n:fraction, got '" << e << "'\n";
            return kExitUsage;
        }
    }
    out << "n p_n" << (emp.empty() ? "" : " empirical") << "\n";
    for (int n = 2; n <= n_max; ++n) {
        out << n << ' ' << std::setprecision(15) << bf_probability(n);
        if (auto it = emp.find(n); it != emp.end()) out << ' ' << format_double(it->second);
        out << "\n";
    }
    return kExitOk;
}

int cmd_verify(int trials, std::uint64_t seed, const std::string& only, const std::string& json_path, std::ostream& out,
               std::ostream& err) {
    std::vector<OracleReport> reports;
    try {
        reports = run_verify_suite(trials, seed, only);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    bool all = true;
    json arr = json::array();
    for (const auto& r : reports) {
        out << std::left << std::setw(30) << r.name << " trials=" << r.trials
            << " max_violation=" << format_double(r.max_violation) << " tolerance=" << format_double(r.tolerance) << ' '
            << (r.passed ? "PASS" : "FAIL") << "\n";
        all = all && r.passed;
        arr.push_back(to_json(r));
    }
    if (!json_path.empty()) {
        try {
            write_file_atomic(json_path, json{{"seed", seed}, {"trials", trials}, {"passed", all}, {"oracles", arr}}.dump(2) + "\n");
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitIo;
        }
    }
    return all ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Condition numbers of canonical polyadic decompositions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CPDCOND_VERSION);

    std::string shape, predictor = "rk4", out_dir;
    int rank = 0, target = 1000, workers = default_workers();
    std::uint64_t seed = 1, max_samples = 0;
    auto* sample = app.add_subcommand("sample", "Sample Gaussian identifiable tensors by homotopy continuation");
    sample->add_option("--shape", shape, "Tensor shape, e.g. 2x2x2")->required();
    sample->add_option("--rank", rank, "Rank r (must give a perfect space)")->required();
    sample->add_option("--target-real", target, "Number of real decompositions to collect")->capture_default_str();
    sample->add_option("--seed", seed, "Master seed")->capture_default_str();
    sample->add_option("--workers", workers, "Worker threads (default: $CPDCOND_WORKERS or all cores)");
    sample->add_option("--max-samples", max_samples, "Stop after this many samples (0 = unlimited)");
    sample->add_option("--predictor", predictor, "Path predictor")->check(CLI::IsMember({"rk4", "euler"}))->capture_default_str();
    sample->add_option("--out", out_dir, "Output directory")->required();

    std::string in, which = "regular", report, ccdf;
    auto* fit = app.add_subcommand("fit", "Fit the CCDF tail of sampled condition numbers");
    fit->add_option("--in", in, "samples.csv")->required();
    fit->add_option("--which", which, "regular or angular")->check(CLI::IsMember({"regular", "angular"}))->capture_default_str();
    fit->add_option("--out", report, "Report JSON path")->required();
    fit->add_option("--ccdf", ccdf, "CCDF CSV path (default: next to the report)");

    std::string cpd_file, factors;
    auto* cond = app.add_subcommand("condition", "Condition numbers of one decomposition");
    auto* cpd_opt = cond->add_option("--cpd", cpd_file, "Decomposition JSON file");
    auto* fac_opt = cond->add_option("--factors", factors, "Inline factors: terms ';', modes '|', entries ','");
    cpd_opt->excludes(fac_opt);
    cond->require_option(1);

    int n_max = 5;
    std::vector<std::string> empirical;
    auto* bf = app.add_subcommand("bf-table", "Probability that an n x n x 2 Gaussian tensor has real rank n");
    bf->add_option("--n-max", n_max, "Largest n")->capture_default_str();
    bf->add_option("--empirical", empirical, "Observed fraction as n:fraction (repeatable)");

    int trials = 1000;
    std::uint64_t vseed = 2024;
    std::string only, json_path;
    auto* ver = app.add_subcommand("verify", "Numerical checks of the underlying identities and inequalities");
    ver->add_option("--trials", trials, "Random configurations per oracle")->capture_default_str();
    ver->add_option("--seed", vseed, "Seed")->capture_default_str();
    ver->add_option("--only", only, "Run a single oracle");
    ver->add_option("--json", json_path, "Write a JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << CPDCOND_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (sample->parsed()) {
        return cmd_sample(shape, rank, target, seed, workers, max_samples, predictor, out_dir, out, err);
    }
    if (fit->parsed()) return cmd_fit(in, which, report, ccdf, out, err);
    if (cond->parsed()) return cmd_condition(cpd_file, factors, out, err);
    if (bf->parsed()) return cmd_bf_table(n_max, empirical, out, err);
    if (ver->parsed()) return cmd_verify(trials, vseed, only, json_path, out, err);
    return kExitUsage;
}

}  // namespace cpdcond
