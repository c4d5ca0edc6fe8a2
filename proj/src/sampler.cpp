#include "cpdcond/sampler.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "cpdcond/io.hpp"

namespace cpdcond {

std::string_view to_string(SampleKind kind) {
    switch (kind) {
        case SampleKind::Real: return "real";
        case SampleKind::Complex: return "complex";
        case SampleKind::Failed: return "failed";
    }
    return "unknown";
}

void CampaignConfig::validate() const {
    if (!is_perfect(shape, r)) {
        throw std::invalid_argument("campaign: " + shape.to_string() + " with r=" + std::to_string(r) +
                                    " is not a perfect space (r*Sigma = " + std::to_string(r * shape.sigma()) +
                                    ", Pi = " + std::to_string(shape.pi()) + ")");
    }
    if (target_real_count < 1) throw std::invalid_argument("campaign: target real count must be at least 1");
    if (workers < 1) throw std::invalid_argument("campaign: workers must be at least 1");
    tracker.validate();
}

DenseTensor sample_target(const Shape& shape, std::uint64_t master_seed, std::uint64_t seed_index) {
    Rng rng = Rng::substream(master_seed, seed_index);
    return random_gaussian_tensor(shape, rng);
}

SampleOutcome sample_one(const Shape& shape, int r, std::uint64_t seed_index, std::uint64_t master_seed,
                         const TrackerConfig& cfg) {
    Rng rng = Rng::substream(master_seed, seed_index);
    const DenseTensor target = random_gaussian_tensor(shape, rng);
    const StartPair start = build_start(shape, r, rng);
    const TrackResult tr = track(start.tensor, start.solution, target, cfg, rng);

    SampleOutcome out;
    out.seed_index = seed_index;
    out.tensor_norm = target.norm();
    out.steps = tr.steps_taken;
    out.status = tr.status;
    if (tr.status != TrackStatus::Converged) return out;
    if (!classify_real(*tr.solution, cfg.realness_tol)) {
        out.kind = SampleKind::Complex;
        return out;
    }
    try {
        const ConditionReport rep = condition_numbers(to_cpd(*tr.solution, shape));
        out.kind = SampleKind::Real;
        out.kappa = rep.kappa;
        out.kappa_angular = rep.kappa_angular;
    } catch (const std::invalid_argument&) {
        // degenerate endpoint (zero factor): counted as a failed path
    }
    return out;
}

CampaignCounts count_outcomes(const std::vector<SampleOutcome>& outcomes) {
    CampaignCounts c;
    for (const auto& o : outcomes) {
        switch (o.kind) {
            case SampleKind::Real: ++c.real; break;
            case SampleKind::Complex: ++c.complex; break;
            case SampleKind::Failed: ++c.failed; break;
        }
    }
    return c;
}

CampaignResult run_campaign(const CampaignConfig& cfg,
                            const std::function<void(std::uint64_t, std::uint64_t)>& progress) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::map<std::uint64_t, SampleOutcome> pending;
    std::vector<SampleOutcome> prefix;
    std::uint64_t reals = 0;
    bool reached = false;
    std::exception_ptr error;

    auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::uint64_t idx = next.fetch_add(1);
            if (cfg.max_samples != 0 && idx >= cfg.max_samples) break;
            SampleOutcome o;
            try {
                o = sample_one(cfg.shape, cfg.r, idx, cfg.master_seed, cfg.tracker);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                stop = true;
                break;
            }
            std::lock_guard lock(mu);
            if (reached) continue;
            pending.emplace(idx, o);
            // Extend the contiguous prefix; stop at the first index completing the target.
            for (auto it = pending.find(prefix.size()); it != pending.end(); it = pending.find(prefix.size())) {
                prefix.push_back(it->second);
                pending.erase(it);
                if (prefix.back().kind == SampleKind::Real && ++reals >= static_cast<std::uint64_t>(cfg.target_real_count)) {
                    reached = true;
                    stop = true;
                    break;
                }
            }
            if (progress) progress(prefix.size(), reals);
        }
    };

    if (cfg.workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(cfg.workers));
        for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    CampaignResult result;
    result.outcomes = std::move(prefix);
    result.counts = count_outcomes(result.outcomes);
    const std::uint64_t decided = result.counts.real + result.counts.complex;
    result.real_fraction = decided ? static_cast<double>(result.counts.real) / static_cast<double>(decided) : 0.0;
    result.target_reached = reached;
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::vector<std::pair<double, double>> sample_random_output(const Shape& shape, int r, int count, Rng& rng) {
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        const ConditionReport rep = condition_numbers(random_cpd(shape, r, rng));
        out.emplace_back(rep.kappa, rep.kappa_angular);
    }
    return out;
}

void write_samples_csv(std::ostream& os, const Shape& shape, int r, const std::vector<SampleOutcome>& outcomes) {
    os << "shape,r,seed_index,kind,kappa,kappa_ang,tensor_norm,steps\n";
    const std::string prefix = shape.to_string() + "," + std::to_string(r) + ",";
    for (const auto& o : outcomes) {
        os << prefix << o.seed_index << ',' << to_string(o.kind) << ',';
        if (o.kind == SampleKind::Real) os << format_double(o.kappa) << ',' << format_double(o.kappa_angular);
        else os << ',';
        os << ',' << format_double(o.tensor_norm) << ',' << o.steps << '\n';
    }
}

nlohmann::json campaign_summary_json(const CampaignConfig& cfg, const CampaignResult& result) {
    nlohmann::json failures = nlohmann::json::object();
    for (const auto& o : result.outcomes) {
        if (o.kind == SampleKind::Failed) failures[std::string(to_string(o.status))] = failures.value(std::string(to_string(o.status)), 0) + 1;
    }
    const auto total = result.counts.total();
    return {
        {"shape", cfg.shape.to_string()},
        {"r", cfg.r},
        {"master_seed", cfg.master_seed},
        {"target_real_count", cfg.target_real_count},
        {"target_reached", result.target_reached},
        {"samples", total},
        {"real", result.counts.real},
        {"complex", result.counts.complex},
        {"failed", result.counts.failed},
        {"failure_breakdown", failures},
        {"real_fraction", result.real_fraction},
        {"failure_rate", total ? static_cast<double>(result.counts.failed) / static_cast<double>(total) : 0.0},
        {"wall_time_seconds", result.wall_time},
        {"workers", cfg.workers},
    };
}

}  // namespace cpdcond
