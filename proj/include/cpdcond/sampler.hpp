#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "cpdcond/condition.hpp"
#include "cpdcond/homotopy.hpp"
#include "cpdcond/tensor.hpp"
#include "json.hpp"

namespace cpdcond {

enum class SampleKind { Real, Complex, Failed };

std::string_view to_string(SampleKind kind);

struct SampleOutcome {
    SampleKind kind = SampleKind::Failed;
    /// Meaningful only for Real outcomes; +inf when the Terracini matrix is singular.
    double kappa = kInfinity;
    double kappa_angular = kInfinity;
    double tensor_norm = 0.0;
    int steps = 0;
    std::uint64_t seed_index = 0;
    /// Tracker status, kept for failure diagnostics.
    TrackStatus status = TrackStatus::StepUnderflow;

    friend bool operator==(const SampleOutcome&, const SampleOutcome&) = default;
};

struct CampaignConfig {
    Shape shape;
    int r = 0;
    int target_real_count = 1;
    std::uint64_t master_seed = 0;
    TrackerConfig tracker;
    int workers = 1;
    /// Hard cap on issued samples (0 = none); a guard for spaces with tiny real fractions.
    std::uint64_t max_samples = 0;

    void validate() const;
};

struct CampaignCounts {
    std::uint64_t real = 0;
    std::uint64_t complex = 0;
    std::uint64_t failed = 0;
    std::uint64_t total() const { return real + complex + failed; }
};

struct CampaignResult {
    std::vector<SampleOutcome> outcomes;
    CampaignCounts counts;
    double real_fraction = 0.0;
    double wall_time = 0.0;
    /// False when max_samples stopped the campaign before the target was met.
    bool target_reached = false;
};

/// Gaussian target tensor of sample `seed_index`: the first draw of its substream.
DenseTensor sample_target(const Shape& shape, std::uint64_t master_seed, std::uint64_t seed_index);

/// One acceptance-rejection trial: target, start system and gamma all come from
/// the substream (master_seed, seed_index), in that order.
SampleOutcome sample_one(const Shape& shape, int r, std::uint64_t seed_index, std::uint64_t master_seed,
                         const TrackerConfig& cfg);

/// Samples indices 0, 1, 2, ... until the shortest prefix holding target_real_count
/// Real outcomes is complete. The result does not depend on the worker count.
/// `progress`, if given, is called from worker threads with (completed prefix, reals in prefix).
CampaignResult run_campaign(const CampaignConfig& cfg,
                            const std::function<void(std::uint64_t, std::uint64_t)>& progress = {});

CampaignCounts count_outcomes(const std::vector<SampleOutcome>& outcomes);

/// Condition numbers of random_cpd draws ("random output" model).
std::vector<std::pair<double, double>> sample_random_output(const Shape& shape, int r, int count, Rng& rng);

/// Per-sample CSV: shape,r,seed_index,kind,kappa,kappa_ang,tensor_norm,steps.
/// Condition-number fields are empty for non-Real rows and "inf" for sentinels.
void write_samples_csv(std::ostream& os, const Shape& shape, int r, const std::vector<SampleOutcome>& outcomes);

nlohmann::json campaign_summary_json(const CampaignConfig& cfg, const CampaignResult& result);

}  // namespace cpdcond
