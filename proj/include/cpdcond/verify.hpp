#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpdcond/rng.hpp"
#include "cpdcond/tensor.hpp"
#include "json.hpp"

namespace cpdcond {

struct OracleReport {
    std::string name;
    int trials = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    /// Named side results (per-case errors, thresholds, ratios).
    std::map<std::string, double> details;

    void finish() { passed = max_violation <= tolerance; }
};

nlohmann::json to_json(const OracleReport& report);

/// A pair of rank-1 directions (u^1..u^d), (v^1..v^d) of unit vectors.
struct RankTwoPair {
    std::vector<Eigen::VectorXd> u;
    std::vector<Eigen::VectorXd> v;

    Rank1Term term_u() const;
    Rank1Term term_v() const;
};

/// Sample from D(eps) = {0.9 |u1-v1| < |uk-vk| < |u1-v1| < eps, k >= 2}: random u,
/// v obtained by rotating each u^k by a prescribed distance, then a membership check.
RankTwoPair sample_near_pair(const Shape& shape, double eps, Rng& rng);

/// Pair with <u^k, v^k> = 0 in every mode.
RankTwoPair cross_orthogonal_pair(const Shape& shape, Rng& rng);

OracleReport check_vol_factorization(int trials, Rng& rng);
OracleReport check_jacobian_factorization(int trials, Rng& rng);
OracleReport check_gram_blocks(int trials, Rng& rng, double epsilon = 0.05);
OracleReport check_norm_sandwich(int trials, Rng& rng, double epsilon = 0.05);
OracleReport check_q_lower_bound(int trials, Rng& rng, double epsilon = 0.05);
OracleReport quad_check_polar_identities(int grid_size, Rng& rng);
OracleReport check_cos_inequality(int grid_size);
OracleReport check_integral_bound_scaling(const std::vector<double>& a_values, int pair_count, Rng& rng);
/// Lower bound of the (cs)^{s-1} / |cx + sy|^{2s} integral, as a scaling law in |x + y|.
OracleReport check_integral_lower_scaling(const std::vector<double>& s_values, int pair_count, Rng& rng);
/// q((I - MM^+)[cL1 sL2]) <= K |U - V|^{Sigma-1}, as a scaling law.
OracleReport check_q_upper_scaling(int pair_count, Rng& rng);

/// Geometric sweep used by the scaling checks.
inline const std::vector<double> kScalingSweep = {0.2, 0.1, 0.05, 0.025};
inline constexpr double kScalingRatioLimit = 1.5;

const std::vector<std::string>& oracle_names();

/// Runs every oracle (or only `only`, if non-empty) with independent substreams of `seed`.
/// Throws std::invalid_argument on an unknown name.
std::vector<OracleReport> run_verify_suite(int trials, std::uint64_t seed, const std::string& only = "");

}  // namespace cpdcond
