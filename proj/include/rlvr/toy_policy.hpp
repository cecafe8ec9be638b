#pragma once

#include <cstdint>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rlvr/geometry.hpp"
#include "rlvr/reward.hpp"

namespace rlvr {

/// Isotropic Gaussian over the flattened waypoints of a fixed-length
/// trajectory: every coordinate is mean + sigma * N(0, 1).
struct ToyPolicy {
    Trajectory mean_traj;
    double log_sigma = 0.0;

    double sigma() const;
    std::size_t dims() const { return 2 * mean_traj.size(); }
    /// Exact log-density of `t` under this policy. Throws on length mismatch.
    double log_prob(std::span<const Point2D> t) const;
    void validate() const;
};

/// Policy with mean `mean_traj` and the default spread (sigma = 30).
ToyPolicy make_policy(Trajectory mean_traj, double sigma = 30.0);

struct PolicySample {
    Trajectory traj;
    double log_prob = 0.0;
};

using Rng = std::mt19937_64;

std::vector<PolicySample> sample_group(const ToyPolicy& policy, std::size_t count, Rng& rng);

/// Closed-form KL(policy || ref) between the two isotropic Gaussians.
double gaussian_kl(const ToyPolicy& policy, const ToyPolicy& ref);

/// Clamp range for log sigma, [ln 1, ln 100].
inline constexpr double kMinLogSigma = 0.0;
inline const double kMaxLogSigma = std::log(100.0);

struct UpdateConfig {
    double learning_rate = 0.05;
    double beta = 0.04;
};

/// One ascent step on E[A log pi] - beta * KL(pi || ref). The advantage term
/// uses the Fisher-preconditioned score-function estimate; the KL term is
/// applied as an exact proximal step so that no beta overshoots the reference.
ToyPolicy update_policy(const ToyPolicy& policy, const ToyPolicy& ref, std::span<const PolicySample> samples,
                        std::span<const double> advantages, const UpdateConfig& cfg);

enum class RewardVariant { Full, DtwEnd, HdEnd, RmseEnd };

std::string_view to_string(RewardVariant v);
std::optional<RewardVariant> variant_from_string(std::string_view name);
inline constexpr RewardVariant kAllVariants[] = {RewardVariant::Full, RewardVariant::DtwEnd, RewardVariant::HdEnd,
                                                 RewardVariant::RmseEnd};

/// Reward the simulator assigns to one sampled trajectory: the format reward
/// (range and point-count check) plus the variant's distance terms, gated on
/// format compliance like trajectory_reward.
double variant_reward(RewardVariant variant, std::span<const Point2D> pred, std::span<const Point2D> gt,
                      const RewardConfig& cfg);

struct SimConfig {
    std::vector<RewardVariant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
    std::size_t steps = 300;
    std::size_t group_size = 8;
    double learning_rate = 0.05;
    double beta = 0.04;
    std::uint64_t seed = 7;
    /// Seeds for multi-run simulations; empty means {seed}.
    std::vector<std::uint64_t> seeds;
    Trajectory gt;
    Trajectory initial_mean;
    double initial_sigma = 30.0;
    RewardConfig reward;

    void validate() const;
};

/// Defaults with the built-in synthetic ground truth and starting policy.
SimConfig default_sim_config();
/// Overlays JSON fields onto default_sim_config(). Unknown keys are rejected.
SimConfig sim_config_from_json(const nlohmann::json& j);

struct CurveRecord {
    std::size_t step = 0;
    double reward = 0.0;
    double dfd = 0.0;
    double hd = 0.0;
    double rmse = 0.0;
    double endpoint = 0.0;
    double kl = 0.0;

    double avg_distance() const { return (dfd + hd + rmse) / 3.0; }
};

struct LearningCurve {
    RewardVariant variant = RewardVariant::Full;
    std::uint64_t seed = 0;
    std::vector<CurveRecord> records;
    ToyPolicy final_policy;
};

/// Runs sample -> reward -> advantages -> update for cfg.steps iterations.
LearningCurve run_training(const SimConfig& cfg, RewardVariant variant);

/// One curve per configured variant. Every variant starts from the same seed,
/// so the Gaussian noise stream is shared across variants.
std::map<RewardVariant, LearningCurve> run_ablation(const SimConfig& cfg);

struct SimulationResult {
    SimConfig config;
    /// One curve per (seed, variant), seeds outermost.
    std::vector<LearningCurve> curves;
};

/// run_ablation() once per configured seed.
SimulationResult run_simulation(const SimConfig& cfg);

/// Per-variant medians over seeds of the final-step metrics, plus the
/// normalized-and-negated performance score across variants.
nlohmann::json simulation_summary(const SimulationResult& result);

/// CSV with columns step,reward,dfd,hd,rmse,endpoint,kl.
std::string curve_to_csv(const LearningCurve& curve);

/// -(v - min) / (max - min) over a set of metric values; all zeros when the
/// set has no spread.
std::vector<double> normalize_negate(std::span<const double> values);

}  // namespace rlvr
