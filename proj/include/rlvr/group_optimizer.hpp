#pragma once

#include <span>
#include <vector>

namespace rlvr {

struct OptimConfig {
    /// KL coefficient.
    double beta = 0.04;
    std::size_t group_size = 8;
    /// Standard-deviation floor below which a group carries no signal.
    double epsilon = 1e-8;

    void validate() const;
};

struct GroupScore {
    std::vector<double> rewards;
    std::vector<double> advantages;

    std::size_t group_size() const { return rewards.size(); }
};

/// (r_i - mean) / std with the population standard deviation. Groups whose
/// std is below `epsilon` get all-zero advantages. Throws NonFiniteInput.
std::vector<double> group_advantages(std::span<const double> rewards, double epsilon = 1e-8);

GroupScore score_group(std::span<const double> rewards, double epsilon = 1e-8);

/// Per-sample KL estimate exp(d) - d - 1 with d = logp_ref - logp_policy.
/// Non-negative, zero iff the log-probabilities agree.
std::vector<double> kl_penalty(std::span<const double> logp_policy, std::span<const double> logp_ref);

/// mean_i (r_i - beta * kl_i).
double rlvr_objective(std::span<const double> rewards, std::span<const double> kl, double beta);

}  // namespace rlvr
