#include "rlvr/group_optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "rlvr/error.hpp"

namespace rlvr {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::NonFiniteInput, std::string(what) + ": non-finite value");
    }
}

}  // namespace

void OptimConfig::validate() const {
    if (!(beta >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "optim config: beta must be non-negative");
    }
    if (group_size < 1) {
        throw Error(ErrorCode::InvalidArgument, "optim config: group_size must be at least 1");
    }
    if (!(epsilon > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "optim config: epsilon must be positive");
    }
}

std::vector<double> group_advantages(std::span<const double> rewards, double epsilon) {
    if (rewards.empty()) {
        throw Error(ErrorCode::InvalidArgument, "group_advantages: empty group");
    }
    require_finite(rewards, "group_advantages");

    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) {
        mean += r;
    }
    mean /= n;
    double var = 0.0;
    for (double r : rewards) {
        var += (r - mean) * (r - mean);
    }
    const double stddev = std::sqrt(var / n);

    std::vector<double> adv(rewards.size(), 0.0);
    if (stddev < epsilon) {
        return adv;
    }
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        adv[i] = (rewards[i] - mean) / stddev;
    }
    return adv;
}

GroupScore score_group(std::span<const double> rewards, double epsilon) {
    return GroupScore{{rewards.begin(), rewards.end()}, group_advantages(rewards, epsilon)};
}

std::vector<double> kl_penalty(std::span<const double> logp_policy, std::span<const double> logp_ref) {
    if (logp_policy.size() != logp_ref.size()) {
        throw Error(ErrorCode::LengthMismatch, "kl_penalty: log-probability lists differ in length");
    }
    require_finite(logp_policy, "kl_penalty");
    require_finite(logp_ref, "kl_penalty");
    std::vector<double> kl(logp_policy.size());
    for (std::size_t i = 0; i < kl.size(); ++i) {
        const double d = logp_ref[i] - logp_policy[i];
        // expm1 keeps the estimate exact near d == 0.
        kl[i] = std::max(0.0, std::expm1(d) - d);
    }
    return kl;
}

double rlvr_objective(std::span<const double> rewards, std::span<const double> kl, double beta) {
    if (rewards.size() != kl.size()) {
        throw Error(ErrorCode::LengthMismatch, "rlvr_objective: rewards and kl differ in length");
    }
    if (rewards.empty()) {
        throw Error(ErrorCode::InvalidArgument, "rlvr_objective: empty batch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        sum += rewards[i] - beta * kl[i];
    }
    return sum / static_cast<double>(rewards.size());
}

}  // namespace rlvr
