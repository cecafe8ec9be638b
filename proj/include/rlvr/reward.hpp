#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rlvr/geometry.hpp"
#include "rlvr/response_parser.hpp"

namespace rlvr {

struct PathWeights {
    double dfd = 1.0;
    double hd = 1.0;
    double rmse = 1.0;

    double sum() const { return dfd + hd + rmse; }
};

struct RewardConfig {
    /// Distance at which a path metric scores 0.5 (normalized-coordinate units).
    double tau = 100.0;
    /// Endpoint decay; default chosen so that k * tau^2 == 1.
    double k = 1e-4;
    PathWeights path_weights;
    double format_reward_value = 1.0;
    std::size_t rmse_samples = kDefaultRmseSamples;

    /// Throws Error(InvalidArgument) when a field is out of its domain.
    void validate() const;
};

/// Reads fields from a JSON object. Unknown keys raise UnknownConfigKey;
/// missing keys keep their defaults.
RewardConfig reward_config_from_json(const nlohmann::json& j);
RewardConfig load_reward_config(const std::string& path);
void to_json(nlohmann::json& j, const RewardConfig& cfg);

struct RewardComponent {
    std::string name;
    /// Always in [0, 1].
    double score = 0.0;
    double weight = 1.0;
};

struct RewardBreakdown {
    double format = 0.0;
    std::vector<RewardComponent> components;
    double total = 0.0;
    FormatVerdict verdict;

    /// format + sum(weight * score), recomputed from the parts.
    double recomputed_total() const;
    /// Score of a named component, 0 when absent.
    double component(std::string_view name) const;
};

void to_json(nlohmann::json& j, const RewardBreakdown& r);

/// 1 / (1 + d / tau). Throws NegativeDistance for d < 0.
double distance_to_score(double distance, double tau);

/// All-or-nothing verifiable reward: 1 iff both answers are the same kind and
/// equal after box canonicalization.
int binary_reward(const Answer& predicted, const Answer& truth);

/// Weighted sum of the DFD, HD and RMSE scores.
double path_reward(std::span<const Point2D> pred, std::span<const Point2D> gt, const RewardConfig& cfg);

/// exp(-k * endpoint_distance^2).
double endpoint_reward(std::span<const Point2D> pred, std::span<const Point2D> gt, double k);

/// Format reward plus IoU, gated on format compliance.
RewardBreakdown spatial_reward(std::string_view response, const BBox& gt, const RewardConfig& cfg);
/// Format reward plus path and endpoint rewards, gated on format compliance.
RewardBreakdown trajectory_reward(std::string_view response, const Trajectory& gt, const RewardConfig& cfg);

/// Same as above, starting from an already computed parse.
RewardBreakdown spatial_reward(const ParseResult& parsed, const BBox& gt, const RewardConfig& cfg);
RewardBreakdown trajectory_reward(const ParseResult& parsed, const Trajectory& gt, const RewardConfig& cfg);

}  // namespace rlvr
