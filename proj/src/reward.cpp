#include "rlvr/reward.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rlvr/error.hpp"

namespace rlvr {

namespace {

double number_field(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number()) {
        throw Error(ErrorCode::InvalidArgument, "reward config: '" + key + "' must be a number");
    }
    return j.get<double>();
}

}  // namespace

void RewardConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw Error(ErrorCode::InvalidArgument, "reward config: tau must be positive");
    }
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw Error(ErrorCode::InvalidArgument, "reward config: k must be positive");
    }
    if (!(path_weights.dfd >= 0.0 && path_weights.hd >= 0.0 && path_weights.rmse >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "reward config: path weights must be non-negative");
    }
    if (!std::isfinite(format_reward_value) || format_reward_value < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "reward config: format_reward_value must be non-negative");
    }
    if (rmse_samples == 0) {
        throw Error(ErrorCode::InvalidArgument, "reward config: rmse_samples must be positive");
    }
}

RewardConfig reward_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "reward config must be a JSON object");
    }
    RewardConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "tau") {
            cfg.tau = number_field(value, key);
        } else if (key == "k") {
            cfg.k = number_field(value, key);
        } else if (key == "format_reward_value") {
            cfg.format_reward_value = number_field(value, key);
        } else if (key == "rmse_samples") {
            const double n = number_field(value, key);
            if (!(n >= 1.0) || n != std::floor(n)) {
                throw Error(ErrorCode::InvalidArgument, "reward config: rmse_samples must be a positive integer");
            }
            cfg.rmse_samples = static_cast<std::size_t>(n);
        } else if (key == "path_weights") {
            if (!value.is_array() || value.size() != 3) {
                throw Error(ErrorCode::InvalidArgument, "reward config: path_weights must be [dfd, hd, rmse]");
            }
            cfg.path_weights = {number_field(value[0], key), number_field(value[1], key),
                                number_field(value[2], key)};
        } else {
            throw Error(ErrorCode::UnknownConfigKey, "reward config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

RewardConfig load_reward_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open reward config: " + path);
    }
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::SchemaError, "reward config is not valid JSON: " + path);
    }
    return reward_config_from_json(doc);
}

void to_json(nlohmann::json& j, const RewardConfig& cfg) {
    j = nlohmann::json{{"tau", cfg.tau},
                       {"k", cfg.k},
                       {"path_weights", {cfg.path_weights.dfd, cfg.path_weights.hd, cfg.path_weights.rmse}},
                       {"format_reward_value", cfg.format_reward_value},
                       {"rmse_samples", cfg.rmse_samples}};
}

double RewardBreakdown::recomputed_total() const {
    double t = format;
    for (const auto& c : components) {
        t += c.weight * c.score;
    }
    return t;
}

double RewardBreakdown::component(std::string_view name) const {
    for (const auto& c : components) {
        if (c.name == name) {
            return c.score;
        }
    }
    return 0.0;
}

void to_json(nlohmann::json& j, const RewardBreakdown& r) {
    nlohmann::json comps = nlohmann::json::object();
    nlohmann::json weights = nlohmann::json::object();
    for (const auto& c : r.components) {
        comps[c.name] = c.score;
        weights[c.name] = c.weight;
    }
    nlohmann::json violations = nlohmann::json::array();
    for (auto v : r.verdict.violations) {
        violations.push_back(std::string(to_string(v)));
    }
    j = nlohmann::json{{"format", r.format},
                       {"components", comps},
                       {"weights", weights},
                       {"total", r.total},
                       {"compliant", r.verdict.compliant()},
                       {"violations", violations}};
}

double distance_to_score(double distance, double tau) {
    if (distance < 0.0 || std::isnan(distance)) {
        throw Error(ErrorCode::NegativeDistance, "distance_to_score: distance must be non-negative");
    }
    if (!(tau > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "distance_to_score: tau must be positive");
    }
    return 1.0 / (1.0 + distance / tau);
}

int binary_reward(const Answer& predicted, const Answer& truth) {
    if (predicted.index() != truth.index()) {
        return 0;
    }
    if (const auto* box = std::get_if<BBox>(&predicted)) {
        return box->canonical() == std::get<BBox>(truth).canonical() ? 1 : 0;
    }
    return std::get<Trajectory>(predicted) == std::get<Trajectory>(truth) ? 1 : 0;
}

double path_reward(std::span<const Point2D> pred, std::span<const Point2D> gt, const RewardConfig& cfg) {
    const auto& w = cfg.path_weights;
    return w.dfd * distance_to_score(discrete_frechet(pred, gt), cfg.tau) +
           w.hd * distance_to_score(hausdorff(pred, gt), cfg.tau) +
           w.rmse * distance_to_score(rmse(pred, gt, cfg.rmse_samples), cfg.tau);
}

double endpoint_reward(std::span<const Point2D> pred, std::span<const Point2D> gt, double k) {
    if (!(k > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "endpoint_reward: k must be positive");
    }
    const double d = endpoint_distance(pred, gt);
    return std::exp(-k * d * d);
}

RewardBreakdown spatial_reward(const ParseResult& parsed, const BBox& gt, const RewardConfig& cfg) {
    RewardBreakdown out;
    out.verdict = parsed.verdict;
    double aff = 0.0;
    if (out.verdict.compliant() && parsed.answer && parsed.answer->bbox()) {
        out.format = cfg.format_reward_value;
        aff = iou(*parsed.answer->bbox(), gt.canonical());
    }
    out.components.push_back({"aff", aff, 1.0});
    out.total = out.recomputed_total();
    return out;
}

RewardBreakdown spatial_reward(std::string_view response, const BBox& gt, const RewardConfig& cfg) {
    return spatial_reward(parse_response(response, TaskKind::Affordance), gt, cfg);
}

RewardBreakdown trajectory_reward(const ParseResult& parsed, const Trajectory& gt, const RewardConfig& cfg) {
    if (gt.empty()) {
        throw Error(ErrorCode::EmptyTrajectory, "trajectory_reward: empty ground truth");
    }
    RewardBreakdown out;
    out.verdict = parsed.verdict;
    double dfd = 0.0;
    double hd = 0.0;
    double rm = 0.0;
    double end = 0.0;
    if (out.verdict.compliant() && parsed.answer && parsed.answer->trajectory()) {
        const auto& pred = *parsed.answer->trajectory();
        out.format = cfg.format_reward_value;
        dfd = distance_to_score(discrete_frechet(pred, gt), cfg.tau);
        hd = distance_to_score(hausdorff(pred, gt), cfg.tau);
        rm = distance_to_score(rmse(pred, gt, cfg.rmse_samples), cfg.tau);
        end = endpoint_reward(pred, gt, cfg.k);
    }
    const auto& w = cfg.path_weights;
    out.components = {{"dfd", dfd, w.dfd}, {"hd", hd, w.hd}, {"rmse", rm, w.rmse}, {"end", end, 1.0}};
    out.total = out.recomputed_total();
    return out;
}

RewardBreakdown trajectory_reward(std::string_view response, const Trajectory& gt, const RewardConfig& cfg) {
    return trajectory_reward(parse_response(response, TaskKind::Trajectory), gt, cfg);
}

}  // namespace rlvr
