#include "rlvr/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "rlvr/error.hpp"
#include "rlvr/group_optimizer.hpp"
#include "rlvr/response_parser.hpp"

namespace rlvr {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

bool in_range(const Point2D& p) {
    return p.x >= 0.0 && p.x < kCoordRange && p.y >= 0.0 && p.y < kCoordRange;
}

// Synthetic desk-scale target: an arc from lower left to upper right, in
// normalized coordinates.
Point2D arc_point(double t) {
    return {150.0 + 650.0 * t, 800.0 - 600.0 * t - 150.0 * std::sin(std::numbers::pi * t)};
}

constexpr int kArcPoints = 5;

Trajectory default_gt() {
    Trajectory gt;
    for (int i = 0; i < kArcPoints; ++i) {
        gt.push_back(arc_point(static_cast<double>(i) / (kArcPoints - 1)));
    }
    return gt;
}

// Reference policy: the target shape displaced by 100 units, (60, 80).
Trajectory default_initial_mean() {
    Trajectory mean = default_gt();
    for (auto& p : mean) {
        p.x += 60.0;
        p.y += 80.0;
    }
    return mean;
}

Trajectory trajectory_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array()) {
        throw Error(ErrorCode::InvalidArgument, "sim config: '" + key + "' must be [[x,y],...]");
    }
    Trajectory t;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw Error(ErrorCode::InvalidArgument, "sim config: '" + key + "' must be [[x,y],...]");
        }
        t.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return t;
}

double number(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number()) {
        throw Error(ErrorCode::InvalidArgument, "sim config: '" + key + "' must be a number");
    }
    return j.get<double>();
}

std::size_t count(const nlohmann::json& j, const std::string& key) {
    const double v = number(j, key);
    if (!(v >= 0.0) || v != std::floor(v)) {
        throw Error(ErrorCode::InvalidArgument, "sim config: '" + key + "' must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

}  // namespace

double ToyPolicy::sigma() const {
    return std::exp(log_sigma);
}

void ToyPolicy::validate() const {
    if (mean_traj.size() < kMinTrajectoryPoints || mean_traj.size() > kMaxTrajectoryPoints) {
        throw Error(ErrorCode::InvalidArgument, "toy policy: trajectory length must be within [3, 10]");
    }
    if (!std::isfinite(log_sigma)) {
        throw Error(ErrorCode::InvalidArgument, "toy policy: sigma must be positive and finite");
    }
}

double ToyPolicy::log_prob(std::span<const Point2D> t) const {
    if (t.size() != mean_traj.size()) {
        throw Error(ErrorCode::LengthMismatch, "log_prob: trajectory length differs from policy");
    }
    const double inv_var = std::exp(-2.0 * log_sigma);
    double sq = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double dx = t[i].x - mean_traj[i].x;
        const double dy = t[i].y - mean_traj[i].y;
        sq += dx * dx + dy * dy;
    }
    const double d = static_cast<double>(dims());
    return -d * (kHalfLog2Pi + log_sigma) - 0.5 * sq * inv_var;
}

ToyPolicy make_policy(Trajectory mean_traj, double sigma) {
    ToyPolicy p{std::move(mean_traj), std::log(sigma)};
    p.validate();
    return p;
}

std::vector<PolicySample> sample_group(const ToyPolicy& policy, std::size_t count, Rng& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = policy.sigma();
    std::vector<PolicySample> out;
    out.reserve(count);
    for (std::size_t g = 0; g < count; ++g) {
        PolicySample s;
        s.traj.reserve(policy.mean_traj.size());
        for (const auto& m : policy.mean_traj) {
            const double x = m.x + sigma * noise(rng);
            const double y = m.y + sigma * noise(rng);
            s.traj.push_back({x, y});
        }
        s.log_prob = policy.log_prob(s.traj);
        out.push_back(std::move(s));
    }
    return out;
}

double gaussian_kl(const ToyPolicy& policy, const ToyPolicy& ref) {
    if (policy.mean_traj.size() != ref.mean_traj.size()) {
        throw Error(ErrorCode::LengthMismatch, "gaussian_kl: policies differ in trajectory length");
    }
    const double d = static_cast<double>(policy.dims());
    double sq = 0.0;
    for (std::size_t i = 0; i < policy.mean_traj.size(); ++i) {
        const double dx = policy.mean_traj[i].x - ref.mean_traj[i].x;
        const double dy = policy.mean_traj[i].y - ref.mean_traj[i].y;
        sq += dx * dx + dy * dy;
    }
    const double var_ratio = std::exp(2.0 * (policy.log_sigma - ref.log_sigma));
    const double ref_var = std::exp(2.0 * ref.log_sigma);
    return 0.5 * (d * var_ratio + sq / ref_var - d) - d * (policy.log_sigma - ref.log_sigma);
}

ToyPolicy update_policy(const ToyPolicy& policy, const ToyPolicy& ref, std::span<const PolicySample> samples,
                        std::span<const double> advantages, const UpdateConfig& cfg) {
    if (samples.size() != advantages.size()) {
        throw Error(ErrorCode::LengthMismatch, "update_policy: samples and advantages differ in length");
    }
    if (policy.mean_traj.size() != ref.mean_traj.size()) {
        throw Error(ErrorCode::LengthMismatch, "update_policy: policy and reference differ in length");
    }
    const std::size_t n = policy.mean_traj.size();
    const double d = static_cast<double>(policy.dims());
    const double var = std::exp(2.0 * policy.log_sigma);

    // Natural-gradient estimates of E[A grad log pi]. For an isotropic
    // Gaussian the Fisher metric is I / sigma^2 on the mean and 2D on log sigma.
    Trajectory grad_mean(n, Point2D{});
    double grad_log_sigma = 0.0;
    if (!samples.empty()) {
        const double inv_g = 1.0 / static_cast<double>(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const auto& traj = samples[s].traj;
            if (traj.size() != n) {
                throw Error(ErrorCode::LengthMismatch, "update_policy: sample length differs from policy");
            }
            const double a = advantages[s];
            double sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = traj[i].x - policy.mean_traj[i].x;
                const double dy = traj[i].y - policy.mean_traj[i].y;
                grad_mean[i].x += inv_g * a * dx;
                grad_mean[i].y += inv_g * a * dy;
                sq += dx * dx + dy * dy;
            }
            grad_log_sigma += inv_g * a * (sq / var - d) / (2.0 * d);
        }
    }

    // Proximal KL step. On the mean the KL is quadratic, so the implicit step
    // has the closed form below; on log sigma it is solved by Newton.
    const double alpha = cfg.learning_rate * cfg.beta;
    const double ratio = std::exp(2.0 * (policy.log_sigma - ref.log_sigma));
    const double pull = alpha * ratio;

    ToyPolicy next;
    next.mean_traj.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mx = policy.mean_traj[i].x + cfg.learning_rate * grad_mean[i].x;
        const double my = policy.mean_traj[i].y + cfg.learning_rate * grad_mean[i].y;
        next.mean_traj[i] = {(mx + pull * ref.mean_traj[i].x) / (1.0 + pull),
                             (my + pull * ref.mean_traj[i].y) / (1.0 + pull)};
    }

    // Solve u + alpha * (exp(2u) - 1) / 2 = c for u = log sigma - log sigma_ref.
    const double c = policy.log_sigma - ref.log_sigma + cfg.learning_rate * grad_log_sigma;
    double u = c;
    if (alpha > 0.0) {
        u = std::min(c, 0.0);  // left of the root: Newton on a convex increasing function
        for (int it = 0; it < 60; ++it) {
            const double e = std::exp(2.0 * u);
            const double h = u + 0.5 * alpha * (e - 1.0) - c;
            const double step = h / (1.0 + alpha * e);
            u -= step;
            if (std::abs(step) < 1e-15) {
                break;
            }
        }
    }
    next.log_sigma = std::clamp(ref.log_sigma + u, kMinLogSigma, kMaxLogSigma);
    return next;
}

std::string_view to_string(RewardVariant v) {
    switch (v) {
        case RewardVariant::Full: return "FULL";
        case RewardVariant::DtwEnd: return "DTW_END";
        case RewardVariant::HdEnd: return "HD_END";
        case RewardVariant::RmseEnd: return "RMSE_END";
    }
    return "UNKNOWN";
}

std::optional<RewardVariant> variant_from_string(std::string_view name) {
    for (auto v : kAllVariants) {
        if (to_string(v) == name) {
            return v;
        }
    }
    return std::nullopt;
}

double variant_reward(RewardVariant variant, std::span<const Point2D> pred, std::span<const Point2D> gt,
                      const RewardConfig& cfg) {
    const bool compliant = pred.size() >= kMinTrajectoryPoints && pred.size() <= kMaxTrajectoryPoints &&
                           std::all_of(pred.begin(), pred.end(), in_range);
    if (!compliant) {
        return 0.0;
    }
    double task = endpoint_reward(pred, gt, cfg.k);
    switch (variant) {
        case RewardVariant::Full: task += path_reward(pred, gt, cfg); break;
        case RewardVariant::DtwEnd: task += distance_to_score(dtw(pred, gt), cfg.tau); break;
        case RewardVariant::HdEnd: task += distance_to_score(hausdorff(pred, gt), cfg.tau); break;
        case RewardVariant::RmseEnd: task += distance_to_score(rmse(pred, gt, cfg.rmse_samples), cfg.tau); break;
    }
    return cfg.format_reward_value + task;
}

void SimConfig::validate() const {
    if (variants.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sim config: at least one reward variant is required");
    }
    if (steps < 1) {
        throw Error(ErrorCode::InvalidArgument, "sim config: steps must be at least 1");
    }
    if (group_size < 1) {
        throw Error(ErrorCode::InvalidArgument, "sim config: group_size must be at least 1");
    }
    if (!(learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sim config: learning_rate must be positive");
    }
    if (!(beta >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sim config: beta must be non-negative");
    }
    if (gt.empty()) {
        throw Error(ErrorCode::EmptyTrajectory, "sim config: ground truth is empty");
    }
    if (!(initial_sigma > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sim config: initial_sigma must be positive");
    }
    make_policy(initial_mean, initial_sigma);
    reward.validate();
}

SimConfig default_sim_config() {
    SimConfig cfg;
    cfg.gt = default_gt();
    cfg.initial_mean = default_initial_mean();
    return cfg;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "sim config must be a JSON object");
    }
    SimConfig cfg = default_sim_config();
    for (const auto& [key, value] : j.items()) {
        if (key == "variants" || key == "reward_variant") {
            const auto names = value.is_array() ? value : nlohmann::json::array({value});
            cfg.variants.clear();
            for (const auto& name : names) {
                const auto v = name.is_string() ? variant_from_string(name.get<std::string>()) : std::nullopt;
                if (!v) {
                    throw Error(ErrorCode::InvalidArgument, "sim config: unknown reward variant " + name.dump());
                }
                cfg.variants.push_back(*v);
            }
        } else if (key == "steps") {
            cfg.steps = count(value, key);
        } else if (key == "group_size") {
            cfg.group_size = count(value, key);
        } else if (key == "learning_rate") {
            cfg.learning_rate = number(value, key);
        } else if (key == "beta") {
            cfg.beta = number(value, key);
        } else if (key == "seed") {
            cfg.seed = count(value, key);
        } else if (key == "gt") {
            cfg.gt = trajectory_from_json(value, key);
        } else if (key == "initial_mean") {
            cfg.initial_mean = trajectory_from_json(value, key);
        } else if (key == "initial_sigma") {
            cfg.initial_sigma = number(value, key);
        } else if (key == "reward") {
            cfg.reward = reward_config_from_json(value);
        } else if (key == "seeds") {
            if (!value.is_array()) {
                throw Error(ErrorCode::InvalidArgument, "sim config: 'seeds' must be an array");
            }
            cfg.seeds.clear();
            for (const auto& sd : value) {
                cfg.seeds.push_back(count(sd, key));
            }
        } else {
            throw Error(ErrorCode::UnknownConfigKey, "sim config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

LearningCurve run_training(const SimConfig& cfg, RewardVariant variant) {
    cfg.validate();
    Rng rng(cfg.seed);
    const ToyPolicy ref = make_policy(cfg.initial_mean, cfg.initial_sigma);
    ToyPolicy policy = ref;
    const UpdateConfig update{cfg.learning_rate, cfg.beta};

    LearningCurve curve;
    curve.variant = variant;
    curve.seed = cfg.seed;
    curve.records.reserve(cfg.steps);

    std::vector<double> rewards(cfg.group_size);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const auto samples = sample_group(policy, cfg.group_size, rng);

        CurveRecord rec;
        rec.step = step;
        rec.kl = gaussian_kl(policy, ref);
        for (std::size_t g = 0; g < samples.size(); ++g) {
            const auto& t = samples[g].traj;
            rewards[g] = variant_reward(variant, t, cfg.gt, cfg.reward);
            rec.reward += rewards[g];
            rec.dfd += discrete_frechet(t, cfg.gt);
            rec.hd += hausdorff(t, cfg.gt);
            rec.rmse += rmse(t, cfg.gt, cfg.reward.rmse_samples);
            rec.endpoint += endpoint_distance(t, cfg.gt);
        }
        const double inv_g = 1.0 / static_cast<double>(samples.size());
        rec.reward *= inv_g;
        rec.dfd *= inv_g;
        rec.hd *= inv_g;
        rec.rmse *= inv_g;
        rec.endpoint *= inv_g;
        curve.records.push_back(rec);

        const auto adv = group_advantages(rewards);
        policy = update_policy(policy, ref, samples, adv, update);
    }
    curve.final_policy = policy;
    return curve;
}

std::map<RewardVariant, LearningCurve> run_ablation(const SimConfig& cfg) {
    cfg.validate();
    std::map<RewardVariant, LearningCurve> out;
    for (auto v : cfg.variants) {
        out.emplace(v, run_training(cfg, v));
    }
    return out;
}

SimulationResult run_simulation(const SimConfig& cfg) {
    SimulationResult result;
    result.config = cfg;
    const auto seeds = cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : cfg.seeds;
    for (auto seed : seeds) {
        SimConfig run = cfg;
        run.seed = seed;
        for (auto& [variant, curve] : run_ablation(run)) {
            result.curves.push_back(std::move(curve));
        }
    }
    return result;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::json trajectory_json(const Trajectory& t) {
    auto arr = nlohmann::json::array();
    for (const auto& p : t) {
        arr.push_back({p.x, p.y});
    }
    return arr;
}

}  // namespace

nlohmann::json simulation_summary(const SimulationResult& result) {
    const auto& cfg = result.config;
    nlohmann::json variants = nlohmann::json::object();
    std::vector<double> medians;
    std::vector<RewardVariant> order;
    for (auto v : kAllVariants) {
        std::vector<const LearningCurve*> runs;
        for (const auto& c : result.curves) {
            if (c.variant == v) {
                runs.push_back(&c);
            }
        }
        if (runs.empty()) {
            continue;
        }
        std::vector<double> initial;
        std::vector<double> final_avg;
        std::vector<double> dfd;
        std::vector<double> hd;
        std::vector<double> rm;
        std::vector<double> end;
        auto seeds = nlohmann::json::array();
        for (const auto* c : runs) {
            const auto& first = c->records.front();
            const auto& last = c->records.back();
            initial.push_back(first.avg_distance());
            final_avg.push_back(last.avg_distance());
            dfd.push_back(last.dfd);
            hd.push_back(last.hd);
            rm.push_back(last.rmse);
            end.push_back(last.endpoint);
            seeds.push_back({{"seed", c->seed},
                             {"initial_avg_distance", first.avg_distance()},
                             {"final_avg_distance", last.avg_distance()},
                             {"final_sigma", c->final_policy.sigma()}});
        }
        const double med = median(final_avg);
        medians.push_back(med);
        order.push_back(v);
        variants[std::string(to_string(v))] = {{"median_initial_avg_distance", median(initial)},
                                               {"median_final_avg_distance", med},
                                               {"median_final_dfd", median(dfd)},
                                               {"median_final_hd", median(hd)},
                                               {"median_final_rmse", median(rm)},
                                               {"median_final_endpoint", median(end)},
                                               {"runs", seeds}};
    }
    const auto perf = normalize_negate(medians);
    for (std::size_t i = 0; i < order.size(); ++i) {
        variants[std::string(to_string(order[i]))]["performance"] = perf[i];
    }

    nlohmann::json reward = cfg.reward;
    return {{"steps", cfg.steps},
            {"group_size", cfg.group_size},
            {"learning_rate", cfg.learning_rate},
            {"beta", cfg.beta},
            {"seeds", cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : cfg.seeds},
            {"initial_sigma", cfg.initial_sigma},
            {"gt", trajectory_json(cfg.gt)},
            {"initial_mean", trajectory_json(cfg.initial_mean)},
            {"reward", reward},
            {"metric", "final-step (DFD + HD + RMSE) / 3, mean over the sampled group, median over seeds"},
            {"performance_transform", "-(metric - min) / (max - min) across variants"},
            {"variants", variants}};
}

std::string curve_to_csv(const LearningCurve& curve) {
    std::string out = "step,reward,dfd,hd,rmse,endpoint,kl\n";
    for (const auto& r : curve.records) {
        out += std::to_string(r.step);
        for (double v : {r.reward, r.dfd, r.hd, r.rmse, r.endpoint, r.kl}) {
            out += ',';
            out += format_number(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<double> normalize_negate(std::span<const double> values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) {
        return out;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double span = *hi - *lo;
    if (!(span > 0.0)) {
        return out;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = -(values[i] - *lo) / span;
    }
    return out;
}

}  // namespace rlvr
